"""Finite-volume solver for aggregation-diffusion gradient flows with
saturating nonlinear mobility, plus structure diagnostics and a
convergence-benchmarking harness."""

__version__ = "0.1.0"

from .autodiff import Dual, jacobian
from .diagnostics import (
    DiagnosticsRecord,
    EnvelopeParams,
    dissipation_check,
    extrema_envelope,
    free_energy,
    h1_seminorm,
    lambda_entropy,
    total_mass,
    wm11_exact_1d,
    wm11_upper_bound,
)
from .exact import BarenblattParams, barenblatt, initial_datum
from .grid import (
    CellIndexSet,
    DomainShape,
    FaceIndex,
    Grids,
    MeshSpec,
    build_grids,
    build_index_set,
    interior_faces,
    interpolate_piecewise,
    make_domain,
)
from .harness import (
    ExperimentSpec,
    PresetResult,
    RunResult,
    error_eps1,
    error_eps2,
    make_preset,
    rate_estimate,
    run_preset,
    run_simulation,
)
from .model import (
    Entropy,
    Mobility,
    Model,
    Potentials,
    decompose_mobility,
    make_model,
    sample_potentials,
    upwind_mobility,
)
from .scheme import (
    FaceData,
    SchemeOptions,
    SolveReport,
    SolverError,
    StateField,
    assemble_xi,
    face_flux,
    face_velocity,
    residual,
    step,
)
