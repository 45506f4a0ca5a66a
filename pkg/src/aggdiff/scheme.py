"""Implicit upwind finite-volume scheme for gradient-flow equations.

One step solves, for the unknown P = P^{n+1} on the admissible cells,

    (P_i - P_i^n)/tau + sum_k (F_{i+e_k/2} - F_{i-e_k/2})/h_k = 0,

with upwind fluxes F = mw(P_i, P_j) v_+ + mw(P_j, P_i) v_- driven by the
velocity v = -(xi_j - xi_i)/h_k of the discrete potential
xi = U'(P) + V + |Q| K P^mid.  Fluxes vanish on non-interior faces, which
encodes the no-flux boundary.  The midpoint option picks the time level
of the nonlocal term: O1 uses P^{n+1}, O2 uses P^n, O3 their average.

The nonlinear system is solved by Newton with a forward-mode dual
Jacobian; a nonzero kernel with O1/O3 adds an outer fixed-point loop
that lags the nonlocal term, so the inner system stays stencil-local.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import autodiff as ad
from .grid import Grids
from .model import Model

__all__ = [
    "StateField",
    "SchemeOptions",
    "FaceData",
    "SolveReport",
    "SolverError",
    "Discretization",
    "discretize",
    "assemble_xi",
    "face_velocity",
    "face_flux",
    "residual",
    "step",
]

MIDPOINT_OPTIONS = ("O1", "O2", "O3")


@dataclass
class StateField:
    """Cell densities in dense order at time time_index * tau."""

    values: np.ndarray
    time_index: int
    tau: float

    @property
    def time(self) -> float:
        return self.time_index * self.tau


@dataclass
class SchemeOptions:
    midpoint_option: str = "O3"
    newton_tol: float = 1e-12
    newton_max_iters: int = 50
    picard_tol: float | None = None  # defaults to newton_tol
    picard_max_iters: int = 80

    def __post_init__(self):
        if self.midpoint_option not in MIDPOINT_OPTIONS:
            raise ValueError(f"midpoint_option must be one of {MIDPOINT_OPTIONS}")

    @property
    def picard_tolerance(self) -> float:
        return self.newton_tol if self.picard_tol is None else self.picard_tol


@dataclass
class FaceData:
    """Velocity, flux, and upwind mobility theta per interior face.

    theta picks the donor-side mobility by the strict sign of v, so
    flux = theta * velocity holds exactly, including theta = 0 at v = 0.
    """

    velocity: np.ndarray
    flux: np.ndarray
    theta: np.ndarray


@dataclass
class SolveReport:
    newton_iters: int
    picard_iters: int
    residual_norm: float
    wall_time: float


class SolverError(RuntimeError):
    """Newton or fixed-point failure; carries the last residual norm."""

    def __init__(self, message: str, residual_norm: float = float("nan")):
        super().__init__(message)
        self.residual_norm = residual_norm


@dataclass
class Discretization:
    """Per-(model, grids) sampled data shared across steps."""

    model: Model
    grids: Grids
    v: np.ndarray
    k: np.ndarray | None
    neighbors: list[list[int]]
    colors: np.ndarray

    @property
    def n(self) -> int:
        return self.grids.n_cells


def discretize(model: Model, grids: Grids) -> Discretization:
    """Sample potentials and precompute the stencil coloring."""
    from .model import sample_potentials

    v, k = sample_potentials(model.potentials, grids)
    neighbors = grids.neighbors()
    if grids.dim == 1:
        colors = np.array([i[0] % 3 for i in grids.cells.indices])
    elif grids.dim == 2:
        colors = np.array([(i[0] + 2 * i[1]) % 5 for i in grids.cells.indices])
    else:
        raise ValueError("scheme supports d = 1 and d = 2")
    return Discretization(model, grids, v, k, neighbors, colors)


def _guard_entropy_domain(values: np.ndarray, disc: Discretization):
    ent = disc.model.entropy
    alpha = disc.model.mobility.alpha
    if ent.singular_at_zero and np.any(values <= 0.0):
        cell = disc.grids.cells.indices[int(np.argmin(values))]
        raise SolverError(f"entropy slope singular at 0; density <= 0 in cell {cell}")
    if ent.singular_at_alpha and np.any(values >= alpha):
        cell = disc.grids.cells.indices[int(np.argmax(values))]
        raise SolverError(f"entropy slope singular at alpha; density >= {alpha} in cell {cell}")


def _matvec(k: np.ndarray, vec):
    if isinstance(vec, np.ndarray) and vec.dtype == object:
        n = len(vec)
        out = np.empty(n, dtype=object)
        for i in range(n):
            acc = 0.0
            row = k[i]
            for j in range(n):
                acc = acc + row[j] * vec[j]
            out[i] = acc
        return out
    return k @ vec


def _midpoint(p_next, p_prev, option: str):
    if option == "O1":
        return p_next
    if option == "O2":
        return p_prev
    return 0.5 * (p_next + p_prev)


def _xi_arrays(p_next, p_prev, disc: Discretization, option: str, nonlocal_term=None):
    _guard_entropy_domain(np.asarray(ad.value(p_next), dtype=float), disc)
    xi = disc.model.entropy.dU(p_next) + disc.v
    if nonlocal_term is not None:
        xi = xi + nonlocal_term
    elif disc.k is not None:
        mid = _midpoint(p_next, p_prev, option)
        xi = xi + disc.grids.cell_volume * _matvec(disc.k, mid)
    return xi


def _face_flux_scalar(p_lo, p_hi, v, mobility):
    return mobility.upwind(p_lo, p_hi) * ad.pos_part(v) + mobility.upwind(
        p_hi, p_lo
    ) * ad.neg_part(v)


def _residual_arrays(p_next, p_prev, tau: float, disc: Discretization, option: str, nonlocal_term=None):
    xi = _xi_arrays(p_next, p_prev, disc, option, nonlocal_term)
    ft = disc.grids.faces
    mob = disc.model.mobility
    if isinstance(p_next, np.ndarray) and p_next.dtype == object:
        g = np.empty(disc.n, dtype=object)
        for i in range(disc.n):
            g[i] = (p_next[i] - p_prev[i]) / tau
        for f in range(len(ft)):
            lo, hi, h = int(ft.lo_pos[f]), int(ft.hi_pos[f]), float(ft.spacing[f])
            v = -(xi[hi] - xi[lo]) / h
            flux = _face_flux_scalar(p_next[lo], p_next[hi], v, mob)
            g[lo] = g[lo] + flux / h
            g[hi] = g[hi] - flux / h
        return g
    v = -(xi[ft.hi_pos] - xi[ft.lo_pos]) / ft.spacing
    flux = _face_flux_scalar(p_next[ft.lo_pos], p_next[ft.hi_pos], v, mob)
    div = np.zeros(disc.n)
    np.add.at(div, ft.lo_pos, flux / ft.spacing)
    np.subtract.at(div, ft.hi_pos, flux / ft.spacing)
    return (p_next - p_prev) / tau + div


def assemble_xi(
    p_next: StateField,
    p_prev: StateField,
    model: Model,
    grids: Grids,
    option: str = "O3",
    disc: Discretization | None = None,
) -> np.ndarray:
    """Discrete potential xi_i = U'(P^{n+1}_i) + V_i + |Q| (K P^mid)_i."""
    if option not in MIDPOINT_OPTIONS:
        raise ValueError(f"midpoint option must be one of {MIDPOINT_OPTIONS}")
    disc = disc if disc is not None else discretize(model, grids)
    return _xi_arrays(p_next.values, p_prev.values, disc, option)


def face_velocity(xi: np.ndarray, grids: Grids) -> np.ndarray:
    """v = -(xi_{i+e_k} - xi_i)/h_k on interior faces, in face order."""
    ft = grids.faces
    return -(xi[ft.hi_pos] - xi[ft.lo_pos]) / ft.spacing


def face_flux(p_next: StateField, v: np.ndarray, mobility, grids: Grids) -> FaceData:
    """Upwind flux and theta per interior face; flux = theta * v exactly.

    theta uses strict sign indicators, so theta and the flux both vanish
    where v = 0.
    """
    ft = grids.faces
    a = p_next.values[ft.lo_pos]
    b = p_next.values[ft.hi_pos]
    mw_ab = mobility.upwind(a, b)
    mw_ba = mobility.upwind(b, a)
    flux = mw_ab * ad.pos_part(v) + mw_ba * ad.neg_part(v)
    theta = mw_ab * (v > 0.0) + mw_ba * (v < 0.0)
    return FaceData(velocity=v, flux=flux, theta=theta)


def residual(
    p_next: StateField,
    p_prev: StateField,
    model: Model,
    grids: Grids,
    options: SchemeOptions,
    disc: Discretization | None = None,
) -> np.ndarray:
    """Scheme residual G(P^{n+1}; P^n), zero exactly at a scheme solution."""
    disc = disc if disc is not None else discretize(model, grids)
    return _residual_arrays(
        p_next.values, p_prev.values, p_next.tau, disc, options.midpoint_option
    )


def _solve_linear(disc: Discretization, rows, cols, vals, rhs: np.ndarray) -> np.ndarray:
    n = disc.n
    if disc.grids.dim == 1:
        band = np.zeros((3, n))
        for r, c, val in zip(rows, cols, vals):
            band[1 + r - c, c] = val
        return scipy.linalg.solve_banded((1, 1), band, rhs)
    mat = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return scipy.sparse.linalg.spsolve(mat, rhs)


def _newton(
    start: np.ndarray,
    p_prev: np.ndarray,
    tau: float,
    disc: Discretization,
    options: SchemeOptions,
    nonlocal_term: np.ndarray | None,
) -> tuple[np.ndarray, int, float]:
    ent = disc.model.entropy
    alpha = disc.model.mobility.alpha
    option = options.midpoint_option

    def res(arr):
        return _residual_arrays(arr, p_prev, tau, disc, option, nonlocal_term)

    p = start.astype(float).copy()
    g = res(p)
    for it in range(1, options.newton_max_iters + 1):
        rows, cols, vals = ad.jacobian_colored(res, p, disc.colors, disc.neighbors)
        delta = _solve_linear(disc, rows, cols, vals, -g)
        p_new = p + delta
        # singular entropy slopes reject iterates outside (0, alpha)
        if ent.singular_at_zero or ent.singular_at_alpha:
            halvings = 0
            while _outside_entropy_domain(p_new, ent, alpha):
                if halvings >= 30:
                    raise SolverError(
                        "Newton iterate pinned outside the entropy domain",
                        float(np.max(np.abs(g))),
                    )
                delta *= 0.5
                p_new = p + delta
                halvings += 1
        p = p_new
        g = res(p)
        norm = float(np.max(np.abs(g)))
        if norm <= options.newton_tol:
            return p, it, norm
    raise SolverError(
        f"Newton stalled after {options.newton_max_iters} iterations "
        f"(residual {float(np.max(np.abs(g))):.3e})",
        float(np.max(np.abs(g))),
    )


def _outside_entropy_domain(p: np.ndarray, ent, alpha: float) -> bool:
    if ent.singular_at_zero and np.any(p <= 0.0):
        return True
    if ent.singular_at_alpha and np.any(p >= alpha):
        return True
    return False


def step(
    p_prev: StateField,
    model: Model,
    grids: Grids,
    options: SchemeOptions,
    disc: Discretization | None = None,
) -> tuple[StateField, SolveReport]:
    """Advance one implicit step; returns the new state and a solve report.

    With a kernel and O1/O3 the nonlocal term is lagged in an outer
    fixed-point loop (stopping when successive iterates agree to the
    Picard tolerance in sup-norm and the full residual meets the Newton
    tolerance); otherwise a single Newton solve handles the step.
    """
    t0 = time.perf_counter()
    disc = disc if disc is not None else discretize(model, grids)
    tau = p_prev.tau
    option = options.midpoint_option
    prev = p_prev.values

    if disc.k is None or option == "O2":
        z = None
        if disc.k is not None:
            z = disc.grids.cell_volume * (disc.k @ prev)
        sol, iters, norm = _newton(prev, prev, tau, disc, options, z)
        report = SolveReport(iters, 0, norm, time.perf_counter() - t0)
        return StateField(sol, p_prev.time_index + 1, tau), report

    q = prev.astype(float).copy()
    newton_total = 0
    for m in range(1, options.picard_max_iters + 1):
        z = disc.grids.cell_volume * (disc.k @ _midpoint(q, prev, option))
        q_new, iters, _ = _newton(q, prev, tau, disc, options, z)
        newton_total += iters
        diff = float(np.max(np.abs(q_new - q)))
        q = q_new
        if diff <= options.picard_tolerance:
            true_norm = float(
                np.max(np.abs(_residual_arrays(q, prev, tau, disc, option)))
            )
            if true_norm <= options.newton_tol:
                report = SolveReport(newton_total, m, true_norm, time.perf_counter() - t0)
                return StateField(q, p_prev.time_index + 1, tau), report
    raise SolverError(
        f"fixed-point loop for the nonlocal term did not converge "
        f"in {options.picard_max_iters} rounds (last update {diff:.3e}); "
        "a smaller time step usually fixes this",
        diff,
    )
