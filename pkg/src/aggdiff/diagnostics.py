"""Structure-preservation diagnostics and discrete norms.

Everything here consumes solved states; nothing feeds back into the
scheme.  The free energy, dissipation product, extrema envelopes, and
the entropy functional mirror the scheme's discrete structure, so the
checks hold to solver tolerance rather than discretization order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.sparse
import scipy.sparse.linalg

from .grid import Grids
from .model import Model
from .scheme import (
    Discretization,
    SchemeOptions,
    StateField,
    assemble_xi,
    discretize,
    face_flux,
    face_velocity,
)

__all__ = [
    "DiagnosticsRecord",
    "EnvelopeParams",
    "DissipationCheck",
    "total_mass",
    "free_energy",
    "dissipation_check",
    "envelope_params_from_model",
    "extrema_envelope",
    "h1_seminorm",
    "wm11_upper_bound",
    "wm11_exact_1d",
    "lambda_entropy",
]


@dataclass
class DiagnosticsRecord:
    """One row of the per-step diagnostics series."""

    step: int
    time: float
    mass: float
    free_energy: float
    dissipation_lhs: float | None
    energy_drop: float | None
    min_density: float
    max_density: float
    entropy_slope_h1: float
    lambda_entropy: float | None
    newton_iters: int | None
    picard_iters: int | None
    residual_norm: float | None


@dataclass
class EnvelopeParams:
    """Rate data for the extrema envelopes: lam collects the curvature of
    V and K (times the initial mass), lipschitz bounds m'."""

    lam: float
    lipschitz: float
    dim: int
    alpha: float


@dataclass
class DissipationCheck:
    lhs: float
    drop: float
    ok: bool


def total_mass(values: np.ndarray, grids: Grids) -> float:
    return grids.cell_volume * float(np.sum(values))


def free_energy(
    values: np.ndarray, model: Model, grids: Grids, disc: Discretization | None = None
) -> float:
    """E_h = |Q| sum U(P) + |Q| sum V P + (|Q|^2/2) P.K P."""
    disc = disc if disc is not None else discretize(model, grids)
    u = np.asarray(model.entropy.U(np.asarray(values, dtype=float)), dtype=float)
    if not np.all(np.isfinite(u)):
        cell = grids.cells.indices[int(np.argmax(~np.isfinite(u)))]
        raise ValueError(f"internal energy not finite at cell {cell}")
    vol = grids.cell_volume
    e = vol * float(np.sum(u)) + vol * float(np.dot(disc.v, values))
    if disc.k is not None:
        e += 0.5 * vol**2 * float(values @ disc.k @ values)
    return e


def dissipation_check(
    p_prev: StateField,
    p_next: StateField,
    model: Model,
    grids: Grids,
    options: SchemeOptions,
    tol: float = 1e-8,
    disc: Discretization | None = None,
) -> DissipationCheck:
    """Verify tau |Q| sum theta v^2 <= E[P^n] - E[P^{n+1}] + tol.

    The left side is the discrete dissipation product of the accepted
    step; with U = 0 and the averaged midpoint option the inequality is
    an identity, which callers can assert via |lhs - drop| <= tol.
    """
    disc = disc if disc is not None else discretize(model, grids)
    xi = assemble_xi(p_next, p_prev, model, grids, options.midpoint_option, disc=disc)
    v = face_velocity(xi, grids)
    fd = face_flux(p_next, v, model.mobility, grids)
    lhs = p_next.tau * grids.cell_volume * float(np.sum(fd.theta * v * v))
    drop = free_energy(p_prev.values, model, grids, disc=disc) - free_energy(
        p_next.values, model, grids, disc=disc
    )
    return DissipationCheck(lhs=lhs, drop=drop, ok=lhs <= drop + tol)


def envelope_params_from_model(model: Model, grids: Grids, mass0: float) -> EnvelopeParams:
    """Assemble the envelope rate from model metadata; requires the
    model's envelope hypotheses to be certified."""
    if not model.envelope_ok:
        raise ValueError(
            f"model {model.name!r} does not certify the envelope hypotheses"
        )
    if model.mobility.lipschitz_bound is None:
        raise ValueError("mobility Lipschitz bound unavailable")
    lam = model.potentials.d2v_bound or 0.0
    if model.potentials.K is not None:
        if model.potentials.d2k_bound is None:
            raise ValueError("kernel curvature bound unavailable")
        lam += model.potentials.d2k_bound * mass0
    return EnvelopeParams(
        lam=lam,
        lipschitz=model.mobility.lipschitz_bound,
        dim=grids.dim,
        alpha=model.mobility.alpha,
    )


def extrema_envelope(
    trajectory: list[StateField], params: EnvelopeParams, slack: float = 1e-8
) -> tuple[bool, int | None]:
    """Check min P^n >= r^n min P^0 and alpha - max P^n >= r^n (alpha - max P^0)
    with r = (1 + 2 lam tau d L)^{-1}; returns (ok, first violating step)."""
    tau = trajectory[-1].tau
    rate = 1.0 / (1.0 + 2.0 * params.lam * tau * params.dim * params.lipschitz)
    min0 = float(np.min(trajectory[0].values))
    max0 = float(np.max(trajectory[0].values))
    factor = 1.0
    for n, state in enumerate(trajectory):
        if n > 0:
            factor *= rate
        if float(np.min(state.values)) < factor * min0 - slack:
            return False, n
        if not math.isinf(params.alpha):
            gap0 = params.alpha - max0
            if params.alpha - float(np.max(state.values)) < factor * gap0 - slack:
                return False, n
    return True, None


def h1_seminorm(values: np.ndarray, grids: Grids) -> float:
    """Discrete H^1 seminorm: sqrt(|Q| sum over faces of |dP/h|^2)."""
    ft = grids.faces
    if len(ft) == 0:
        return 0.0
    jumps = (values[ft.hi_pos] - values[ft.lo_pos]) / ft.spacing
    return math.sqrt(grids.cell_volume * float(np.sum(jumps * jumps)))


def _laplacian(grids: Grids) -> scipy.sparse.csr_matrix:
    # Dirichlet-masked five-point Laplacian: the field is zero outside
    # the admissible set, so exterior neighbors simply drop out
    n = grids.n_cells
    h = grids.mesh.spacing
    rows, cols, vals = [], [], []
    for p, idx in enumerate(grids.cells.indices):
        diag = sum(2.0 / hk**2 for hk in h)
        rows.append(p)
        cols.append(p)
        vals.append(diag)
        for k in range(grids.dim):
            for sign in (-1, 1):
                nb = tuple(i + sign * (k == a) for a, i in enumerate(idx))
                q = grids.cells.position.get(nb)
                if q is not None:
                    rows.append(p)
                    cols.append(q)
                    vals.append(-1.0 / h[k] ** 2)
    return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def wm11_upper_bound(values: np.ndarray, grids: Grids) -> float:
    """Feasible-flux upper bound on the discrete W^{-1,1} norm.

    Solves the zero-exterior discrete Poisson problem Lap_h u = P and
    measures |Q| sum |grad_h u / h| over every face touching an
    admissible cell; the divergence of that flux reproduces P exactly,
    so the value dominates the infimum.
    """
    u = scipy.sparse.linalg.spsolve(_laplacian(grids), np.asarray(values, dtype=float))
    h = grids.mesh.spacing
    total = 0.0
    counted = set()
    for p, idx in enumerate(grids.cells.indices):
        for k in range(grids.dim):
            for sign in (-1, 1):
                nb = tuple(i + sign * (k == a) for a, i in enumerate(idx))
                face = (idx, k) if sign == 1 else (nb, k)
                if face in counted:
                    continue
                counted.add(face)
                q = grids.cells.position.get(nb)
                u_nb = u[q] if q is not None else 0.0
                total += abs(u_nb - u[p]) / h[k]
    return grids.cell_volume * total


def wm11_exact_1d(values: np.ndarray, grids: Grids) -> float:
    """Exact discrete W^{-1,1} norm in one dimension.

    The divergence constraint leaves one free flux constant per block of
    consecutive admissible cells; the block cost is an l1 distance to
    the prefix sums, minimized at their median.
    """
    if grids.dim != 1:
        raise ValueError("exact evaluation only in one dimension")
    h = grids.mesh.spacing[0]
    idx = [i[0] for i in grids.cells.indices]
    total = 0.0
    start = 0
    for stop in range(1, len(idx) + 1):
        if stop == len(idx) or idx[stop] != idx[stop - 1] + 1:
            block = np.asarray(values[start:stop], dtype=float)
            # flux at the faces of the block: c + h * prefix sums
            prefix = h * np.concatenate([[0.0], np.cumsum(block)])
            c = -float(np.median(prefix))
            total += float(np.sum(np.abs(c + prefix)))
            start = stop
    return grids.cell_volume * total


def _lambda_quadrature(model: Model):
    """Lambda with Lambda'' = U''/m, anchored (value and slope zero) at
    alpha/2, or at 1 when there is no finite saturation level.

    The double primitive collapses to a single integral,
    Lambda(s) = int_a^s (s - r) U''(r)/m(r) dr; the (s - r) weight keeps
    the integrand bounded even where m degenerates at the endpoints.
    """
    ddU = model.entropy.ddU
    if ddU is None:
        raise ValueError("entropy functional needs U''")
    mob = model.mobility
    anchor = 1.0 if math.isinf(mob.alpha) else 0.5 * mob.alpha

    def lam(s: float) -> float:
        if s == anchor:
            return 0.0
        # keep quadrature nodes strictly inside (0, alpha)
        eps = 1e-9 * (1.0 if math.isinf(mob.alpha) else mob.alpha)
        s = max(s, eps)
        if not math.isinf(mob.alpha):
            s = min(s, mob.alpha - eps)
        val, _ = scipy.integrate.quad(
            lambda r: (s - r) * float(ddU(r)) / float(mob.m(r)),
            anchor,
            s,
            limit=200,
        )
        return val

    return lam


def lambda_entropy(values: np.ndarray, model: Model, grids: Grids) -> float:
    """|Q| sum Lambda_U(P_i); for zero drift and kernel this decays in time."""
    values = np.asarray(values, dtype=float)
    if model.lambda_closed_form is not None:
        lam_vals = np.asarray(model.lambda_closed_form(values), dtype=float)
    else:
        lam = _lambda_quadrature(model)
        clipped = np.clip(values, 0.0, model.mobility.alpha)
        lam_vals = np.array([lam(float(s)) for s in clipped])
    return grids.cell_volume * float(np.sum(lam_vals))
