"""Problem data: mobilities, entropies, potentials, and named presets.

The mobility m is stored through a factorization m = up * down with up
non-decreasing, up(0) = 0, down non-increasing, and down(alpha) = 0 for
a finite saturation level alpha (down = 1 when alpha is infinite).  The
upwind value across a face takes up from the donor side and down from
the receiving side, which is what keeps densities inside [0, alpha].
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import autodiff as ad

__all__ = [
    "Mobility",
    "Entropy",
    "Potentials",
    "Model",
    "decompose_mobility",
    "upwind_mobility",
    "sample_potentials",
    "make_model",
    "linear_mobility",
    "saturating_mobility",
    "power_entropy",
    "zero_entropy",
    "MODEL_PRESETS",
]

logger = logging.getLogger(__name__)


@dataclass
class Mobility:
    """Factorized mobility with saturation level ``alpha`` (may be inf)."""

    name: str
    up: Callable
    down: Callable
    alpha: float
    lipschitz_bound: float | None = None
    _clamp_warned: bool = field(default=False, init=False, repr=False)

    def m(self, s):
        return self.up(s) * self.down(s)

    def upwind(self, a, b):
        """up(a) * down(b); arguments are clamped into [0, alpha] first.

        Solver iterates may transiently leave the box, so clamping is a
        safety net, not an error; the first occurrence is logged.
        """
        a = self._clamped(a)
        b = self._clamped(b)
        return self.up(a) * self.down(b)

    def _clamped(self, s):
        v = ad.value(s)
        out_of_box = bool(np.any(v < 0.0)) or (
            not math.isinf(self.alpha) and bool(np.any(v > self.alpha))
        )
        if out_of_box and not self._clamp_warned:
            logger.warning(
                "mobility %s: argument outside [0, %s], clamping (reported once)",
                self.name,
                self.alpha,
            )
            self._clamp_warned = True
        if out_of_box:
            return ad.clamp(s, 0.0, self.alpha)
        return s


def upwind_mobility(mobility: Mobility, a, b):
    """Donor/receiver upwind mobility value across a face."""
    return mobility.upwind(a, b)


@dataclass
class Entropy:
    """Internal energy density U; dU feeds the scheme, ddU the entropy
    functional.  Singularity flags guard evaluation at exact 0 or alpha."""

    name: str
    U: Callable
    dU: Callable
    ddU: Callable | None = None
    singular_at_zero: bool = False
    singular_at_alpha: bool = False


@dataclass
class Potentials:
    """External potential V(x) and symmetric interaction kernel K(x, y).

    Callables broadcast over trailing point axes: V maps (..., d) to
    (...), K maps a pair of (..., d) arrays to (...).  The curvature
    bounds feed the extrema-envelope rate when available.
    """

    V: Callable | None = None
    K: Callable | None = None
    d2v_bound: float | None = None
    d2k_bound: float | None = None


@dataclass
class Model:
    """Named bundle of mobility, entropy, and potentials."""

    name: str
    mobility: Mobility
    entropy: Entropy
    potentials: Potentials
    lambda_closed_form: Callable | None = None
    envelope_ok: bool = False


def _interp_table(xs: np.ndarray, ys: np.ndarray, s):
    """Piecewise-linear table lookup, usable with Dual query points."""
    if isinstance(s, np.ndarray) and s.dtype != object:
        return np.interp(s, xs, ys)
    if isinstance(s, np.ndarray):
        return ad.elementwise(lambda si: _interp_table(xs, ys, si), s)
    v = float(ad.value(s))
    j = int(np.searchsorted(xs, v))
    j = min(max(j, 1), len(xs) - 1)
    x0, x1 = xs[j - 1], xs[j]
    y0, y1 = ys[j - 1], ys[j]
    return y0 + (y1 - y0) * (s - x0) / (x1 - x0)


def decompose_mobility(
    m: Callable[[float], float],
    dm: Callable[[float], float],
    alpha: float,
    quadrature_step: float = 1e-3,
    check_tol: float = 1e-4,
    name: str = "custom",
) -> Mobility:
    """Numerical up/down factorization of a mobility vanishing at 0 and alpha.

    Integrates (dm)_+/m and (dm)_-/m from alpha/2 on a grid refined
    geometrically toward both endpoints (the quotient behaves like 1/s
    there), then exponentiates.  Raises if alpha is not finite, if the
    quotient is non-integrable at the requested resolution, or if the
    factor product fails to reproduce m on the sample grid.
    """
    if not math.isfinite(alpha) or alpha <= 0.0:
        raise ValueError("numerical factorization needs finite alpha > 0")
    eps = alpha * 1e-12
    geo = alpha / 2.0 * np.exp(-np.linspace(0.0, np.log(alpha / 2.0 / eps), 2000))
    uniform = np.arange(eps, alpha - eps, quadrature_step)
    nodes = np.unique(
        np.concatenate([[eps], geo, uniform, alpha - geo, [alpha / 2.0], [alpha - eps]])
    )
    nodes = nodes[(nodes >= eps) & (nodes <= alpha - eps)]

    # per-cell midpoints placed geometrically toward the nearer endpoint,
    # which integrates 1/s-type singularities nearly exactly
    a, b = nodes[:-1], nodes[1:]
    mid = np.where(
        0.5 * (a + b) <= alpha / 2.0,
        np.sqrt(a * b),
        alpha - np.sqrt((alpha - a) * (alpha - b)),
    )
    weights = b - a
    mvals = np.array([m(t) for t in mid])
    dvals = np.array([dm(t) for t in mid])
    with np.errstate(divide="ignore", invalid="ignore"):
        g_up = np.maximum(dvals, 0.0) / mvals
        g_dn = np.minimum(dvals, 0.0) / mvals
    if not (np.all(np.isfinite(g_up)) and np.all(np.isfinite(g_dn))):
        bad = mid[~(np.isfinite(g_up) & np.isfinite(g_dn))][0]
        raise ValueError(
            f"mobility quotient dm/m not integrable near s={bad:.3e} "
            f"at quadrature step {quadrature_step}"
        )
    anchor = int(np.searchsorted(nodes, alpha / 2.0))
    cum_up = np.concatenate([[0.0], np.cumsum(g_up * weights)])
    cum_dn = np.concatenate([[0.0], np.cumsum(g_dn * weights)])
    cum_up -= cum_up[anchor]
    cum_dn -= cum_dn[anchor]
    m_half = m(alpha / 2.0)
    up_tab = np.exp(cum_up)
    dn_tab = m_half * np.exp(cum_dn)
    if not (np.all(np.isfinite(up_tab)) and np.all(np.isfinite(dn_tab))):
        raise ValueError("mobility factor overflow; quotient dm/m too singular")

    xs = np.concatenate([[0.0], nodes, [alpha]])
    up_ys = np.concatenate([[0.0], up_tab, [up_tab[-1]]])
    dn_ys = np.concatenate([[dn_tab[0]], dn_tab, [0.0]])

    def up(s):
        return _interp_table(xs, up_ys, s)

    def down(s):
        return _interp_table(xs, dn_ys, s)

    interior = nodes[(nodes > 10 * quadrature_step) & (nodes < alpha - 10 * quadrature_step)]
    check = np.array([m(t) for t in interior])
    err = np.max(np.abs(up(interior) * down(interior) - check))
    if err > check_tol:
        raise ValueError(f"factor product misses mobility by {err:.2e} > {check_tol}")
    lip = float(np.max(np.abs(dvals)))
    return Mobility(name, up, down, alpha, lipschitz_bound=lip)


def linear_mobility() -> Mobility:
    """m(s) = s, no saturation: up = identity, down = 1."""

    def up(s):
        return s

    def down(s):
        return s * 0.0 + 1.0

    return Mobility("linear", up, down, math.inf, lipschitz_bound=1.0)


def _sat_up(s):
    if isinstance(s, np.ndarray) and s.dtype != object:
        return np.where(s <= 0.5, 4.0 * s * (1.0 - s), 1.0)
    if isinstance(s, np.ndarray):
        return ad.elementwise(_sat_up, s)
    return 4.0 * s * (1.0 - s) if ad.value(s) <= 0.5 else s * 0.0 + 1.0


def _sat_down(s):
    if isinstance(s, np.ndarray) and s.dtype != object:
        return np.where(s <= 0.5, 0.25, s * (1.0 - s))
    if isinstance(s, np.ndarray):
        return ad.elementwise(_sat_down, s)
    return s * 0.0 + 0.25 if ad.value(s) <= 0.5 else s * (1.0 - s)


def saturating_mobility() -> Mobility:
    """m(s) = s(1 - s) with closed-form factors, saturation at alpha = 1.

    up(s) = 4s(1-s) below 1/2 then 1; down(s) = 1/4 below 1/2 then
    s(1-s).  Both are C^1 at the junction and the product is m exactly.
    """
    return Mobility("saturating", _sat_up, _sat_down, 1.0, lipschitz_bound=1.0)


def power_entropy(exponent: float = 2.0) -> Entropy:
    """U(s) = s^exponent / (exponent - 1) for exponent > 1."""
    if exponent <= 1.0:
        raise ValueError("power entropy needs exponent > 1")
    if exponent == 2.0:
        return Entropy("power-2", lambda s: s * s, lambda s: 2.0 * s, lambda s: s * 0.0 + 2.0)

    def U(s):
        return s**exponent / (exponent - 1.0)

    def dU(s):
        return exponent / (exponent - 1.0) * s ** (exponent - 1.0)

    def ddU(s):
        return exponent * s ** (exponent - 2.0)

    return Entropy(
        f"power-{exponent:g}", U, dU, ddU, singular_at_zero=exponent < 2.0
    )


def zero_entropy() -> Entropy:
    return Entropy("zero", lambda s: s * 0.0, lambda s: s * 0.0, lambda s: s * 0.0)


def sample_potentials(
    potentials: Potentials, grids, symmetry_tol: float = 1e-12
) -> tuple[np.ndarray, np.ndarray | None]:
    """Cell-center samples V_i and kernel matrix K_ij = K(x_i, x_j).

    The kernel sample is checked against ``symmetry_tol`` and then
    symmetrized exactly; a non-symmetric kernel is an error.
    """
    x = grids.centers()
    n = grids.n_cells
    v = np.zeros(n) if potentials.V is None else np.asarray(potentials.V(x), dtype=float)
    if v.shape != (n,):
        raise ValueError("potential sample has wrong shape")
    if potentials.K is None:
        return v, None
    k = np.asarray(potentials.K(x[:, None, :], x[None, :, :]), dtype=float)
    if k.shape != (n, n):
        raise ValueError("kernel sample has wrong shape")
    skew = float(np.max(np.abs(k - k.T))) if n else 0.0
    if skew > symmetry_tol:
        raise ValueError(f"kernel sample asymmetric by {skew:.2e} > {symmetry_tol}")
    return v, 0.5 * (k + k.T)


def _xlogx(s):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s > 0.0, s * np.log(np.where(s > 0.0, s, 1.0)), 0.0)


def _lambda_pme(s):
    # Lambda'' = 2/s anchored at s = 1 (no finite saturation level)
    return 2.0 * (_xlogx(s) - s) + 2.0


def _lambda_saturating(s):
    # Lambda'' = 2/(s(1-s)) anchored at s = 1/2
    return 2.0 * (_xlogx(s) + _xlogx(1.0 - s)) + 2.0 * math.log(2.0)


def _v_quadratic(x):
    return 0.5 * np.sum(np.asarray(x) ** 2, axis=-1)


def _v_steep_well(x):
    return 2.0 * np.sum(np.asarray(x) ** 2, axis=-1)


def _v_cosine_bump(x):
    # W^{2,inf} on (-4, 4); value and gradient vanish at the endpoints
    return 1.0 + np.cos(math.pi * np.asarray(x)[..., 0] / 4.0)


def _v_tilt(x):
    return np.asarray(x)[..., 0]


def _k_gaussian_attractive(x, y):
    return -np.exp(-0.5 * np.sum((np.asarray(x) - np.asarray(y)) ** 2, axis=-1))


def _k_gaussian_repulsive(x, y):
    return np.exp(-0.5 * np.sum((np.asarray(x) - np.asarray(y)) ** 2, axis=-1))


def _k_sine_indefinite(x, y):
    return np.sin(np.sum(np.asarray(x) + np.asarray(y), axis=-1))


_KERNELS = {
    "gaussian-attractive": (_k_gaussian_attractive, 1.0),
    "gaussian-repulsive": (_k_gaussian_repulsive, 1.0),
    "sine-indefinite": (_k_sine_indefinite, 1.0),
}


def make_model(name: str, **params) -> Model:
    """Named model presets; see MODEL_PRESETS for the list."""
    if name == "pme":
        exponent = float(params.pop("exponent", 2.0))
        _reject_extra(params)
        lam = _lambda_pme if exponent == 2.0 else None
        return Model(
            "pme",
            linear_mobility(),
            power_entropy(exponent),
            Potentials(),
            lambda_closed_form=lam,
            envelope_ok=True,
        )
    if name == "saturation-drift":
        _reject_extra(params)
        return Model(
            "saturation-drift",
            saturating_mobility(),
            power_entropy(2.0),
            Potentials(V=_v_quadratic, d2v_bound=1.0),
            lambda_closed_form=_lambda_saturating,
            envelope_ok=False,
        )
    if name == "saturation-well":
        _reject_extra(params)
        return Model(
            "saturation-well",
            saturating_mobility(),
            power_entropy(2.0),
            Potentials(V=_v_steep_well, d2v_bound=4.0),
            lambda_closed_form=_lambda_saturating,
            envelope_ok=False,
        )
    if name == "envelope-drift":
        _reject_extra(params)
        return Model(
            "envelope-drift",
            saturating_mobility(),
            power_entropy(2.0),
            Potentials(V=_v_cosine_bump, d2v_bound=(math.pi / 4.0) ** 2),
            lambda_closed_form=_lambda_saturating,
            envelope_ok=True,
        )
    if name == "boundary-drift":
        _reject_extra(params)
        # linear tilt; its gradient does not vanish on the boundary, so
        # the extrema envelopes are intentionally not certified
        return Model(
            "boundary-drift",
            saturating_mobility(),
            power_entropy(2.0),
            Potentials(V=_v_tilt, d2v_bound=0.0),
            lambda_closed_form=_lambda_saturating,
            envelope_ok=False,
        )
    if name == "aggregation":
        kernel = params.pop("kernel", "gaussian-attractive")
        _reject_extra(params)
        k_fn, k_bound = _KERNELS[kernel]
        return Model(
            f"aggregation[{kernel}]",
            saturating_mobility(),
            power_entropy(2.0),
            Potentials(K=k_fn, d2k_bound=k_bound),
            lambda_closed_form=_lambda_saturating,
            envelope_ok=False,
        )
    if name == "interaction-toy":
        kernel = params.pop("kernel", "gaussian-attractive")
        _reject_extra(params)
        k_fn, k_bound = _KERNELS[kernel]
        return Model(
            f"interaction-toy[{kernel}]",
            saturating_mobility(),
            zero_entropy(),
            Potentials(K=k_fn, d2k_bound=k_bound),
            envelope_ok=False,
        )
    raise ValueError(f"unknown model {name!r}")


def _reject_extra(params: dict):
    if params:
        raise ValueError(f"unknown model parameters {sorted(params)}")


MODEL_PRESETS = {
    "pme": "linear mobility, power entropy, no potentials",
    "saturation-drift": "m = rho(1-rho), U = rho^2, V = |x|^2/2",
    "saturation-well": "m = rho(1-rho), U = rho^2, V = 2|x|^2",
    "envelope-drift": "saturating mobility with a cosine-bump V on (-4, 4)",
    "boundary-drift": "saturating mobility with V = x (nonzero boundary drift)",
    "aggregation": "m = rho(1-rho), U = rho^2, interaction kernel",
    "interaction-toy": "U = 0, interaction kernel only",
}
