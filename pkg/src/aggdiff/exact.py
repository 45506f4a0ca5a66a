"""Reference solutions and initial data.

The self-similar porous-medium profile provides the exact solution for
the convergence study with linear mobility, U = rho^m/(m-1), and no
potentials.  Time is shifted internally by t0 so that the profile at
simulation time 0 is already smooth-free-boundary data with the target
mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.optimize

from .grid import Grids
from .scheme import StateField

__all__ = ["BarenblattParams", "barenblatt", "barenblatt_solution", "initial_datum"]


@dataclass(frozen=True)
class BarenblattParams:
    """Self-similar profile data; C is solved from the mass constraint.

    beta = 1/(d(m-1)+2), kappa = beta(m-1)/(2m), and

        B(t, x) = t^{-beta d} (C - kappa |x|^2 t^{-2 beta})_+^{1/(m-1)}

    carries mass M for every t > 0.
    """

    exponent: float
    mass: float
    t0: float
    dim: int
    C: float = field(init=False)

    def __post_init__(self):
        if self.exponent <= 1.0:
            raise ValueError("profile needs exponent > 1")
        if self.mass <= 0.0 or self.t0 <= 0.0:
            raise ValueError("mass and t0 must be positive")
        if self.dim not in (1, 2):
            raise ValueError("profile implemented for d = 1 and d = 2")
        object.__setattr__(self, "C", _solve_mass_constant(self))
        check = _profile_mass(self, self.C)
        if abs(check - self.mass) > 1e-6:
            raise ValueError(f"mass constraint violated by {abs(check - self.mass):.2e}")

    @property
    def beta(self) -> float:
        return 1.0 / (self.dim * (self.exponent - 1.0) + 2.0)

    @property
    def kappa(self) -> float:
        return self.beta * (self.exponent - 1.0) / (2.0 * self.exponent)


def _profile_mass(params: BarenblattParams, C: float) -> float:
    # mass at t = 1: integral of (C - kappa r^2)_+^{1/(m-1)} over R^d
    kappa = params.kappa
    p = 1.0 / (params.exponent - 1.0)
    radius = math.sqrt(C / kappa)
    if params.dim == 1:
        integrand = lambda r: (C - kappa * r * r) ** p
    else:
        integrand = lambda r: 2.0 * math.pi * r * (C - kappa * r * r) ** p
    val, _ = scipy.integrate.quad(integrand, 0.0, radius)
    return 2.0 * val if params.dim == 1 else val


def _solve_mass_constant(params: BarenblattParams) -> float:
    if params.exponent == 2.0:
        # closed forms, cross-checked against the quadrature in tests
        if params.dim == 1:
            return (params.mass * math.sqrt(3.0) / 8.0) ** (2.0 / 3.0)
        return math.sqrt(params.mass / (8.0 * math.pi))
    lo, hi = 1e-12, 1.0
    while _profile_mass(params, hi) < params.mass:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError("mass constant out of range")
    return scipy.optimize.brentq(
        lambda c: _profile_mass(params, c) - params.mass, lo, hi, xtol=1e-14
    )


def barenblatt(params: BarenblattParams, t: float, x: np.ndarray) -> np.ndarray:
    """Profile at simulation time t >= 0 (absolute time t + t0) and
    points x of shape (..., d)."""
    if t < 0.0:
        raise ValueError("simulation time must be >= 0")
    ts = t + params.t0
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    core = params.C - params.kappa * r2 * ts ** (-2.0 * params.beta)
    return ts ** (-params.beta * params.dim) * np.maximum(core, 0.0) ** (
        1.0 / (params.exponent - 1.0)
    )


def barenblatt_solution(params: BarenblattParams):
    """Closure (t, points) -> values for the error estimators."""

    def fn(t: float, x: np.ndarray) -> np.ndarray:
        return barenblatt(params, t, x)

    return fn


def initial_datum(kind, grids: Grids, tau: float, **kwargs) -> StateField:
    """Cell-center sampled initial state at time index 0.

    kind is "constant" (value=...), "barenblatt" (params=...), or a
    callable x -> density over (..., d) point arrays.
    """
    x = grids.centers()
    if kind == "constant":
        values = np.full(grids.n_cells, float(kwargs["value"]))
    elif kind == "barenblatt":
        values = barenblatt(kwargs["params"], 0.0, x)
    elif callable(kind):
        values = np.asarray(kind(x), dtype=float)
        if values.shape != (grids.n_cells,):
            raise ValueError("custom initial datum has wrong shape")
    else:
        raise ValueError(f"unknown initial datum {kind!r}")
    return StateField(values, 0, tau)
