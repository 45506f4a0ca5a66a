"""Forward-mode dual numbers and Jacobian assembly.

A Dual carries a value and a single directional derivative.  Seeding the
j-th unit direction and evaluating a residual gives the j-th Jacobian
column.  All kink conventions are fixed here so the scheme's upwind
branches differentiate deterministically:

* ``pos_part`` (x -> max{x, 0}) and ``neg_part`` (x -> min{x, 0}) have
  derivative 0 at x = 0.
* binary ``maximum``/``minimum`` resolve ties toward the first argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dual",
    "value",
    "derivative",
    "elementwise",
    "pos_part",
    "neg_part",
    "maximum",
    "minimum",
    "absolute",
    "exp",
    "log",
    "clamp",
    "seed_column",
    "jacobian",
    "jacobian_colored",
]


@dataclass(frozen=True)
class Dual:
    """Value plus one directional derivative."""

    val: float
    der: float = 0.0

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.der + other.der)
        if isinstance(other, (int, float)):
            return Dual(self.val + other, self.der)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.der - other.der)
        if isinstance(other, (int, float)):
            return Dual(self.val - other, self.der)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, float)):
            return Dual(other - self.val, -self.der)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val, self.der * other.val + self.val * other.der)
        if isinstance(other, (int, float)):
            return Dual(self.val * other, self.der * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.val / other.val,
                (self.der * other.val - self.val * other.der) / (other.val * other.val),
            )
        if isinstance(other, (int, float)):
            return Dual(self.val / other, self.der / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, float)):
            return Dual(other / self.val, -other * self.der / (self.val * self.val))
        return NotImplemented

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __pow__(self, exponent):
        if isinstance(exponent, (int, float)):
            # d/dx x^p, valid away from x = 0 for non-integer p
            return Dual(self.val**exponent, exponent * self.val ** (exponent - 1) * self.der)
        return NotImplemented

    def __abs__(self):
        # convention: derivative 0 at the kink
        if self.val > 0.0:
            return Dual(self.val, self.der)
        if self.val < 0.0:
            return Dual(-self.val, -self.der)
        return Dual(0.0, 0.0)

    # comparisons act on values so branch logic reads naturally
    def __lt__(self, other):
        return self.val < value(other)

    def __le__(self, other):
        return self.val <= value(other)

    def __gt__(self, other):
        return self.val > value(other)

    def __ge__(self, other):
        return self.val >= value(other)


def value(x):
    """Strip the derivative part: float for scalars, float array for arrays."""
    if isinstance(x, Dual):
        return x.val
    if isinstance(x, np.ndarray) and x.dtype == object:
        return np.array([value(xi) for xi in x], dtype=float)
    return x


def derivative(x):
    """Derivative part; plain numbers carry derivative 0."""
    if isinstance(x, Dual):
        return x.der
    if isinstance(x, np.ndarray) and x.dtype == object:
        return np.array([derivative(xi) for xi in x], dtype=float)
    return 0.0 if np.isscalar(x) else np.zeros_like(x, dtype=float)


def _is_object_array(x) -> bool:
    return isinstance(x, np.ndarray) and x.dtype == object


def elementwise(fn, x):
    """Apply a scalar function over an object array, preserving duals."""
    out = np.empty(len(x), dtype=object)
    for i, xi in enumerate(x):
        out[i] = fn(xi)
    return out


_elementwise = elementwise


def pos_part(x):
    """max{x, 0} with derivative 0 at x = 0."""
    if isinstance(x, Dual):
        if x.val > 0.0:
            return x
        return Dual(0.0, 0.0)
    if _is_object_array(x):
        return _elementwise(pos_part, x)
    if isinstance(x, np.ndarray):
        return np.maximum(x, 0.0)
    return x if x > 0.0 else 0.0


def neg_part(x):
    """min{x, 0} with derivative 0 at x = 0."""
    if isinstance(x, Dual):
        if x.val < 0.0:
            return x
        return Dual(0.0, 0.0)
    if _is_object_array(x):
        return _elementwise(neg_part, x)
    if isinstance(x, np.ndarray):
        return np.minimum(x, 0.0)
    return x if x < 0.0 else 0.0


def maximum(a, b):
    """Binary max; on ties the first argument's derivative wins."""
    if isinstance(a, Dual) or isinstance(b, Dual):
        return a if value(a) >= value(b) else b
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return np.where(np.asarray(value(a)) >= np.asarray(value(b)), a, b)
    return a if a >= b else b


def minimum(a, b):
    """Binary min; on ties the first argument's derivative wins."""
    if isinstance(a, Dual) or isinstance(b, Dual):
        return a if value(a) <= value(b) else b
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return np.where(np.asarray(value(a)) <= np.asarray(value(b)), a, b)
    return a if a <= b else b


def absolute(x):
    if isinstance(x, Dual):
        return abs(x)
    if _is_object_array(x):
        return _elementwise(absolute, x)
    return np.abs(x) if isinstance(x, np.ndarray) else abs(x)


def exp(x):
    if isinstance(x, Dual):
        e = math.exp(x.val)
        return Dual(e, e * x.der)
    if _is_object_array(x):
        return _elementwise(exp, x)
    return np.exp(x)


def log(x):
    if isinstance(x, Dual):
        return Dual(math.log(x.val), x.der / x.val)
    if _is_object_array(x):
        return _elementwise(log, x)
    return np.log(x)


def clamp(x, lo, hi):
    """Clamp into [lo, hi]; pass hi = inf to clamp from below only."""
    if isinstance(x, np.ndarray) and x.dtype != object:
        return np.clip(x, lo, None if math.isinf(hi) else hi)
    y = maximum(x, lo)
    if math.isinf(hi):
        return y
    return minimum(y, hi)


def seed_column(point: np.ndarray, j: int) -> np.ndarray:
    """Object array equal to ``point`` with a unit dual seed in slot j."""
    arr = np.empty(len(point), dtype=object)
    for k, v in enumerate(point):
        arr[k] = float(v)
    arr[j] = Dual(float(point[j]), 1.0)
    return arr


def jacobian(residual, point: np.ndarray) -> np.ndarray:
    """Dense Jacobian of ``residual`` at ``point`` by column seeding.

    One residual evaluation per column; entry (i, j) is the derivative
    part of component i under a unit seed in slot j.
    """
    point = np.asarray(point, dtype=float)
    n = len(point)
    jac = np.zeros((n, n))
    for j in range(n):
        r = residual(seed_column(point, j))
        for i, ri in enumerate(r):
            jac[i, j] = derivative(ri) if isinstance(ri, Dual) else 0.0
    return jac


def jacobian_colored(residual, point: np.ndarray, colors: np.ndarray, rows_of: list[list[int]]):
    """Jacobian entries by compressed seeding over a stencil coloring.

    ``colors[j]`` assigns column j to a color class; ``rows_of[j]`` lists
    the rows whose stencil contains column j.  Columns sharing a color
    must never share a row's stencil, so each compressed evaluation
    attributes derivatives unambiguously.  Returns (rows, cols, vals)
    triplets for sparse assembly.
    """
    point = np.asarray(point, dtype=float)
    n = len(point)
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for c in range(int(colors.max()) + 1):
        members = np.nonzero(colors == c)[0]
        if len(members) == 0:
            continue
        arr = np.empty(n, dtype=object)
        for k, v in enumerate(point):
            arr[k] = float(v)
        for j in members:
            arr[j] = Dual(float(point[j]), 1.0)
        r = residual(arr)
        for j in members:
            for i in rows_of[j]:
                ri = r[i]
                rows.append(i)
                cols.append(int(j))
                vals.append(derivative(ri) if isinstance(ri, Dual) else 0.0)
    return rows, cols, vals
