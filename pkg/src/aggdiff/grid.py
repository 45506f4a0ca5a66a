"""Box grids over bounded domains.

Cells are axis-aligned boxes of spacing h anchored at the origin: cell i
(an integer multi-index) is centered at x_i = i * h.  A cell is
admissible when its center lies inside the domain; the admissible set is
kept in lexicographic order so a multi-index maps to a stable dense
position.  Refining h -> h/2 keeps every coarse center a fine center,
which the convergence estimators rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "MeshSpec",
    "DomainShape",
    "CellIndexSet",
    "FaceIndex",
    "FaceTable",
    "Grids",
    "make_domain",
    "build_index_set",
    "interior_faces",
    "build_grids",
    "locate_cell",
    "interpolate_piecewise",
]


@dataclass(frozen=True)
class MeshSpec:
    """Uniform spacing per axis; dimension is len(spacing)."""

    spacing: tuple[float, ...]

    def __post_init__(self):
        if not self.spacing or any(h <= 0.0 for h in self.spacing):
            raise ValueError("spacing must be positive per axis")

    @property
    def dim(self) -> int:
        return len(self.spacing)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def center(self, index: tuple[int, ...]) -> np.ndarray:
        return np.array(index, dtype=float) * np.array(self.spacing)


@dataclass(frozen=True)
class DomainShape:
    """Membership predicate plus a bounding box [lo_k, hi_k] per axis.

    The predicate must be False outside the bounding box.
    """

    name: str
    predicate: Callable[[np.ndarray], bool]
    bounding_box: tuple[tuple[float, float], ...]

    @property
    def dim(self) -> int:
        return len(self.bounding_box)

    def contains(self, x: np.ndarray) -> bool:
        return bool(self.predicate(np.asarray(x, dtype=float)))


def make_domain(name: str, **params) -> DomainShape:
    """Built-in domains: interval, box, ball, peanut.

    interval: open (a, b).  box: open product of (lo_k, hi_k).  ball:
    open ball of given center and radius.  peanut: the fixed planar
    region {(x^2 - 3.9)^2 + y^2 < 16}.
    """
    if name == "interval":
        a, b = float(params["a"]), float(params["b"])
        if not a < b:
            raise ValueError("interval needs a < b")
        return DomainShape("interval", lambda x: a < x[0] < b, ((a, b),))
    if name == "box":
        bounds = tuple((float(lo), float(hi)) for lo, hi in params["bounds"])
        if any(lo >= hi for lo, hi in bounds):
            raise ValueError("box needs lo < hi per axis")

        def inside(x, bounds=bounds):
            return all(lo < xi < hi for xi, (lo, hi) in zip(x, bounds))

        return DomainShape("box", inside, bounds)
    if name == "ball":
        center = np.asarray(params["center"], dtype=float)
        radius = float(params["radius"])
        if radius <= 0.0:
            raise ValueError("ball needs radius > 0")
        bounds = tuple((c - radius, c + radius) for c in center)
        return DomainShape(
            "ball", lambda x: float(np.sum((x - center) ** 2)) < radius**2, bounds
        )
    if name == "peanut":
        half_width = math.sqrt(3.9 + 4.0)

        def inside(x):
            return (x[0] ** 2 - 3.9) ** 2 + x[1] ** 2 < 16.0

        return DomainShape("peanut", inside, ((-half_width, half_width), (-4.0, 4.0)))
    raise ValueError(f"unknown domain {name!r}")


@dataclass
class CellIndexSet:
    """Admissible multi-indices in lexicographic order with dense lookup."""

    indices: list[tuple[int, ...]]
    position: dict[tuple[int, ...], int] = field(init=False)

    def __post_init__(self):
        self.position = {idx: k for k, idx in enumerate(self.indices)}

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, index: tuple[int, ...]) -> bool:
        return index in self.position


@dataclass(frozen=True)
class FaceIndex:
    """Interior face between cell ``lower`` and its +e_axis neighbor."""

    lower: tuple[int, ...]
    axis: int


@dataclass
class FaceTable:
    """Dense arrays over interior faces for vectorized assembly."""

    faces: list[FaceIndex]
    lo_pos: np.ndarray
    hi_pos: np.ndarray
    axis: np.ndarray
    spacing: np.ndarray

    def __len__(self) -> int:
        return len(self.faces)


@dataclass
class Grids:
    """Mesh, domain, admissible cells, and interior faces of one level."""

    mesh: MeshSpec
    domain: DomainShape
    cells: CellIndexSet
    faces: FaceTable

    @property
    def dim(self) -> int:
        return self.mesh.dim

    @property
    def cell_volume(self) -> float:
        return self.mesh.cell_volume

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def centers(self) -> np.ndarray:
        """(n_cells, dim) array of cell centers in dense order."""
        idx = np.array(self.cells.indices, dtype=float).reshape(len(self.cells), self.dim)
        return idx * np.array(self.mesh.spacing)

    def neighbors(self) -> list[list[int]]:
        """Dense positions of each cell plus its admissible axis neighbors."""
        out = []
        for idx in self.cells.indices:
            stencil = [self.cells.position[idx]]
            for k in range(self.dim):
                for sign in (-1, 1):
                    nb = tuple(i + sign * (k == a) for a, i in enumerate(idx))
                    pos = self.cells.position.get(nb)
                    if pos is not None:
                        stencil.append(pos)
            out.append(stencil)
        return out


def build_index_set(mesh: MeshSpec, domain: DomainShape) -> CellIndexSet:
    """Admissible cells: integer multi-indices whose center lies in the domain.

    Deterministic lexicographic order.  Raises if the domain resolves to
    zero cells at this spacing.
    """
    if mesh.dim != domain.dim:
        raise ValueError("mesh and domain dimensions differ")
    ranges = []
    for h, (lo, hi) in zip(mesh.spacing, domain.bounding_box):
        ranges.append(range(math.ceil(lo / h - 1e-12), math.floor(hi / h + 1e-12) + 1))
    indices = []
    for idx in _lex_product(ranges):
        if domain.contains(mesh.center(idx)):
            indices.append(idx)
    if not indices:
        raise ValueError(
            f"domain {domain.name!r} contains no cell centers at spacing {mesh.spacing}"
        )
    return CellIndexSet(indices)


def _lex_product(ranges: Sequence[range]):
    if len(ranges) == 1:
        for i in ranges[0]:
            yield (i,)
    else:
        for i in ranges[0]:
            for rest in _lex_product(ranges[1:]):
                yield (i, *rest)


def interior_faces(mesh: MeshSpec, cells: CellIndexSet) -> list[FaceIndex]:
    """Faces whose two adjacent cells are both admissible, enumerated once
    from the lower cell, lexicographic in (cell, axis)."""
    faces = []
    for idx in cells.indices:
        for k in range(mesh.dim):
            nb = tuple(i + (k == a) for a, i in enumerate(idx))
            if nb in cells:
                faces.append(FaceIndex(idx, k))
    return faces


def build_grids(mesh: MeshSpec, domain: DomainShape) -> Grids:
    cells = build_index_set(mesh, domain)
    faces = interior_faces(mesh, cells)
    lo = np.array([cells.position[f.lower] for f in faces], dtype=int)
    hi = np.array(
        [
            cells.position[tuple(i + (f.axis == a) for a, i in enumerate(f.lower))]
            for f in faces
        ],
        dtype=int,
    )
    axis = np.array([f.axis for f in faces], dtype=int)
    spacing = np.array([mesh.spacing[f.axis] for f in faces], dtype=float)
    table = FaceTable(faces, lo, hi, axis, spacing)
    return Grids(mesh, domain, cells, table)


def locate_cell(mesh: MeshSpec, x: np.ndarray) -> tuple[int, ...]:
    """Multi-index of the cell whose box contains x (faces go up)."""
    x = np.asarray(x, dtype=float)
    return tuple(int(math.floor(xi / h + 0.5)) for xi, h in zip(x, mesh.spacing))


def interpolate_piecewise(fields, grids: Grids, x, t: float | None = None):
    """Piecewise-constant space-time interpolant of a solution trajectory.

    ``fields`` is either one state or the trajectory [P^0, ..., P^N]; the
    value on the time slab [n*tau, (n+1)*tau) is P^{n+1}, and 0 is
    returned outside admissible cells.  With a single state and t=None
    the lookup is purely spatial.
    """
    if isinstance(fields, (list, tuple)):
        if t is None:
            raise ValueError("trajectory interpolation needs a time")
        tau = fields[1].tau if len(fields) > 1 else fields[0].tau
        n = math.floor(t / tau)
        if t < 0.0 or n + 1 >= len(fields):
            raise ValueError(f"time {t} outside [0, {(len(fields) - 1) * tau})")
        state = fields[n + 1]
    else:
        state = fields
    pos = grids.cells.position.get(locate_cell(grids.mesh, x))
    if pos is None:
        return 0.0
    return float(state.values[pos])
