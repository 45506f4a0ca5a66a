"""Grid construction: admissible cells, interior faces, point location."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aggdiff.grid import (
    MeshSpec,
    build_grids,
    build_index_set,
    interior_faces,
    interpolate_piecewise,
    locate_cell,
    make_domain,
)
from aggdiff.scheme import StateField


def test_unit_interval_quarter_spacing_cells():
    # centers at 0.25, 0.5, 0.75 are the only multiples of h inside (0,1)
    cells = build_index_set(MeshSpec((0.25,)), make_domain("interval", a=0.0, b=1.0))
    assert cells.indices == [(1,), (2,), (3,)]


def test_coarse_square_single_cell():
    cells = build_index_set(
        MeshSpec((8.0, 8.0)), make_domain("box", bounds=[(-4.0, 4.0), (-4.0, 4.0)])
    )
    assert cells.indices == [(0, 0)]


def test_unit_interval_two_interior_faces():
    mesh = MeshSpec((0.25,))
    cells = build_index_set(mesh, make_domain("interval", a=0.0, b=1.0))
    faces = interior_faces(mesh, cells)
    assert len(faces) == 2
    assert {f.lower for f in faces} == {(1,), (2,)}
    assert all(f.axis == 0 for f in faces)


def test_empty_domain_raises():
    with pytest.raises(ValueError, match="no cell centers"):
        build_index_set(MeshSpec((0.5,)), make_domain("interval", a=0.0, b=0.4))


def test_open_domain_excludes_boundary_centers():
    # x = 0 and x = 1 sit on the boundary; the open interval drops them
    cells = build_index_set(MeshSpec((0.5,)), make_domain("interval", a=0.0, b=1.0))
    assert cells.indices == [(1,)]


def test_ball_domain_matches_exhaustive_scan():
    h = 0.25
    dom = make_domain("ball", center=(0.0, 0.0), radius=1.0)
    cells = build_index_set(MeshSpec((h, h)), dom)
    brute = set()
    for i in range(-20, 21):
        for j in range(-20, 21):
            if (i * h) ** 2 + (j * h) ** 2 < 1.0:
                brute.add((i, j))
    assert set(cells.indices) == brute


def test_peanut_domain_matches_exhaustive_scan():
    h = 0.5
    dom = make_domain("peanut")
    cells = build_index_set(MeshSpec((h, h)), dom)
    brute = set()
    for i in range(-40, 41):
        for j in range(-40, 41):
            x, y = i * h, j * h
            if ((x * x - 3.9) ** 2 + y * y) < 16.0:
                brute.add((i, j))
    assert set(cells.indices) == brute
    # two lobes joined by a waist: strictly more cells off-axis than a bar
    assert (0, 0) in brute and (4, 0) in brute and (-4, 0) in brute


def test_face_count_square_grid(square_grid):
    # 3x3 admissible block at h=0.5 inside (-1,1)^2: 2*3 faces per axis
    assert square_grid.n_cells == 9
    assert len(square_grid.faces) == 12


def test_cell_volume_and_centers(square_grid):
    assert square_grid.cell_volume == pytest.approx(0.25)
    centers = square_grid.centers()
    assert centers.shape == (9, 2)
    assert centers.min() == pytest.approx(-0.5)
    assert centers.max() == pytest.approx(0.5)


def test_locate_cell_rounds_to_nearest_center():
    mesh = MeshSpec((0.25,))
    assert locate_cell(mesh, np.array([0.26])) == (1,)
    assert locate_cell(mesh, np.array([0.49])) == (2,)
    # face points belong to the upper cell
    assert locate_cell(mesh, np.array([0.375])) == (2,)


def test_interpolate_single_state_spatial_lookup(interval_grid):
    vals = np.array([1.0, 2.0, 3.0])
    state = StateField(vals, time_index=0, tau=0.1)
    assert interpolate_piecewise(state, interval_grid, np.array([0.26])) == 1.0
    assert interpolate_piecewise(state, interval_grid, np.array([0.74])) == 3.0
    # outside the admissible cells the density is zero
    assert interpolate_piecewise(state, interval_grid, np.array([5.0])) == 0.0


def test_interpolate_trajectory_slab_convention(interval_grid):
    tau = 0.5
    traj = [
        StateField(np.full(3, float(n)), time_index=n, tau=tau) for n in range(3)
    ]
    x = np.array([0.5])
    # slab [n tau, (n+1) tau) reads the state at the end of the slab
    assert interpolate_piecewise(traj, interval_grid, x, t=0.0) == 1.0
    assert interpolate_piecewise(traj, interval_grid, x, t=0.49) == 1.0
    assert interpolate_piecewise(traj, interval_grid, x, t=0.5) == 2.0
    with pytest.raises(ValueError):
        interpolate_piecewise(traj, interval_grid, x, t=1.0)
    with pytest.raises(ValueError):
        interpolate_piecewise(traj, interval_grid, x, t=-0.01)


@settings(deadline=None, max_examples=50)
@given(st.integers(min_value=0, max_value=2))
def test_interpolation_recovers_cell_values(i):
    grids = build_grids(MeshSpec((0.25,)), make_domain("interval", a=0.0, b=1.0))
    vals = np.array([4.0, 5.0, 6.0])
    state = StateField(vals, time_index=0, tau=1.0)
    center = grids.centers()[i]
    assert interpolate_piecewise(state, grids, center) == vals[i]


def test_neighbors_include_self_and_axis_partners(square_grid):
    nbrs = square_grid.neighbors()
    pos = square_grid.cells.position
    center = pos[(0, 0)]
    got = set(nbrs[center])
    expected = {pos[k] for k in [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]}
    assert got == expected


def test_unknown_domain_name():
    with pytest.raises(ValueError, match="unknown domain"):
        make_domain("torus")
