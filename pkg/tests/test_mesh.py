"""Grid construction, ghost mirroring, and field containers."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from llbdf2 import build_grid, sample_on_grid, unit_deviation
from llbdf2.mesh import ScalarField, VectorField, extend_neumann


def test_grid_geometry():
    grid = build_grid(2, 4)
    assert grid.cells == (4, 4)
    assert grid.h == (0.25, 0.25)
    assert grid.interior_shape == (4, 4)
    assert grid.storage_shape == (6, 6)
    assert grid.num_interior == 16
    assert grid.cell_volume == pytest.approx(0.0625)
    np.testing.assert_allclose(grid.axis_coords(0), [0.125, 0.375, 0.625, 0.875])


def test_grid_anisotropic_cells():
    grid = build_grid(3, (2, 4, 8))
    assert grid.cells == (2, 4, 8)
    assert grid.h == (0.5, 0.25, 0.125)
    assert grid.storage_shape == (4, 6, 10)
    x, y, z = grid.coords()
    # sparse meshgrid: each array spans one axis only
    assert x.shape == (2, 1, 1) and y.shape == (1, 4, 1) and z.shape == (1, 1, 8)
    assert x[0, 0, 0] == pytest.approx(0.25)
    assert z[0, 0, -1] == pytest.approx(1.0 - 0.0625)


@pytest.mark.parametrize(
    "dim, cells, match",
    [
        (0, 4, "dim"),
        (4, 4, "dim"),
        (2, (4,), "cell counts"),
        (2, (4, 1), "at least 2"),
    ],
)
def test_build_grid_rejects_bad_input(dim, cells, match):
    with pytest.raises(ValueError, match=match):
        build_grid(dim, cells)


def test_extend_neumann_mirrors_faces_and_corners():
    grid = build_grid(2, 3)
    fld = ScalarField.zeros(grid)
    fld.interior[...] = np.arange(9, dtype=float).reshape(3, 3)
    extend_neumann(fld)
    v = fld.values
    np.testing.assert_array_equal(v[0, 1:-1], v[1, 1:-1])
    np.testing.assert_array_equal(v[-1, 1:-1], v[-2, 1:-1])
    np.testing.assert_array_equal(v[1:-1, 0], v[1:-1, 1])
    # corner ghosts mirror the nearest interior point
    assert v[0, 0] == v[1, 1]
    assert v[-1, -1] == v[-2, -2]
    assert v[0, -1] == v[1, -2]


def test_extend_neumann_vector_and_chaining():
    grid = build_grid(1, 4)
    m = VectorField.zeros(grid)
    m.interior[...] = np.random.default_rng(0).standard_normal((3, 4))
    out = extend_neumann(m)
    assert out is m
    np.testing.assert_array_equal(m.data[:, 0], m.data[:, 1])
    np.testing.assert_array_equal(m.data[:, -1], m.data[:, -2])


@settings(max_examples=25, deadline=None)
@given(
    dim=st.sampled_from([1, 2, 3]),
    n=st.integers(min_value=2, max_value=6),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_extend_neumann_idempotent_and_interior_preserving(dim, n, seed):
    grid = build_grid(dim, n)
    rng = np.random.default_rng(seed)
    m = VectorField.zeros(grid)
    m.interior[...] = rng.standard_normal((3,) + grid.interior_shape)
    interior_before = m.interior.copy()
    extend_neumann(m)
    once = m.data.copy()
    extend_neumann(m)
    np.testing.assert_array_equal(m.data, once)
    np.testing.assert_array_equal(m.interior, interior_before)
    # every cross-boundary first difference vanishes
    for ax in range(dim):
        lo = [slice(None)] * (1 + dim)
        hi = [slice(None)] * (1 + dim)
        lo[1 + ax], hi[1 + ax] = 0, 1
        np.testing.assert_array_equal(m.data[tuple(lo)], m.data[tuple(hi)])
        lo[1 + ax], hi[1 + ax] = -1, -2
        np.testing.assert_array_equal(m.data[tuple(lo)], m.data[tuple(hi)])


def test_vector_field_from_components_and_views():
    grid = build_grid(2, 3)
    comps = []
    for c in range(3):
        s = ScalarField.zeros(grid)
        s.values[...] = c
        comps.append(s)
    m = VectorField.from_components(comps)
    assert m.data.shape == (3, 5, 5)
    np.testing.assert_array_equal(m.data[2], 2.0)
    # component() is a view into the same storage
    view = m.component(1)
    view.values[2, 2] = 42.0
    assert m.data[1, 2, 2] == 42.0
    with pytest.raises(ValueError, match="exactly 3"):
        VectorField.from_components(comps[:2])


def test_copy_is_independent():
    grid = build_grid(1, 4)
    m = VectorField.zeros(grid)
    m.unit = True
    c = m.copy()
    c.data[0, 1] = 7.0
    assert m.data[0, 1] == 0.0
    assert c.unit


def test_sample_on_grid_broadcasts_and_extends():
    grid = build_grid(2, 4)

    def f(x, t):
        # second component constant: broadcasting must fill the block
        return np.cos(np.pi * x[0]) * np.cos(np.pi * x[1]), 0.5, x[1] + t

    m = sample_on_grid(f, grid, t=2.0)
    x, y = grid.coords()
    np.testing.assert_allclose(m.interior[0], np.cos(np.pi * x) * np.cos(np.pi * y))
    np.testing.assert_array_equal(m.interior[1], 0.5)
    np.testing.assert_allclose(m.interior[2], np.broadcast_to(y + 2.0, (4, 4)))
    np.testing.assert_array_equal(m.data[:, 0, 1:-1], m.data[:, 1, 1:-1])


def test_unit_deviation():
    grid = build_grid(2, 4)
    m = VectorField.zeros(grid)
    m.interior[2] = 1.0
    assert unit_deviation(m) == 0.0
    m.interior[0, 0, 0] = 0.3  # (0.3, 0, 1) has length sqrt(1.09)
    assert unit_deviation(m) == pytest.approx(np.sqrt(1.09) - 1.0)
