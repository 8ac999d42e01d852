"""Stencil operators against dense matrix oracles and exact discrete identities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from llbdf2 import build_grid
from llbdf2.mesh import VectorField, extend_neumann
from llbdf2.discrete_ops import (
    averaged_gradient,
    cell_average,
    cross,
    forward_gradient,
    grad_norm_sq,
    inner,
    laplacian,
    norms,
)

import dense_reference as dense


def random_extended(grid, rng):
    m = VectorField.zeros(grid)
    m.interior[...] = rng.standard_normal((3,) + grid.interior_shape)
    extend_neumann(m)
    return m


GRIDS = [(1, (4,)), (2, (3, 4)), (3, (2, 3, 4)), (3, (4, 4, 4))]


@pytest.mark.parametrize("dim, cells", GRIDS)
def test_laplacian_matches_dense(dim, cells):
    grid = build_grid(dim, cells)
    rng = np.random.default_rng(7)
    m = random_extended(grid, rng)
    got = laplacian(m).interior.reshape(3, -1)
    mat = dense.dense_laplacian(grid)
    want = np.stack([mat @ comp for comp in m.interior.reshape(3, -1)])
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)


@pytest.mark.parametrize("dim, cells", GRIDS)
def test_forward_gradient_matches_dense(dim, cells):
    grid = build_grid(dim, cells)
    rng = np.random.default_rng(8)
    m = random_extended(grid, rng)
    g = forward_gradient(m)
    diffs = dense.dense_forward_diffs(grid)
    flat = m.interior.reshape(3, -1)
    for a in range(dim):
        want = np.stack([diffs[a] @ comp for comp in flat])
        np.testing.assert_allclose(g.data[a].reshape(3, -1), want, atol=1e-12)
    # the difference across the far face is exactly zero (mirror ghost)
    last = [slice(None)] * (2 + dim)
    last[2 + dim - 1] = -1
    np.testing.assert_array_equal(g.data[dim - 1][tuple(last[1:])], 0.0)


@pytest.mark.parametrize("dim, cells", GRIDS)
def test_averaged_gradient_matches_dense(dim, cells):
    grid = build_grid(dim, cells)
    rng = np.random.default_rng(9)
    m = random_extended(grid, rng)
    g = averaged_gradient(m)
    entries = dense.dense_averaged_gradient_entries(grid)
    flat = m.interior.reshape(3, -1)
    for (a, c), mat in entries.items():
        np.testing.assert_allclose(
            g.data[a, c].reshape(-1), mat @ flat[c], rtol=0, atol=1e-12
        )


def test_averaged_gradient_diagonal_entries_are_centered():
    # averaging component a along axis a then forward differencing yields the
    # centered stencil (u_{i+1} - u_{i-1}) / (2h) away from the walls
    grid = build_grid(1, 8)
    rng = np.random.default_rng(10)
    m = random_extended(grid, rng)
    g = averaged_gradient(m)
    u = m.data[0]
    centered = (u[3:-1] - u[1:-3]) / (2.0 * grid.h[0])
    np.testing.assert_allclose(g.data[0, 0][1:-1], centered, atol=1e-13)


def test_cell_average_matches_dense():
    grid = build_grid(2, (3, 5))
    rng = np.random.default_rng(11)
    m = random_extended(grid, rng)
    flat = m.interior.reshape(3, -1)
    for a in range(2):
        mat = dense.embed(grid, a, dense.forward_avg_1d(grid.cells[a]))
        want = np.stack([mat @ comp for comp in flat])
        np.testing.assert_allclose(cell_average(m, a).reshape(3, -1), want, atol=1e-13)


@settings(max_examples=25, deadline=None)
@given(
    dim=st.sampled_from([1, 2, 3]),
    n=st.integers(min_value=2, max_value=5),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_summation_by_parts_is_exact(dim, n, seed):
    # <-Lap f, g> = sum_a <D_a f, D_a g>: no boundary terms with mirror ghosts
    grid = build_grid(dim, n)
    rng = np.random.default_rng(seed)
    f = random_extended(grid, rng)
    g = random_extended(grid, rng)
    lhs = -inner(laplacian(f), g)
    gf, gg = forward_gradient(f), forward_gradient(g)
    rhs = grid.cell_volume * float(np.sum(gf.data * gg.data))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(
    dim=st.sampled_from([1, 2, 3]),
    n=st.integers(min_value=2, max_value=5),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_product_expansion_identity(dim, n, seed):
    # D_a(f x g) = avg_a(f) x D_a(g) + D_a(f) x avg_a(g), exactly
    grid = build_grid(dim, n)
    rng = np.random.default_rng(seed)
    f = random_extended(grid, rng)
    g = random_extended(grid, rng)
    lhs = forward_gradient(cross(f, g))
    gf, gg = forward_gradient(f), forward_gradient(g)
    for a in range(dim):
        af, ag = cell_average(f, a), cell_average(g, a)
        rhs = np.cross(af, gg.data[a], axis=0) + np.cross(gf.data[a], ag, axis=0)
        np.testing.assert_allclose(lhs.data[a], rhs, rtol=0, atol=1e-12)


def test_laplacian_annihilates_constants():
    grid = build_grid(3, 3)
    m = VectorField.zeros(grid)
    m.data[...] = np.array([1.0, -2.0, 0.5])[:, None, None, None]
    np.testing.assert_array_equal(laplacian(m).interior, 0.0)
    np.testing.assert_array_equal(forward_gradient(m).data, 0.0)
    np.testing.assert_array_equal(averaged_gradient(m).data, 0.0)


def test_cross_pointwise_algebra():
    grid = build_grid(2, 3)
    rng = np.random.default_rng(12)
    a = random_extended(grid, rng)
    b = random_extended(grid, rng)
    c = cross(a, b)
    np.testing.assert_allclose(c.data, np.cross(a.data, b.data, axis=0), atol=1e-15)
    np.testing.assert_allclose(
        cross(b, a).data, -c.data, rtol=0, atol=0
    )
    # orthogonal to both factors pointwise
    assert np.max(np.abs(np.sum(c.data * a.data, axis=0))) < 1e-13
    assert np.max(np.abs(np.sum(c.data * b.data, axis=0))) < 1e-13


def test_grad_norm_sq_sums_all_entries():
    grid = build_grid(2, 4)
    rng = np.random.default_rng(13)
    m = random_extended(grid, rng)
    g = forward_gradient(m)
    got = grad_norm_sq(g).interior
    np.testing.assert_allclose(got, np.sum(g.data**2, axis=(0, 1)), atol=1e-15)


def test_inner_and_norms_against_fsum():
    grid = build_grid(3, 4)
    rng = np.random.default_rng(14)
    f = random_extended(grid, rng)
    g = random_extended(grid, rng)
    vol = grid.cell_volume

    want = vol * math.fsum((f.interior * g.interior).ravel().tolist())
    assert inner(f, g) == pytest.approx(want, rel=1e-13)

    nm = norms(f)
    mag2 = np.sum(f.interior**2, axis=0).ravel().tolist()
    assert nm.l2 == pytest.approx(math.sqrt(vol * math.fsum(mag2)), rel=1e-13)
    assert nm.l4 == pytest.approx(
        (vol * math.fsum([v * v for v in mag2])) ** 0.25, rel=1e-13
    )
    assert nm.linf == pytest.approx(math.sqrt(max(mag2)), rel=1e-14)

    gd = forward_gradient(f)
    gmag2 = np.sum(gd.data**2, axis=(0, 1)).ravel().tolist()
    assert nm.gradient_l2 == pytest.approx(math.sqrt(vol * math.fsum(gmag2)), rel=1e-13)
    assert nm.gradient_l4 == pytest.approx(
        (vol * math.fsum([v * v for v in gmag2])) ** 0.25, rel=1e-13
    )
    assert nm.gradient_linf == pytest.approx(math.sqrt(max(gmag2)), rel=1e-14)
    assert nm.h1 == pytest.approx(math.hypot(nm.l2, nm.gradient_l2), rel=1e-13)


def test_laplacian_is_self_adjoint():
    grid = build_grid(2, 5)
    rng = np.random.default_rng(15)
    f = random_extended(grid, rng)
    g = random_extended(grid, rng)
    assert inner(laplacian(f), g) == pytest.approx(inner(f, laplacian(g)), rel=1e-12)
