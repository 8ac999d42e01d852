"""Finite-difference operators and discrete norms on cell-centered grids.

All operators act on ghost-extended fields and produce interior values:

* ``laplacian``: the standard (2d+1)-point second-difference Laplacian,
  sum over axes of (f_{i+1} - 2 f_i + f_{i-1}) / h^2.
* ``forward_gradient``: one-sided differences D_a f = (f_{i+1} - f_i) / h_a.
  With mirror ghosts the difference across the far boundary face is exactly
  zero, which makes summation by parts exact (no boundary terms).
* ``averaged_gradient``: forward gradient of the backward-averaged field,
  where component a is averaged along axis a only:
  (A m)_a = (m_a(i) + m_a(i-1)) / 2.  The averaged field is re-extended with
  mirror ghosts before differencing, so its boundary-face differences vanish
  as well.  The composition is a centered first-derivative approximation at
  interior points.
* ``cell_average``: the forward cell average (f_i + f_{i+1}) / 2 entering
  the pointwise product expansion
  D_a(f x g) = (avg_a f) x (D_a g) + (D_a f) x (avg_a g).

Inner products and norms weight interior sums by the cell volume h^d.
Pointwise magnitudes are Euclidean over the 3 components; gradient
magnitudes are Frobenius over all (axis, component) entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mesh import GridSpec, ScalarField, VectorField, extend_neumann

__all__ = [
    "GradientField",
    "FieldNorms",
    "laplacian",
    "forward_gradient",
    "averaged_gradient",
    "cell_average",
    "cross",
    "grad_norm_sq",
    "inner",
    "norms",
]


@dataclass(eq=False)
class GradientField:
    """Per-axis forward differences of each component, at interior points.

    ``data`` has shape (dim, 3, *interior): data[a, c] approximates the
    a-derivative of component c.  Axes absent in d < 3 are simply not
    stored (their derivative is identically zero).
    """

    grid: GridSpec
    data: np.ndarray


def _shifted(grid: GridSpec, axis: int, off: int) -> tuple[slice, ...]:
    """Interior index tuple with one spatial axis shifted by off in {-1, 0, 1}."""
    sl = [slice(1, -1)] * grid.dim
    hi = -1 + off
    sl[axis] = slice(1 + off, hi if hi != 0 else None)
    return tuple(sl)


def laplacian(m: VectorField) -> VectorField:
    """Second-difference Laplacian; input must be ghost-extended.

    Output holds interior values only (ghosts are left at zero and carry no
    meaning).
    """
    grid = m.grid
    core = m.interior
    acc = np.zeros_like(core)
    for ax in range(grid.dim):
        up = m.data[(slice(None),) + _shifted(grid, ax, +1)]
        dn = m.data[(slice(None),) + _shifted(grid, ax, -1)]
        acc += (up - 2.0 * core + dn) / grid.h[ax] ** 2
    out = VectorField.zeros(grid)
    out.interior[...] = acc
    return out


def forward_gradient(m: VectorField) -> GradientField:
    """One-sided differences D_a of every component at interior points."""
    grid = m.grid
    core = m.interior
    data = np.empty((grid.dim, 3) + grid.interior_shape)
    for ax in range(grid.dim):
        up = m.data[(slice(None),) + _shifted(grid, ax, +1)]
        data[ax] = (up - core) / grid.h[ax]
    return GradientField(grid, data)


def averaged_gradient(m: VectorField) -> GradientField:
    """Forward gradient of the backward-averaged field.

    Component a is replaced by its backward average along axis a (axes
    beyond the grid dimension leave their component untouched), the result
    is mirror-extended, and the forward gradient of that field is returned.
    """
    grid = m.grid
    avg = VectorField.zeros(grid)
    for c in range(3):
        if c < grid.dim:
            dn = m.data[c][_shifted(grid, c, -1)]
            avg.interior[c] = 0.5 * (m.data[c][grid.interior] + dn)
        else:
            avg.interior[c] = m.data[c][grid.interior]
    extend_neumann(avg)
    return forward_gradient(avg)


def cell_average(m: VectorField, axis: int) -> np.ndarray:
    """Forward cell average (m_i + m_{i+1}) / 2 along one axis, interior values.

    This is the average that pairs with the forward difference in the
    product expansion D_a(f x g) = avg_a(f) x D_a(g) + D_a(f) x avg_a(g);
    it is distinct from the backward average used by ``averaged_gradient``.
    """
    grid = m.grid
    up = m.data[(slice(None),) + _shifted(grid, axis, +1)]
    return 0.5 * (m.interior + up)


def cross(a: VectorField, b: VectorField) -> VectorField:
    """Pointwise cross product a x b over the full storage block.

    If both inputs are ghost-extended the result is ghost-extended too
    (mirroring commutes with pointwise products).
    """
    A, B = a.data, b.data
    out = VectorField.zeros(a.grid)
    out.data[0] = A[1] * B[2] - A[2] * B[1]
    out.data[1] = A[2] * B[0] - A[0] * B[2]
    out.data[2] = A[0] * B[1] - A[1] * B[0]
    return out


def grad_norm_sq(g: GradientField) -> ScalarField:
    """Pointwise squared Frobenius magnitude of a gradient field.

    Returns a ScalarField whose interior holds sum over axes and components
    of the squared entries; ghosts are left at zero.
    """
    out = ScalarField.zeros(g.grid)
    out.interior[...] = np.sum(g.data ** 2, axis=(0, 1))
    return out


def inner(f: VectorField, g: VectorField) -> float:
    """Discrete L2 inner product h^d * sum over interior of f . g."""
    return f.grid.cell_volume * float(np.sum(f.interior * g.interior))


@dataclass(frozen=True)
class FieldNorms:
    """Discrete norms of a vector field and of its forward gradient."""

    l2: float
    l4: float
    linf: float
    h1: float
    gradient_l2: float
    gradient_l4: float
    gradient_linf: float


def norms(m: VectorField) -> FieldNorms:
    """All discrete norms of a ghost-extended field in one pass.

    Pointwise magnitude is Euclidean over the 3 components; the gradient
    magnitude is Frobenius over the dim x 3 entries of the forward
    gradient.  The discrete H1 norm is sqrt(l2^2 + gradient_l2^2).
    """
    vol = m.grid.cell_volume
    mag2 = np.sum(m.interior ** 2, axis=0)
    l2_sq = vol * float(np.sum(mag2))
    l4 = (vol * float(np.sum(mag2 ** 2))) ** 0.25
    linf = math.sqrt(float(np.max(mag2)))

    g = forward_gradient(m)
    gmag2 = np.sum(g.data ** 2, axis=(0, 1))
    g_l2_sq = vol * float(np.sum(gmag2))
    g_l4 = (vol * float(np.sum(gmag2 ** 2))) ** 0.25
    g_linf = math.sqrt(float(np.max(gmag2)))

    return FieldNorms(
        l2=math.sqrt(l2_sq),
        l4=l4,
        linf=linf,
        h1=math.sqrt(l2_sq + g_l2_sq),
        gradient_l2=math.sqrt(g_l2_sq),
        gradient_l4=g_l4,
        gradient_linf=g_linf,
    )
