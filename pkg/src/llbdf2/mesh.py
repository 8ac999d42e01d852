"""Cell-centered grids on the unit box with mirror ghost layers.

The unit box [0,1]^d (d = 1, 2, 3) is covered by N_a uniform cells per axis,
h_a = 1/N_a, and fields live at the cell centers x_{i-1/2} = (i - 1/2) h_a,
i = 1..N_a.  Storage keeps one ghost layer per side (indices 0 and N_a + 1),
so arrays have shape (N_a + 2) along each axis and the interior is the
[1:-1] block.

Homogeneous Neumann boundary conditions are realized by mirror ghosts: the
ghost value equals the adjacent interior value, so the first difference
across each boundary face vanishes identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "GridSpec",
    "ScalarField",
    "VectorField",
    "build_grid",
    "extend_neumann",
    "sample_on_grid",
    "unit_deviation",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered grid on [0,1]^dim with one ghost layer per side."""

    dim: int
    cells: tuple[int, ...]
    h: tuple[float, ...]

    @property
    def interior_shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def storage_shape(self) -> tuple[int, ...]:
        return tuple(n + 2 for n in self.cells)

    @property
    def num_interior(self) -> int:
        return int(np.prod(self.cells))

    @property
    def cell_volume(self) -> float:
        """Quadrature weight h_1 * ... * h_dim of one cell."""
        return float(np.prod(self.h))

    @property
    def interior(self) -> tuple[slice, ...]:
        """Index tuple selecting the interior block of a storage array."""
        return (slice(1, -1),) * self.dim

    def axis_coords(self, axis: int) -> np.ndarray:
        """Half-grid interior coordinates (i - 1/2) h along one axis."""
        n = self.cells[axis]
        return (np.arange(1, n + 1) - 0.5) * self.h[axis]

    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcastable (sparse meshgrid) interior coordinate arrays."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij", sparse=True))


def build_grid(dim: int, cells: int | Sequence[int]) -> GridSpec:
    """Construct a GridSpec; validates dimension and per-axis cell counts.

    ``cells`` may be a single int (applied to every axis) or a sequence of
    length ``dim``.  Every axis needs at least 2 cells so the interior can
    hold a difference stencil.
    """
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    if isinstance(cells, (int, np.integer)):
        cells = (int(cells),) * dim
    else:
        cells = tuple(int(n) for n in cells)
    if len(cells) != dim:
        raise ValueError(f"expected {dim} cell counts, got {len(cells)}")
    for n in cells:
        if n < 2:
            raise ValueError(f"each axis needs at least 2 cells, got {n}")
    return GridSpec(dim=dim, cells=cells, h=tuple(1.0 / n for n in cells))


@dataclass(eq=False)
class ScalarField:
    """One real value per grid point, ghost layer included."""

    grid: GridSpec
    values: np.ndarray

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ScalarField":
        return cls(grid, np.zeros(grid.storage_shape))

    @property
    def interior(self) -> np.ndarray:
        return self.values[self.grid.interior]

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass(eq=False)
class VectorField:
    """Three-component field m = (m1, m2, m3); data has shape (3, *storage).

    The ``unit`` flag marks fields produced by a normalization step (or
    sampled from a known unit-length function); it is advisory and checked
    by :func:`unit_deviation`.
    """

    grid: GridSpec
    data: np.ndarray
    unit: bool = field(default=False, compare=False)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "VectorField":
        return cls(grid, np.zeros((3,) + grid.storage_shape))

    @classmethod
    def from_components(cls, components: Sequence[ScalarField]) -> "VectorField":
        if len(components) != 3:
            raise ValueError("a VectorField has exactly 3 components")
        grid = components[0].grid
        return cls(grid, np.stack([c.values for c in components]))

    def component(self, i: int) -> ScalarField:
        """View (not copy) of one component as a ScalarField."""
        return ScalarField(self.grid, self.data[i])

    @property
    def interior(self) -> np.ndarray:
        return self.data[(slice(None),) + self.grid.interior]

    def copy(self) -> "VectorField":
        return VectorField(self.grid, self.data.copy(), unit=self.unit)


def _mirror_ghosts(arr: np.ndarray, spatial_axes: range) -> None:
    for ax in spatial_axes:
        lo = [slice(None)] * arr.ndim
        hi = [slice(None)] * arr.ndim
        lo[ax], hi[ax] = 0, 1
        arr[tuple(lo)] = arr[tuple(hi)]
        lo[ax], hi[ax] = -1, -2
        arr[tuple(lo)] = arr[tuple(hi)]


def extend_neumann(fld: ScalarField | VectorField) -> ScalarField | VectorField:
    """Fill ghost layers with mirror copies of the adjacent interior values.

    Mutates the field's storage in place (interior untouched) and returns
    the same field for chaining.  Idempotent.  Face ghosts are mirrored
    axis by axis, so edge/corner ghosts end up mirroring the nearest
    interior point, which keeps every cross-boundary first difference zero.
    """
    if isinstance(fld, ScalarField):
        _mirror_ghosts(fld.values, range(fld.grid.dim))
    else:
        _mirror_ghosts(fld.data, range(1, 1 + fld.grid.dim))
    return fld


def sample_on_grid(
    f: Callable[..., Sequence[np.ndarray]], grid: GridSpec, t: float = 0.0
) -> VectorField:
    """Evaluate a closed-form vector function at the interior half-grid points.

    ``f(x, t)`` receives a tuple of broadcastable coordinate arrays and must
    return three arrays (or scalars) broadcastable to the interior shape.
    Ghosts of the result are mirror-extended.
    """
    x = grid.coords()
    comps = f(x, t)
    out = VectorField.zeros(grid)
    for c in range(3):
        out.interior[c] = np.broadcast_to(np.asarray(comps[c], dtype=float),
                                          grid.interior_shape)
    extend_neumann(out)
    return out


def unit_deviation(m: VectorField) -> float:
    """max over interior points of | |m(x)| - 1 |."""
    mag = np.sqrt(np.sum(m.interior ** 2, axis=0))
    return float(np.max(np.abs(mag - 1.0)))
