"""Constant-coefficient Helmholtz solves (shift*I - alpha*Laplacian) via DCT-II.

With mirror (Neumann) ghosts the second-difference Laplacian on a
cell-centered grid is diagonalized exactly by the orthonormal DCT-II basis
cos(pi p (i - 1/2) / N), p = 0..N-1, with per-axis eigenvalues
-(4/h^2) sin^2(pi p / (2N)).  A solve is therefore: forward transform the
right-hand side, divide by shift + alpha * sum of axis eigenvalues, inverse
transform.  The zero mode's eigenvalue is the bare shift, so the operator is
positive definite for shift > 0 and the division is always safe.

The transforms are computed in-house by mirror-doubling onto a real FFT:
for x of length N, rfft([x, reversed(x)]) recovers the DCT-II coefficients
after a half-sample phase shift, and the inverse retraces the same steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import GridSpec, ScalarField, VectorField, extend_neumann
from .discrete_ops import laplacian

__all__ = [
    "HelmholtzPlan",
    "plan",
    "dct2_forward",
    "dct2_inverse",
    "solve",
    "apply_operator",
]


@dataclass(frozen=True)
class HelmholtzPlan:
    """Precomputed spectral data for (shift*I - alpha*Laplacian) solves.

    ``eigenvalues`` has the interior shape; entry p holds
    shift + alpha * sum_a (4/h_a^2) sin^2(pi p_a / (2 N_a)) >= shift > 0.
    """

    grid: GridSpec
    alpha: float
    shift: float
    eigenvalues: np.ndarray


def plan(grid: GridSpec, alpha: float, k: float, shift: float | None = None) -> HelmholtzPlan:
    """Build the eigenvalue table; the default shift is the BDF2 value 3/(2k).

    ``shift`` may be overridden (the startup step uses 1/k).
    """
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if k <= 0.0:
        raise ValueError(f"time step must be positive, got {k}")
    if shift is None:
        shift = 1.5 / k
    lam = np.full(grid.interior_shape, shift)
    for ax in range(grid.dim):
        n, h = grid.cells[ax], grid.h[ax]
        axis_eigs = (4.0 / h ** 2) * np.sin(np.pi * np.arange(n) / (2 * n)) ** 2
        shape = [1] * grid.dim
        shape[ax] = n
        lam = lam + alpha * axis_eigs.reshape(shape)
    lam.flags.writeable = False
    return HelmholtzPlan(grid=grid, alpha=alpha, shift=shift, eigenvalues=lam)


def _dct2_axis(a: np.ndarray, axis: int) -> np.ndarray:
    """Orthonormal DCT-II along one axis via mirror-doubling + rfft."""
    a = np.moveaxis(a, axis, -1)
    n = a.shape[-1]
    ext = np.concatenate([a, a[..., ::-1]], axis=-1)
    spec = np.fft.rfft(ext, axis=-1)[..., :n]
    phase = np.exp(-1j * np.pi * np.arange(n) / (2 * n))
    c = 0.5 * (spec * phase).real
    scale = np.full(n, np.sqrt(2.0 / n))
    scale[0] = np.sqrt(1.0 / n)
    return np.moveaxis(c * scale, -1, axis)


def _idct2_axis(c: np.ndarray, axis: int) -> np.ndarray:
    """Inverse of :func:`_dct2_axis` (orthonormal DCT-III) via irfft."""
    c = np.moveaxis(c, axis, -1)
    n = c.shape[-1]
    scale = np.full(n, np.sqrt(2.0 / n))
    scale[0] = np.sqrt(1.0 / n)
    spec = np.zeros(c.shape[:-1] + (n + 1,), dtype=complex)
    spec[..., :n] = c * scale * np.exp(-1j * np.pi * np.arange(n) / (2 * n))
    spec[..., 0] *= 2.0
    y = np.fft.irfft(spec, n=2 * n, axis=-1)
    x = n * y[..., 1 : n + 1]
    return np.moveaxis(x, -1, axis)


def _dct2_nd(values: np.ndarray, spatial_axes: range) -> np.ndarray:
    out = values
    for ax in spatial_axes:
        out = _dct2_axis(out, ax)
    return out


def _idct2_nd(coeffs: np.ndarray, spatial_axes: range) -> np.ndarray:
    out = coeffs
    for ax in spatial_axes:
        out = _idct2_axis(out, ax)
    return out


def dct2_forward(fld: ScalarField) -> np.ndarray:
    """Orthonormal DCT-II coefficients of the interior values (all axes)."""
    return _dct2_nd(np.array(fld.interior), range(fld.grid.dim))


def dct2_inverse(coeffs: np.ndarray, grid: GridSpec) -> ScalarField:
    """Synthesize interior values from DCT-II coefficients; ghosts extended."""
    out = ScalarField.zeros(grid)
    out.interior[...] = _idct2_nd(coeffs, range(grid.dim))
    extend_neumann(out)
    return out


def solve(pl: HelmholtzPlan, q: VectorField) -> VectorField:
    """Solve (shift*I - alpha*Laplacian) m = q componentwise; output extended.

    Only the interior of ``q`` is read.  The result is ghost-extended, so
    re-applying the operator with mirror ghosts reproduces ``q`` to
    round-off.
    """
    spatial = range(1, 1 + pl.grid.dim)
    coeffs = _dct2_nd(q.interior, spatial)
    coeffs /= pl.eigenvalues
    out = VectorField.zeros(pl.grid)
    out.interior[...] = _idct2_nd(coeffs, spatial)
    extend_neumann(out)
    return out


def apply_operator(pl: HelmholtzPlan, m: VectorField) -> VectorField:
    """Apply (shift*I - alpha*Laplacian) with mirror ghosts; interior output."""
    ext = extend_neumann(m.copy())
    out = laplacian(ext)
    out.interior[...] = pl.shift * ext.interior - pl.alpha * out.interior
    return out
