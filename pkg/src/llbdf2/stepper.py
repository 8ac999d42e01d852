"""Linear BDF2 projection time steppers for the Landau-Lifshitz equation.

The evolution law is

    dm/dt = -m x (Laplacian m) + alpha * (Laplacian m)
            + alpha * |grad m|^2 m,        |m| = 1,

on the unit box with homogeneous Neumann walls.  Both schemes advance an
intermediate (unnormalized) field mtilde by one linear constant-coefficient
Helmholtz solve per step and then renormalize pointwise:

* the one-projection scheme keeps the BDF2 history in the *projected*
  iterates and builds every nonlinear term from the projected
  extrapolation mhat = 2 m^{n+1} - m^n;
* the two-projection scheme keeps the BDF2 history in the *intermediate*
  iterates; the Laplacian inside the gyroscopic term uses the intermediate
  extrapolation 2 mtilde^{n+1} - mtilde^n, while the gyroscopic prefactor
  and the |averaged gradient|^2 coefficient use the projected
  extrapolation.

Either way the implicit system is (3/(2k) I - alpha Laplacian) mtilde = q,
solved spectrally by the DCT plan.  The startup step is the implicit
first-order analogue with shift 1/k and all explicit terms evaluated at the
initial data.

Discrete energy decay or blow-up manifests through the projection: if the
intermediate field's magnitude falls below a small threshold anywhere, the
normalization is ill-defined and the run aborts with diagnostics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .mesh import GridSpec, VectorField, extend_neumann
from .discrete_ops import averaged_gradient, cross, grad_norm_sq, laplacian
from .helmholtz import HelmholtzPlan, plan, solve

__all__ = [
    "Algorithm",
    "SolverConfig",
    "StepperState",
    "ProjectionError",
    "extrapolate",
    "assemble_rhs_alg21",
    "assemble_rhs_alg22",
    "project",
    "first_step",
    "step",
    "run",
]

# Pointwise magnitude below which normalization is treated as degenerate.
EPS_PROJ = 1e-8

# Advisory band for the time-step/grid ratio k/h; outside it the schemes'
# second-order regime is not expected and run() warns.
RATIO_LOW = 0.1
RATIO_HIGH = 10.0


class Algorithm(str, Enum):
    """Scheme selector.

    ``ALG21`` carries the intermediate (unnormalized) iterates through the
    BDF2 stencil; ``ALG22`` keeps the history in the projected iterates and
    builds every explicit term from the projected extrapolation.
    """

    ALG21 = "alg21"
    ALG22 = "alg22"


# A forcing term is sampled as a (3, *interior) array at a given time.
ForcingFn = Callable[[float], np.ndarray]


class ProjectionError(RuntimeError):
    """Raised when |mtilde| is degenerate (or non-finite) at some point."""

    def __init__(self, step: int, index: tuple[int, ...], magnitude: float):
        self.step = step
        self.index = index
        self.magnitude = magnitude
        super().__init__(
            f"projection failed at step {step}: |mtilde| = {magnitude:.3e} "
            f"at interior index {index}"
        )


@dataclass(frozen=True)
class SolverConfig:
    """Everything a run needs besides the initial data."""

    grid: GridSpec
    alpha: float
    dt: float
    t_final: float
    algorithm: Algorithm = Algorithm.ALG22
    forcing: Optional[ForcingFn] = None
    eps_proj: float = EPS_PROJ

    def validate(self) -> None:
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_final <= 0.0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if self.n_steps < 2:
            raise ValueError(
                f"floor(t_final/dt) = {self.n_steps} < 2: the two-level "
                "scheme needs at least two steps"
            )

    @property
    def n_steps(self) -> int:
        """floor(t_final / dt); no partial final step is taken.

        The 1e-9 nudge guards float quotients like 0.3/0.1 = 2.999...996
        from losing a full step.
        """
        return int(math.floor(self.t_final / self.dt + 1e-9))

    def ratio_warning(self) -> Optional[str]:
        """Advisory message when k/h leaves the [0.1, 10] band, else None."""
        hmin, hmax = min(self.grid.h), max(self.grid.h)
        if self.dt < RATIO_LOW * hmin or self.dt > RATIO_HIGH * hmax:
            return (
                f"time step dt = {self.dt:g} is outside the advisory band "
                f"[{RATIO_LOW:g}*h, {RATIO_HIGH:g}*h] for h in "
                f"[{hmin:g}, {hmax:g}]; second-order accuracy is tuned for "
                "dt proportional to h"
            )
        return None


@dataclass(eq=False)
class StepperState:
    """Two-level history after step ``step`` (time = step * dt).

    ``m``/``m_prev`` are the projected iterates at the newest/previous
    level; ``mtilde``/``mtilde_prev`` are the intermediate iterates.  At
    level 0 no intermediate exists and mtilde is seeded with the initial
    data itself.
    """

    step: int
    time: float
    m_prev: VectorField
    m: VectorField
    mtilde_prev: VectorField
    mtilde: VectorField


def extrapolate(a: VectorField, b: VectorField) -> VectorField:
    """Second-order extrapolation 2a - b, ghost layers re-extended."""
    out = VectorField(a.grid, 2.0 * a.data - b.data)
    extend_neumann(out)
    return out


def _explicit_terms(
    prefactor: VectorField, lap_arg: VectorField, coeff_arg: VectorField, alpha: float
) -> np.ndarray:
    """-prefactor x (Lap lap_arg) + alpha |avg grad coeff_arg|^2 prefactor.

    All inputs must be ghost-extended; returns interior values (3, *cells).
    """
    gyro = cross(prefactor, laplacian(lap_arg)).interior
    gn = grad_norm_sq(averaged_gradient(coeff_arg)).interior
    return -gyro + alpha * gn * prefactor.interior


def assemble_rhs_alg22(state: StepperState, cfg: SolverConfig) -> VectorField:
    """Right-hand side of the projected-history scheme's Helmholtz system.

    q = (2 m^{n+1} - m^n / 2) / k - mhat x (Lap mhat)
        + alpha |avg grad mhat|^2 mhat  (+ forcing at t^{n+2}),
    with mhat = 2 m^{n+1} - m^n.
    """
    mhat = extrapolate(state.m, state.m_prev)
    q = VectorField.zeros(cfg.grid)
    q.interior[...] = (2.0 * state.m.interior - 0.5 * state.m_prev.interior) / cfg.dt
    q.interior[...] += _explicit_terms(mhat, mhat, mhat, cfg.alpha)
    if cfg.forcing is not None:
        q.interior[...] += cfg.forcing(state.time + cfg.dt)
    return q


def assemble_rhs_alg21(state: StepperState, cfg: SolverConfig) -> VectorField:
    """Right-hand side of the intermediate-history scheme's Helmholtz system.

    The BDF2 history terms use the intermediate iterates and the Laplacian
    inside the gyroscopic term uses the intermediate extrapolation
    2 mtilde^{n+1} - mtilde^n; the gyroscopic prefactor and the
    |averaged gradient|^2 coefficient use the projected extrapolation.
    """
    mhat = extrapolate(state.m, state.m_prev)
    mthat = extrapolate(state.mtilde, state.mtilde_prev)
    q = VectorField.zeros(cfg.grid)
    q.interior[...] = (
        2.0 * state.mtilde.interior - 0.5 * state.mtilde_prev.interior
    ) / cfg.dt
    q.interior[...] += _explicit_terms(mhat, mthat, mhat, cfg.alpha)
    if cfg.forcing is not None:
        q.interior[...] += cfg.forcing(state.time + cfg.dt)
    return q


_ASSEMBLERS = {
    Algorithm.ALG22: assemble_rhs_alg22,
    Algorithm.ALG21: assemble_rhs_alg21,
}


def project(mtilde: VectorField, eps: float = EPS_PROJ, step: int = -1) -> VectorField:
    """Pointwise normalization m = mtilde / |mtilde| with degeneracy guard.

    Raises :class:`ProjectionError` if any interior magnitude is <= eps or
    non-finite (a blown-up intermediate field must not be silently
    normalized).
    """
    core = mtilde.interior
    mag = np.sqrt(np.sum(core ** 2, axis=0))
    bad = ~np.isfinite(mag)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise ProjectionError(step, idx, float(mag[idx]))
    mmin = float(np.min(mag))
    if mmin <= eps:
        flat = int(np.argmin(mag))
        idx = tuple(int(i) for i in np.unravel_index(flat, mag.shape))
        raise ProjectionError(step, idx, mmin)
    out = VectorField.zeros(mtilde.grid)
    out.interior[...] = core / mag
    extend_neumann(out)
    out.unit = True
    return out


def first_step(m0: VectorField, cfg: SolverConfig) -> tuple[VectorField, VectorField]:
    """Implicit first-order startup step from the initial data.

    Solves (I/k - alpha Laplacian) mtilde^1 = m^0 / k + explicit terms at
    m^0 (+ forcing at t^1) and projects.  Returns (mtilde^1, m^1).
    """
    pl = plan(cfg.grid, cfg.alpha, cfg.dt, shift=1.0 / cfg.dt)
    q = VectorField.zeros(cfg.grid)
    q.interior[...] = m0.interior / cfg.dt
    q.interior[...] += _explicit_terms(m0, m0, m0, cfg.alpha)
    if cfg.forcing is not None:
        q.interior[...] += cfg.forcing(cfg.dt)
    mtilde1 = solve(pl, q)
    m1 = project(mtilde1, cfg.eps_proj, step=1)
    return mtilde1, m1


def step(state: StepperState, cfg: SolverConfig, pl: HelmholtzPlan) -> StepperState:
    """Advance one BDF2 level: assemble, solve, project, shift history."""
    q = _ASSEMBLERS[cfg.algorithm](state, cfg)
    mtilde_new = solve(pl, q)
    m_new = project(mtilde_new, cfg.eps_proj, step=state.step + 1)
    return StepperState(
        step=state.step + 1,
        time=state.time + cfg.dt,
        m_prev=state.m,
        m=m_new,
        mtilde_prev=state.mtilde,
        mtilde=mtilde_new,
    )


# Observer signature: (step index, time, projected field, intermediate field).
# The intermediate argument is None at step 0.  Fields are live views and
# must not be mutated; returned non-None values are collected by run().
Observer = Callable[[int, float, VectorField, Optional[VectorField]], object]


def run(
    m0: VectorField,
    cfg: SolverConfig,
    observer: Optional[Observer] = None,
    stride: int = 1,
) -> tuple[StepperState, list]:
    """Integrate from t = 0 to t = floor(t_final/dt) * dt.

    Executes the startup step followed by n_steps - 1 BDF2 steps.  The
    observer fires at step 0, at every ``stride``-th step, and at the final
    step.  Returns the final state and the list of non-None observer
    results.  Projection failures propagate as :class:`ProjectionError`
    with the failing step's diagnostics.
    """
    cfg.validate()
    msg = cfg.ratio_warning()
    if msg is not None:
        warnings.warn(msg, stacklevel=2)
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")

    collected: list = []

    def emit(s: int, t: float, m: VectorField, mt: Optional[VectorField]) -> None:
        if observer is not None:
            out = observer(s, t, m, mt)
            if out is not None:
                collected.append(out)

    n = cfg.n_steps
    emit(0, 0.0, m0, None)
    mtilde1, m1 = first_step(m0, cfg)
    state = StepperState(
        step=1, time=cfg.dt, m_prev=m0, m=m1, mtilde_prev=m0, mtilde=mtilde1
    )
    if stride == 1:
        emit(1, state.time, state.m, state.mtilde)
    pl = plan(cfg.grid, cfg.alpha, cfg.dt)
    for s in range(2, n + 1):
        state = step(state, cfg, pl)
        if s % stride == 0 or s == n:
            emit(s, state.time, state.m, state.mtilde)
    return state, collected
