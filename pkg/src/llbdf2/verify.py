"""Verification harness: manufactured solutions, convergence, inequality fuzz.

The closed-form reference field is a unit vector written in spherical
angles,

    theta(x, t) = 0.7 + 0.3 cos(t) P(x),   phi(x, t) = t + 0.2 P(x),
    P(x) = prod_a cos(pi x_a),
    m_e = (sin theta cos phi, sin theta sin phi, cos theta),

which has zero normal derivative on every wall (all odd normal derivatives
of P vanish there, so the mirror-ghost boundary treatment costs no
accuracy), stays well away from the spherical-coordinate poles, and is
exactly unit length.  The forcing that makes m_e solve the evolution law is
assembled in closed form from the chain rule:

    f = dm/dt + m x (Lap m) - alpha Lap m - alpha |grad m|^2 m,
    Lap m = m_thth |grad th|^2 + 2 m_thph (grad th . grad ph)
            + m_phph |grad ph|^2 + m_th Lap th + m_ph Lap ph,

with m_thth = -m and the other angle derivatives of the spherical frame
spelled out below.  Tests cross-check this algebra against high-order
finite differences of m_e itself.

The inequality fuzz suites draw random smooth fields (truncated cosine
series with decaying coefficients, so mirror extension is consistent),
random unit fields (smooth random angles), and perturbations rescaled into
the stated norm-bound envelopes.  Constants the analysis leaves abstract
are fitted on a corpus drawn from a disjoint rng stream, inflated by 5%,
frozen, and then asserted on the test corpus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Optional, Sequence

import numpy as np

from .mesh import (
    GridSpec,
    VectorField,
    build_grid,
    extend_neumann,
    sample_on_grid,
    unit_deviation,
)
from .discrete_ops import cross, forward_gradient, inner, laplacian, norms
from .helmholtz import _idct2_nd
from .stepper import Algorithm, ProjectionError, SolverConfig, project, run

__all__ = [
    "ManufacturedSolution",
    "default_manufactured",
    "forcing_sampler",
    "ErrorResult",
    "ErrorTracker",
    "error_norms",
    "LevelResult",
    "ConvergenceReport",
    "convergence_study",
    "fitted_orders",
    "random_smooth_scalar",
    "random_smooth_field",
    "random_unit_field",
    "admissible_perturbation",
    "LemmaReport",
    "check_lemma_cross_gradient",
    "check_projection_stability",
    "check_two_level_projection",
    "check_inverse_and_sobolev",
    "SweepRow",
    "stability_comparison",
]

# rng-stream separator so fit corpora never overlap test corpora.
_FIT_STREAM = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


# ---------------------------------------------------------------------------
# Manufactured solution
# ---------------------------------------------------------------------------


class ManufacturedSolution:
    """Closed-form unit field and the forcing that makes it an exact solution.

    Coordinate arguments are tuples of broadcastable arrays, so the same
    object serves any dimension (the cosine product simply has fewer
    factors).
    """

    def __init__(self, alpha: float,
                 theta_base: float = 0.7, theta_amp: float = 0.3,
                 phi_amp: float = 0.2):
        self.alpha = alpha
        self.theta_base = theta_base
        self.theta_amp = theta_amp
        self.phi_amp = phi_amp

    # -- angle machinery ----------------------------------------------------

    def _spatial(self, x: Sequence[np.ndarray]):
        """P, its per-axis first derivatives, and Lap P."""
        cos_ax = [np.cos(np.pi * np.asarray(xa)) for xa in x]
        sin_ax = [np.sin(np.pi * np.asarray(xa)) for xa in x]
        P = reduce(np.multiply, cos_ax)
        dP = []
        for a in range(len(x)):
            others = [cos_ax[b] for b in range(len(x)) if b != a]
            rest = reduce(np.multiply, others) if others else 1.0
            dP.append(-np.pi * sin_ax[a] * rest)
        lapP = -len(x) * np.pi ** 2 * P
        return P, dP, lapP

    def angles(self, x: Sequence[np.ndarray], t: float):
        P, _, _ = self._spatial(x)
        theta = self.theta_base + self.theta_amp * math.cos(t) * P
        phi = t + self.phi_amp * P
        return theta, phi

    # -- fields --------------------------------------------------------------

    def field(self, x: Sequence[np.ndarray], t: float):
        """m_e(x, t): exactly unit length."""
        theta, phi = self.angles(x, t)
        st, ct = np.sin(theta), np.cos(theta)
        return st * np.cos(phi), st * np.sin(phi), ct

    def _frame(self, theta, phi):
        """Spherical frame derivatives d m/d theta, d m/d phi, and seconds."""
        st, ct = np.sin(theta), np.cos(theta)
        sp, cp = np.sin(phi), np.cos(phi)
        m = (st * cp, st * sp, ct)
        m_th = (ct * cp, ct * sp, -st)
        m_ph = (-st * sp, st * cp, np.zeros_like(st + sp))
        m_thph = (-ct * sp, ct * cp, np.zeros_like(st + sp))
        m_phph = (-st * cp, -st * sp, np.zeros_like(st + sp))
        return m, m_th, m_ph, m_thph, m_phph

    def time_derivative(self, x, t):
        P, _, _ = self._spatial(x)
        theta, phi = self.angles(x, t)
        theta_t = -self.theta_amp * math.sin(t) * P
        _, m_th, m_ph, _, _ = self._frame(theta, phi)
        return tuple(m_th[c] * theta_t + m_ph[c] for c in range(3))

    def laplacian_exact(self, x, t):
        P, dP, lapP = self._spatial(x)
        theta, phi = self.angles(x, t)
        ct_t = math.cos(t)
        g_thth = sum((self.theta_amp * ct_t * d) ** 2 for d in dP)
        g_phph = sum((self.phi_amp * d) ** 2 for d in dP)
        g_thph = sum(self.theta_amp * ct_t * d * self.phi_amp * d for d in dP)
        lap_th = self.theta_amp * ct_t * lapP
        lap_ph = self.phi_amp * lapP
        m, m_th, m_ph, m_thph, m_phph = self._frame(theta, phi)
        return tuple(
            -m[c] * g_thth + 2.0 * m_thph[c] * g_thph + m_phph[c] * g_phph
            + m_th[c] * lap_th + m_ph[c] * lap_ph
            for c in range(3)
        )

    def gradient_sq_exact(self, x, t):
        """|grad m_e|^2 = |grad theta|^2 + sin^2(theta) |grad phi|^2."""
        _, dP, _ = self._spatial(x)
        theta, _ = self.angles(x, t)
        ct_t = math.cos(t)
        g_thth = sum((self.theta_amp * ct_t * d) ** 2 for d in dP)
        g_phph = sum((self.phi_amp * d) ** 2 for d in dP)
        return g_thth + np.sin(theta) ** 2 * g_phph

    def forcing(self, x, t):
        """f = m_t + m x Lap m - alpha Lap m - alpha |grad m|^2 m."""
        m = self.field(x, t)
        mt = self.time_derivative(x, t)
        lap = self.laplacian_exact(x, t)
        gsq = self.gradient_sq_exact(x, t)
        cx = (
            m[1] * lap[2] - m[2] * lap[1],
            m[2] * lap[0] - m[0] * lap[2],
            m[0] * lap[1] - m[1] * lap[0],
        )
        a = self.alpha
        return tuple(
            mt[c] + cx[c] - a * lap[c] - a * gsq * m[c] for c in range(3)
        )


def default_manufactured(alpha: float) -> ManufacturedSolution:
    """The standard reference solution used by the CLI and the test suite."""
    return ManufacturedSolution(alpha)


def forcing_sampler(solution: ManufacturedSolution, grid: GridSpec) -> Callable[[float], np.ndarray]:
    """Closure sampling the closed-form forcing on the interior at time t."""
    x = grid.coords()
    shape = grid.interior_shape

    def sample(t: float) -> np.ndarray:
        comps = solution.forcing(x, t)
        return np.stack([np.broadcast_to(np.asarray(c, float), shape) for c in comps])

    return sample


# ---------------------------------------------------------------------------
# Error norms and convergence studies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorResult:
    """Error norms of one run against the reference solution.

    ``err_linf_l2``: max over steps n >= 1 (startup included) of the l2
    norm of the projected-iterate error.  ``err_l2_h1``: the
    l2-in-time / discrete-H1-in-space norm of the intermediate-iterate
    error, sqrt(k * sum over p >= 1 of |grad error|_2^2).
    ``err_first_step``: the l2 error right after the startup step.
    ``max_unit_deviation``: max over all observed steps of | |m| - 1 |.
    """

    err_linf_l2: float
    err_l2_h1: float
    err_first_step: float
    max_unit_deviation: float


class ErrorTracker:
    """run() observer accumulating the theorem's error norms on the fly."""

    def __init__(self, solution: ManufacturedSolution, grid: GridSpec, dt: float):
        self.solution = solution
        self.grid = grid
        self.dt = dt
        self.max_l2 = 0.0
        self.sum_h1_sq = 0.0
        self.first_step_l2 = math.nan
        self.max_unit_dev = 0.0

    def __call__(self, step: int, t: float, m: VectorField, mtilde: Optional[VectorField]):
        self.max_unit_dev = max(self.max_unit_dev, unit_deviation(m))
        if step == 0:
            return None
        exact = sample_on_grid(self.solution.field, self.grid, t)
        diff = VectorField(self.grid, exact.data - m.data)
        l2 = math.sqrt(inner(diff, diff))
        self.max_l2 = max(self.max_l2, l2)
        if step == 1:
            self.first_step_l2 = l2
        gdiff = VectorField(self.grid, exact.data - mtilde.data)
        g = forward_gradient(gdiff)
        self.sum_h1_sq += self.grid.cell_volume * float(np.sum(g.data ** 2))
        return None

    def result(self) -> ErrorResult:
        return ErrorResult(
            err_linf_l2=self.max_l2,
            err_l2_h1=math.sqrt(self.dt * self.sum_h1_sq),
            err_first_step=self.first_step_l2,
            max_unit_deviation=self.max_unit_dev,
        )


def error_norms(
    trajectory: Sequence[tuple[int, float, VectorField, Optional[VectorField]]],
    solution: ManufacturedSolution,
    grid: GridSpec,
    dt: float,
) -> ErrorResult:
    """Pure replay of :class:`ErrorTracker` over a stored trajectory."""
    tracker = ErrorTracker(solution, grid, dt)
    for step_idx, t, m, mtilde in trajectory:
        tracker(step_idx, t, m, mtilde)
    return tracker.result()


@dataclass(frozen=True)
class LevelResult:
    cells: int
    h: float
    dt: float
    errors: ErrorResult


@dataclass(frozen=True)
class ConvergenceReport:
    dim: int
    alpha: float
    ratio: float
    t_final: float
    algorithm: Algorithm
    levels: tuple[LevelResult, ...]

    def orders(self, which: str) -> list[float]:
        """Fitted orders between adjacent levels for one error column."""
        vals = [getattr(lv.errors, which) for lv in self.levels]
        hs = [lv.h for lv in self.levels]
        return fitted_orders(vals, hs)


def fitted_orders(errors: Sequence[float], hs: Sequence[float]) -> list[float]:
    """log(e_i / e_{i+1}) / log(h_i / h_{i+1}) for adjacent refinement pairs."""
    return [
        math.log(errors[i] / errors[i + 1]) / math.log(hs[i] / hs[i + 1])
        for i in range(len(errors) - 1)
    ]


def convergence_study(
    levels: Sequence[int],
    dim: int,
    alpha: float,
    ratio: float,
    t_final: float,
    algorithm: Algorithm = Algorithm.ALG22,
) -> ConvergenceReport:
    """Forced-solution refinement study with dt = ratio * h per level."""
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError(f"refinement levels must strictly increase, got {levels}")
    solution = default_manufactured(alpha)
    results = []
    for n in levels:
        grid = build_grid(dim, n)
        dt = ratio * grid.h[0]
        cfg = SolverConfig(
            grid=grid,
            alpha=alpha,
            dt=dt,
            t_final=t_final,
            algorithm=algorithm,
            forcing=forcing_sampler(solution, grid),
        )
        m0 = sample_on_grid(solution.field, grid, 0.0)
        m0.unit = True
        tracker = ErrorTracker(solution, grid, dt)
        run(m0, cfg, observer=tracker, stride=1)
        results.append(LevelResult(cells=n, h=grid.h[0], dt=dt, errors=tracker.result()))
    return ConvergenceReport(
        dim=dim, alpha=alpha, ratio=ratio, t_final=t_final,
        algorithm=algorithm, levels=tuple(results),
    )


# ---------------------------------------------------------------------------
# Random field generators for the inequality fuzz suites
# ---------------------------------------------------------------------------


def random_smooth_scalar(
    grid: GridSpec,
    rng: np.random.Generator,
    decay: float = 2.0,
    max_mode: Optional[int] = None,
) -> np.ndarray:
    """Random truncated cosine series on the interior (mirror-compatible).

    Coefficients are Gaussian with amplitude prod_a (1 + p_a)^(-decay),
    zeroed beyond mode N_a/2 per axis (or ``max_mode``), then synthesized
    with the inverse DCT so the field is smooth on the grid scale.
    """
    coeffs = rng.standard_normal(grid.interior_shape)
    for ax in range(grid.dim):
        n = grid.cells[ax]
        cutoff = n // 2 if max_mode is None else min(max_mode, n - 1)
        p = np.arange(n)
        amp = (1.0 + p) ** (-decay) * (p <= cutoff)
        shape = [1] * grid.dim
        shape[ax] = n
        coeffs *= amp.reshape(shape)
    return _idct2_nd(coeffs, range(grid.dim))


def random_smooth_field(
    grid: GridSpec,
    rng: np.random.Generator,
    decay: float = 2.0,
    max_mode: Optional[int] = None,
) -> VectorField:
    """Three independent random smooth components, ghost-extended."""
    out = VectorField.zeros(grid)
    for c in range(3):
        out.interior[c] = random_smooth_scalar(grid, rng, decay, max_mode)
    extend_neumann(out)
    return out


def _random_angle_fields(grid: GridSpec, rng: np.random.Generator):
    """Smooth random spherical angles with O(1) amplitudes."""
    th = rng.uniform(0.6, 2.5)
    ph = rng.uniform(0.0, 2.0 * np.pi)
    s1 = random_smooth_scalar(grid, rng)
    s2 = random_smooth_scalar(grid, rng)
    s1 *= rng.uniform(0.1, 0.5) / max(1e-300, np.max(np.abs(s1)))
    s2 *= rng.uniform(0.1, 0.5) / max(1e-300, np.max(np.abs(s2)))
    return th + s1, ph + s2


def _spherical(grid: GridSpec, theta: np.ndarray, phi: np.ndarray) -> VectorField:
    out = VectorField.zeros(grid)
    st = np.sin(theta)
    out.interior[0] = st * np.cos(phi)
    out.interior[1] = st * np.sin(phi)
    out.interior[2] = np.cos(theta)
    extend_neumann(out)
    out.unit = True
    return out


def random_unit_field(grid: GridSpec, rng: np.random.Generator) -> VectorField:
    """Smooth exactly-unit-length field from random spherical angles."""
    theta, phi = _random_angle_fields(grid, rng)
    return _spherical(grid, theta, phi)


def admissible_perturbation(grid: GridSpec, rng: np.random.Generator, k: float) -> VectorField:
    """Random smooth field rescaled into the perturbation envelope.

    The rescaling enforces |e|_2 <= 2 k^(15/8) and |grad e|_2 <= k^(11/8)/2
    simultaneously, with a random fill factor so the envelope's interior is
    explored rather than only its boundary.
    """
    raw = random_smooth_field(grid, rng, decay=rng.uniform(1.0, 3.0))
    nm = norms(raw)
    u1, u2 = rng.uniform(0.3, 1.0, size=2)
    scale = min(
        u1 * 2.0 * k ** (15.0 / 8.0) / max(nm.l2, 1e-300),
        u2 * 0.5 * k ** (11.0 / 8.0) / max(nm.gradient_l2, 1e-300),
    )
    out = VectorField(grid, scale * raw.data)
    return out


# ---------------------------------------------------------------------------
# Lemma fuzz suites
# ---------------------------------------------------------------------------


@dataclass
class LemmaReport:
    """Outcome of one inequality fuzz suite."""

    lemma: str
    trials: int
    violations: int
    worst_slack: float
    fitted_constant: Optional[float] = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _fit_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng((seed ^ _FIT_STREAM) & _MASK64)


def check_lemma_cross_gradient(trials: int, grid: GridSpec, seed: int) -> LemmaReport:
    """Adjoint identity and gradient bound for cross products.

    For random smooth f, g, F checks, with Lap the mirror-ghost Laplacian:

    * <f x Lap g, F> == <F x f, Lap g> to 1e-12 (relative to magnitudes);
    * |grad(f x g)|_2^2 <= 2 |f|_inf^2 |grad g|_2^2
                           + 12 |g|_4^2 |grad f|_4^2.
    """
    rng = np.random.default_rng(seed)
    tol = 1e-12
    violations = 0
    worst = math.inf
    for _ in range(trials):
        f = random_smooth_field(grid, rng, decay=rng.uniform(1.0, 3.0))
        g = random_smooth_field(grid, rng, decay=rng.uniform(1.0, 3.0))
        big = random_smooth_field(grid, rng, decay=rng.uniform(1.0, 3.0))

        lap_g = laplacian(g)
        lhs = inner(cross(f, lap_g), big)
        rhs = inner(cross(big, f), lap_g)
        adj_slack = tol * (1.0 + abs(lhs) + abs(rhs)) - abs(lhs - rhs)
        if adj_slack < 0.0:
            violations += 1

        nf, ng = norms(f), norms(g)
        lhs2 = norms(cross(f, g)).gradient_l2 ** 2
        rhs2 = (
            2.0 * nf.linf ** 2 * ng.gradient_l2 ** 2
            + 12.0 * ng.l4 ** 2 * nf.gradient_l4 ** 2
        )
        ineq_slack = rhs2 - lhs2
        if ineq_slack < 0.0:
            violations += 1
        worst = min(worst, adj_slack, ineq_slack)
    return LemmaReport(
        lemma="cross_gradient",
        trials=trials,
        violations=violations,
        worst_slack=worst,
        details={"cells": grid.cells, "tolerance": tol},
    )


def _projection_sample(grid: GridSpec, rng: np.random.Generator, k: float):
    """One (underlying, perturbation, projected, error) sample."""
    m_under = random_unit_field(grid, rng)
    etilde = admissible_perturbation(grid, rng, k)
    mtilde = VectorField(grid, m_under.data - etilde.data)
    m = project(mtilde)
    e = VectorField(grid, m_under.data - m.data)
    return m_under, etilde, m, e


def check_projection_stability(
    trials: int, grid: GridSpec, k: float, seed: int, fit_trials: int = 200
) -> LemmaReport:
    """Near-isometry of the pointwise normalization on admissible errors.

    With m_under a smooth unit field, mtilde = m_under - etilde inside the
    perturbation envelope, m = mtilde/|mtilde| and e = m_under - m:

    * |etilde|_2^2 >= (1 - k^(5/4)) |e|_2^2
                      + (1 - k^(1/4)) |etilde - e|_2^2;
    * |grad e|_2^2 <= 2 |grad etilde|_2^2 + C |etilde|_2^2,

    where C is fitted on a disjoint corpus (max observed ratio x 1.05,
    floored at 1), then frozen for the assertion corpus.
    """
    fit_rng = _fit_rng(seed)
    ratio_max = 0.0
    for _ in range(fit_trials):
        _, etilde, _, e = _projection_sample(grid, fit_rng, k)
        net, ne = norms(etilde), norms(e)
        num = ne.gradient_l2 ** 2 - 2.0 * net.gradient_l2 ** 2
        den = net.l2 ** 2
        if den > 0.0:
            ratio_max = max(ratio_max, num / den)
    c_fit = max(1.0, 1.05 * ratio_max)

    rng = np.random.default_rng(seed)
    ka, kb = k ** 1.25, k ** 0.25
    violations = 0
    worst = math.inf
    for _ in range(trials):
        _, etilde, _, e = _projection_sample(grid, rng, k)
        diff = VectorField(grid, etilde.data - e.data)
        et_sq = inner(etilde, etilde)
        e_sq = inner(e, e)
        d_sq = inner(diff, diff)
        slack1 = et_sq - (1.0 - ka) * e_sq - (1.0 - kb) * d_sq
        net, ne = norms(etilde), norms(e)
        slack2 = 2.0 * net.gradient_l2 ** 2 + c_fit * et_sq - ne.gradient_l2 ** 2
        tiny = 1e-14 * (et_sq + e_sq + d_sq)
        if slack1 < -tiny:
            violations += 1
        if slack2 < -tiny:
            violations += 1
        worst = min(worst, slack1, slack2)
    return LemmaReport(
        lemma="projection_stability",
        trials=trials,
        violations=violations,
        worst_slack=worst,
        fitted_constant=c_fit,
        details={"cells": grid.cells, "k": k, "fit_trials": fit_trials},
    )


def check_two_level_projection(trials: int, grid: GridSpec, k: float, seed: int) -> LemmaReport:
    """Cross-term bound between projection errors of two nearby unit fields.

    Generates unit fields with max-norm distance <= k^(7/8)/4 (perturbed
    spherical angles), admissible perturbations for each, projects, and
    asserts

        |<etilde1 - e1, e2>| <= k^(5/4) |e2|_2^2
                                + k^(1/4) |etilde1 - e1|_2^2.
    """
    rng = np.random.default_rng(seed)
    ka, kb = k ** 1.25, k ** 0.25
    budget_cap = 0.25 * k ** (7.0 / 8.0)
    violations = 0
    worst = math.inf
    for _ in range(trials):
        theta, phi = _random_angle_fields(grid, rng)
        d_theta = random_smooth_scalar(grid, rng)
        d_phi = random_smooth_scalar(grid, rng)
        d_theta /= max(1e-300, np.max(np.abs(d_theta)))
        d_phi /= max(1e-300, np.max(np.abs(d_phi)))
        budget = budget_cap * rng.uniform(0.2, 1.0)
        w = rng.uniform(0.2, 0.8)
        m1_under = _spherical(grid, theta, phi)
        m2_under = _spherical(grid, theta + budget * w * d_theta,
                              phi + budget * (1.0 - w) * d_phi)
        gap = np.max(np.sqrt(np.sum((m1_under.interior - m2_under.interior) ** 2, axis=0)))
        if gap > budget_cap:  # pragma: no cover - generator guarantee
            raise AssertionError("generated pair left the closeness envelope")

        et1 = admissible_perturbation(grid, rng, k)
        et2 = admissible_perturbation(grid, rng, k)
        m1 = project(VectorField(grid, m1_under.data - et1.data))
        m2 = project(VectorField(grid, m2_under.data - et2.data))
        e1 = VectorField(grid, m1_under.data - m1.data)
        e2 = VectorField(grid, m2_under.data - m2.data)
        diff1 = VectorField(grid, et1.data - e1.data)

        lhs = abs(inner(diff1, e2))
        e2_sq = inner(e2, e2)
        d1_sq = inner(diff1, diff1)
        slack = ka * e2_sq + kb * d1_sq - lhs
        if slack < -1e-14 * (e2_sq + d1_sq + 1e-300):
            violations += 1
        worst = min(worst, slack)
    return LemmaReport(
        lemma="two_level_projection",
        trials=trials,
        violations=violations,
        worst_slack=worst,
        details={"cells": grid.cells, "k": k},
    )


def _spike_field(grid: GridSpec, rng: np.random.Generator) -> VectorField:
    """Single random interior point carrying a random O(1) vector.

    Spikes extremize the inverse inequalities (their norm ratios carry the
    full h-power), so the fit corpus must contain them.
    """
    out = VectorField.zeros(grid)
    idx = tuple(rng.integers(1, n + 1) for n in grid.cells)
    vec = rng.standard_normal(3)
    vec /= np.linalg.norm(vec)
    out.data[(slice(None),) + idx] = vec * rng.uniform(0.5, 2.0)
    extend_neumann(out)
    return out


def _probe_fields(grid: GridSpec) -> list[VectorField]:
    """Deterministic fields pinning the norm-ratio suprema on any grid.

    The spike in the first cell is the sharp case: the face differences of
    all three axes share its storage index, so the pointwise gradient
    magnitude is supported on a single cell and |grad f|_4 equals
    h^(-3/4) |grad f|_2 exactly, at every resolution.  The constant field
    plays the same role for the embedding ratio (|f|_4 = |f|_2 exactly).
    Anchoring both fit and assertion corpora at these suprema keeps the
    frozen constants out of reach of sampling noise while any broken
    h-scaling still blows past them.
    """
    vec = np.array([0.36, 0.48, 0.8])
    spots = [
        tuple(1 for _ in grid.cells),                      # near corner
        grid.cells,                                        # far corner
        (1,) + tuple(n // 2 for n in grid.cells[1:]),      # edge or wall
        tuple(n // 2 for n in grid.cells),                 # bulk
    ]
    out = []
    for i, idx in enumerate(spots):
        f = VectorField.zeros(grid)
        f.data[(slice(None),) + idx] = vec if i % 2 else np.array([1.0, 0.0, 0.0])
        extend_neumann(f)
        out.append(f)
    const = VectorField.zeros(grid)
    const.interior[...] = vec.reshape((3,) + (1,) * grid.dim)
    extend_neumann(const)
    out.append(const)
    return out


def _ratio_corpus(grid: GridSpec, rng: np.random.Generator, trials: int):
    """Norm-ratio samples for the inverse and embedding inequalities."""
    h = min(grid.h)
    inv_linf, inv_grad, sobolev = [], [], []
    fields = _probe_fields(grid)
    for i in range(trials):
        if i % 4 == 3:
            fields.append(_spike_field(grid, rng))
        else:
            fields.append(random_smooth_field(grid, rng, decay=rng.uniform(0.5, 3.0)))
    for f in fields:
        nm = norms(f)
        denom = nm.l2 + nm.gradient_l2
        if denom > 0.0:
            inv_linf.append(nm.linf / (h ** -0.5 * denom))
        if nm.gradient_l2 > 0.0:
            inv_grad.append(nm.gradient_l4 / (h ** -0.75 * nm.gradient_l2))
        sob_denom = nm.l2 + nm.l2 ** 0.25 * nm.gradient_l2 ** 0.75
        if sob_denom > 0.0:
            sobolev.append(nm.l4 / sob_denom)
    return inv_linf, inv_grad, sobolev


def check_inverse_and_sobolev(
    trials: int, grids: Sequence[GridSpec], seed: int
) -> list[LemmaReport]:
    """Fit-then-freeze verification of the inverse and embedding inequalities.

    On the coarsest grid (fit corpus, disjoint rng stream) the constants

        gamma: |f|_inf <= gamma h^(-1/2) (|f|_2 + |grad f|_2)   and
               |grad f|_4 <= gamma h^(-3/4) |grad f|_2,
        C:     |f|_4 <= C (|f|_2 + |f|_2^(1/4) |grad f|_2^(3/4)),

    are fitted as 1.05 x the max observed ratio, then asserted with fresh
    corpora on every finer grid.  Every corpus is seeded with the
    deterministic extremal probes (see :func:`_probe_fields`) so the fitted
    constants sit at the structural suprema, which are h-uniform, rather
    than at the tail of a finite random sample.  Returns one report per
    inequality family.
    """
    if len(grids) < 2:
        raise ValueError("need at least a fit grid and one test grid")
    hs = [min(g.h) for g in grids]
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("grids must be ordered coarse to fine")

    fit_rng = _fit_rng(seed)
    inv_linf, inv_grad, sobolev = _ratio_corpus(grids[0], fit_rng, trials)
    gamma = 1.05 * max(max(inv_linf), max(inv_grad))
    c_sob = 1.05 * max(sobolev)

    rng = np.random.default_rng(seed)
    inv_viol = sob_viol = 0
    inv_worst = sob_worst = math.inf
    tested = 0
    for grid in grids[1:]:
        a, b, s = _ratio_corpus(grid, rng, trials)
        tested += trials
        for r in a + b:
            slack = gamma - r
            inv_worst = min(inv_worst, slack)
            if slack < 0.0:
                inv_viol += 1
        for r in s:
            slack = c_sob - r
            sob_worst = min(sob_worst, slack)
            if slack < 0.0:
                sob_viol += 1

    shared = {"fit_cells": grids[0].cells, "test_cells": [g.cells for g in grids[1:]]}
    return [
        LemmaReport(
            lemma="inverse_estimates",
            trials=tested,
            violations=inv_viol,
            worst_slack=inv_worst,
            fitted_constant=gamma,
            details=shared,
        ),
        LemmaReport(
            lemma="sobolev_embedding",
            trials=tested,
            violations=sob_viol,
            worst_slack=sob_worst,
            fitted_constant=c_sob,
            details=shared,
        ),
    ]


# ---------------------------------------------------------------------------
# Stability sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    algorithm: str
    alpha: float
    ratio: float
    completed: bool
    max_deviation: float


def stability_comparison(
    alphas: Sequence[float],
    ratios: Sequence[float],
    grid: GridSpec,
    t_final: float,
) -> list[SweepRow]:
    """Run both schemes over a damping x time-ratio sweep from smooth data.

    Initial data is the reference field at t = 0 with zero forcing.  Each
    cell integrates to max(t_final, 2 dt) so even the coarsest time step
    performs the two-level minimum.  ``completed`` means the run finished
    with max |mtilde| <= 2 throughout; ``max_deviation`` records
    max over steps and points of | |mtilde| - 1 |.
    """
    if len(set(grid.h)) != 1:
        raise ValueError("stability sweep expects a uniform grid")
    h = grid.h[0]
    solution = default_manufactured(alpha=1.0)  # field is damping-independent
    m0 = sample_on_grid(solution.field, grid, 0.0)
    m0.unit = True

    rows = []
    for algorithm in (Algorithm.ALG21, Algorithm.ALG22):
        for alpha in alphas:
            for ratio in ratios:
                dt = ratio * h
                cfg = SolverConfig(
                    grid=grid,
                    alpha=alpha,
                    dt=dt,
                    t_final=max(t_final, 2.0 * dt),
                    algorithm=algorithm,
                )
                stats = {"max_mag": 1.0, "max_dev": 0.0}

                def watch(step, t, m, mtilde, stats=stats):
                    if mtilde is None:
                        return None
                    mag = np.sqrt(np.sum(mtilde.interior ** 2, axis=0))
                    stats["max_mag"] = max(stats["max_mag"], float(np.max(mag)))
                    stats["max_dev"] = max(
                        stats["max_dev"], float(np.max(np.abs(mag - 1.0)))
                    )
                    return None

                try:
                    run(m0, cfg, observer=watch, stride=1)
                    completed = stats["max_mag"] <= 2.0
                except ProjectionError:
                    completed = False
                rows.append(
                    SweepRow(
                        algorithm=algorithm.value,
                        alpha=alpha,
                        ratio=ratio,
                        completed=completed,
                        max_deviation=stats["max_dev"],
                    )
                )
    return rows
