"""Acceptance gate: the seven headline guarantees, one test and verdict each.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
verdict lines for passing tests too (pytest swallows stdout of passing
tests by default).
"""

import time

import numpy as np
import pytest

from llbdf2 import build_grid, sample_on_grid
from llbdf2.mesh import VectorField, unit_deviation
from llbdf2.helmholtz import apply_operator, plan, solve
from llbdf2.stepper import Algorithm, SolverConfig, StepperState, run, step
from llbdf2.verify import (
    check_inverse_and_sobolev,
    check_lemma_cross_gradient,
    check_projection_stability,
    check_two_level_projection,
    convergence_study,
    default_manufactured,
    forcing_sampler,
    stability_comparison,
)

import dense_reference as dense

ALPHA = 4.0          # inside the analysis regime (damping > 3)
RATIO = 0.5          # k = h / 2
T_FINAL = 0.25
BAND_2D = (1.7, 2.3)
BAND_3D = (1.6, 2.4)
SEED = 0


def verdict(criterion: int, ok: bool, detail: str) -> None:
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")


@pytest.fixture(scope="module")
def study_2d():
    return convergence_study([8, 16, 32, 64], dim=2, alpha=ALPHA,
                             ratio=RATIO, t_final=T_FINAL)


@pytest.fixture(scope="module")
def study_3d():
    return convergence_study([8, 16, 32], dim=3, alpha=ALPHA,
                             ratio=RATIO, t_final=T_FINAL)


def fmt_orders(orders):
    return "[" + ", ".join(f"{o:.3f}" for o in orders) + "]"


def test_criterion_1_second_order_convergence(study_2d, study_3d):
    o2d_l2 = study_2d.orders("err_linf_l2")
    o2d_h1 = study_2d.orders("err_l2_h1")
    o3d_l2 = study_3d.orders("err_linf_l2")
    o3d_h1 = study_3d.orders("err_l2_h1")

    lo2, hi2 = BAND_2D
    lo3, hi3 = BAND_3D
    ok_2d_l2 = all(lo2 <= o <= hi2 for o in o2d_l2)
    ok_2d_h1 = all(lo2 <= o <= hi2 for o in o2d_h1)
    ok_3d_l2 = lo3 <= o3d_l2[-1] <= hi3
    ok_3d_h1 = lo3 <= o3d_h1[-1] <= hi3
    ok = ok_2d_l2 and ok_2d_h1 and ok_3d_l2 and ok_3d_h1

    detail = (
        f"2D orders max-l2 {fmt_orders(o2d_l2)} / H1 {fmt_orders(o2d_h1)} "
        f"vs [{lo2}, {hi2}]; 3D finest max-l2 {o3d_l2[-1]:.3f} / "
        f"H1 {o3d_h1[-1]:.3f} vs [{lo3}, {hi3}]"
    )
    verdict(1, ok, detail)
    assert ok_2d_l2, f"2D max-in-time l2 orders {fmt_orders(o2d_l2)} outside {BAND_2D}"
    assert ok_3d_l2, f"3D finest max-in-time l2 order {o3d_l2[-1]:.3f} outside {BAND_3D}"
    # Known shortfall: the intermediate-field H1 error converges at ~1.6,
    # driven by the first-order off-diagonal entries of the averaged
    # gradient; the coefficient error is parallel to the field, so the
    # projected iterates above still converge at second order.  See the
    # convergence notes in the README.
    assert ok_2d_h1, f"2D H1-in-time orders {fmt_orders(o2d_h1)} outside {BAND_2D}"
    assert ok_3d_h1, f"3D finest H1-in-time order {o3d_h1[-1]:.3f} outside {BAND_3D}"


def test_criterion_2_startup_order(study_2d, study_3d):
    o2d = study_2d.orders("err_first_step")
    o3d = study_3d.orders("err_first_step")
    ok = all(o >= 1.7 for o in o2d + o3d)
    verdict(2, ok, f"startup-error orders 2D {fmt_orders(o2d)}, 3D {fmt_orders(o3d)} (>= 1.7)")
    assert ok, f"startup orders 2D {fmt_orders(o2d)}, 3D {fmt_orders(o3d)} fell below 1.7"


def test_criterion_3_helmholtz_exactness():
    rng = np.random.default_rng(SEED)
    worst_residual = 0.0
    for dim in (1, 2, 3):
        cap = {1: 64, 2: 64, 3: 24}[dim]
        for trial in range(200):
            if trial == 0:
                cells = (64,) * dim  # always include the largest pinned size
            else:
                cells = tuple(int(n) for n in rng.integers(2, cap + 1, size=dim))
            grid = build_grid(dim, cells)
            alpha = float(rng.uniform(0.5, 8.0))
            k = float(rng.uniform(1e-3, 0.5))
            pl = plan(grid, alpha, k)
            q = VectorField.zeros(grid)
            q.interior[...] = rng.standard_normal((3,) + grid.interior_shape)
            sol = solve(pl, q)
            res = apply_operator(pl, sol).interior - q.interior
            rel = float(np.linalg.norm(res) / np.linalg.norm(q.interior))
            worst_residual = max(worst_residual, rel)

    worst_dense = 0.0
    for dim in (1, 2, 3):
        for cells in ([2] * dim, [3] * dim, [4] * dim):
            grid = build_grid(dim, cells)
            alpha, k = 4.0, 0.05
            pl = plan(grid, alpha, k)
            q = VectorField.zeros(grid)
            q.interior[...] = rng.standard_normal((3,) + grid.interior_shape)
            got = solve(pl, q).interior
            want = dense.dense_helmholtz_solve(grid, alpha, pl.shift, q.interior)
            scale = float(np.max(np.abs(want)))
            worst_dense = max(worst_dense, float(np.max(np.abs(got - want))) / scale)

    ok = worst_residual <= 1e-12 and worst_dense <= 1e-12
    verdict(3, ok, f"600 random solves, worst relative residual {worst_residual:.2e}; "
                   f"worst dense mismatch {worst_dense:.2e} (<= 1e-12)")
    assert worst_residual <= 1e-12
    assert worst_dense <= 1e-12


def test_criterion_4_unit_length_invariant(study_2d, study_3d):
    worst = 0.0
    for report in (study_2d, study_3d):
        for lv in report.levels:
            worst = max(worst, lv.errors.max_unit_deviation)

    # the stability gate configuration, both schemes, tracked directly
    grid = build_grid(3, 16)
    solution = default_manufactured(ALPHA)
    m0 = sample_on_grid(solution.field, grid, 0.0)
    m0.unit = True
    for algorithm in (Algorithm.ALG21, Algorithm.ALG22):
        cfg = SolverConfig(grid=grid, alpha=ALPHA, dt=grid.h[0] / 4, t_final=0.1,
                           algorithm=algorithm,
                           forcing=forcing_sampler(solution, grid))
        devs = []
        run(m0, cfg, observer=lambda s, t, m, mt: devs.append(unit_deviation(m)))
        worst = max(worst, max(devs))

    ok = worst <= 1e-12
    verdict(4, ok, f"max | |m| - 1 | over all acceptance runs = {worst:.2e} (<= 1e-12)")
    assert ok


def test_criterion_5_lemma_suites():
    t0 = time.time()
    reports = []
    grid8 = build_grid(3, 8)
    reports.append(check_lemma_cross_gradient(1000, grid8, SEED))
    grid16 = build_grid(3, 16)
    for k in (0.1, 0.05, 0.025):
        reports.append(check_projection_stability(1000, grid16, k, SEED))
        reports.append(check_two_level_projection(1000, grid16, k, SEED))
    ladder = [build_grid(3, n) for n in (8, 16, 32)]
    reports.extend(check_inverse_and_sobolev(1000, ladder, SEED))
    elapsed = time.time() - t0

    total_violations = sum(r.violations for r in reports)
    ok = total_violations == 0 and elapsed < 60.0
    summary = ", ".join(f"{r.lemma}={r.violations}" for r in reports)
    verdict(5, ok, f"violations: {summary}; {elapsed:.1f}s (< 60s)")
    assert total_violations == 0, summary
    assert elapsed < 60.0, f"lemma suites took {elapsed:.1f}s"


def test_criterion_6_scheme_fidelity_dense_step():
    grid = build_grid(3, 4)
    solution = default_manufactured(ALPHA)
    dt = grid.h[0] / 2
    m_prev = sample_on_grid(solution.field, grid, 0.0)
    m = sample_on_grid(solution.field, grid, dt)
    rng = np.random.default_rng(SEED)
    wobble = 1.0 + 0.02 * rng.standard_normal((3,) + grid.interior_shape)
    mt_prev = VectorField.zeros(grid)
    mt_prev.interior[...] = m_prev.interior * wobble
    mt = VectorField.zeros(grid)
    mt.interior[...] = m.interior * wobble[::-1]
    state = StepperState(step=1, time=dt, m_prev=m_prev, m=m,
                         mtilde_prev=mt_prev, mtilde=mt)
    sampler = forcing_sampler(solution, grid)

    worst = 0.0
    for algorithm in ("alg22", "alg21"):
        cfg = SolverConfig(grid=grid, alpha=ALPHA, dt=dt, t_final=1.0,
                           algorithm=Algorithm(algorithm), forcing=sampler)
        new = step(state, cfg, plan(grid, ALPHA, dt))
        mt_want, m_want = dense.dense_bdf2_step(
            grid, ALPHA, dt, algorithm,
            m_prev.interior.reshape(3, -1), m.interior.reshape(3, -1),
            mt_prev.interior.reshape(3, -1), mt.interior.reshape(3, -1),
            forcing=sampler(2 * dt).reshape(3, -1),
        )
        gap = max(
            float(np.max(np.abs(new.mtilde.interior.reshape(3, -1) - mt_want))),
            float(np.max(np.abs(new.m.interior.reshape(3, -1) - m_want))),
        )
        worst = max(worst, gap)

    ok = worst <= 1e-12
    verdict(6, ok, f"N=4 single step vs dense oracle, both schemes: "
                   f"max deviation {worst:.2e} (<= 1e-12)")
    assert ok


def test_criterion_7_stability_sweep():
    grid = build_grid(3, 16)
    rows = stability_comparison(
        alphas=[0.5, 1.0, 2.0, 4.0],
        ratios=[0.125, 0.25, 0.5, 1.0],
        grid=grid,
        t_final=0.1,
    )
    assert len(rows) == 32
    print()
    print(f"{'scheme':8s} {'alpha':>6s} {'k/h':>6s} {'completed':>9s} {'max_dev':>10s}")
    for r in rows:
        print(f"{r.algorithm:8s} {r.alpha:6.2f} {r.ratio:6.3f} "
              f"{str(r.completed):>9s} {r.max_deviation:10.3e}")

    gate = [r for r in rows if r.alpha == 4.0 and r.ratio == 0.25]
    assert {r.algorithm for r in gate} == {"alg21", "alg22"}
    ok = all(r.completed for r in gate)
    detail = "; ".join(
        f"{r.algorithm} alpha=4 k=h/4 completed={r.completed} "
        f"max||mtilde|-1|={r.max_deviation:.2e}" for r in gate
    )
    verdict(7, ok, detail + " (gating cells only; the rest is exploratory)")
    assert ok
