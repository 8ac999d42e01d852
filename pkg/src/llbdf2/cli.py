"""Command-line interface: run, converge, lemmas, compare.

Configuration comes from an optional flat ``key = value`` file (``#``
comments allowed) plus command-line flags; flags override the file.  Keys:

    dim        1, 2 or 3                       (default 2)
    cells      per-axis cell counts, comma-separated or one int (default 16)
    alpha      damping, > 0                    (default 4.0)
    dt         time step, > 0                  (default h/2)
    T          final time, > 0                 (default 0.25)
    algorithm  alg21 | alg22                   (default alg22)
    forcing    none | manufactured             (default manufactured)
    stride     observer stride in steps, >= 1  (default 1)
    seed       64-bit rng seed                 (default 0)
    out_dir    output directory                (default out)

Initial data is always the closed-form reference field at t = 0; the
``forcing`` switch decides whether the matching source term is applied
(tracked run) or omitted (free decay).

Exit codes: 0 success, 1 configuration/validation error, 2 numerical
failure (projection breakdown or a requested acceptance gate violated).

Every command writes a ``manifest.json`` recording the resolved
configuration and the produced files, so each artifact is reproducible
from its manifest.  Floats in CSV output carry 17 significant digits;
identical manifests yield byte-identical CSVs.

Field snapshots use a little-endian binary layout: magic ``MFLD``,
version u32, dim u32, per-axis cell counts u32, time f64, then the three
components' interior values in row-major order as f64.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import struct
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .mesh import VectorField, build_grid, extend_neumann, sample_on_grid
from .discrete_ops import norms
from .stepper import Algorithm, ProjectionError, SolverConfig, run
from .verify import (
    check_inverse_and_sobolev,
    check_lemma_cross_gradient,
    check_projection_stability,
    check_two_level_projection,
    convergence_study,
    default_manufactured,
    forcing_sampler,
    stability_comparison,
)

__all__ = [
    "ConfigError",
    "RunManifest",
    "parse_config",
    "dump_field",
    "load_field",
    "main",
]

_MAGIC = b"MFLD"
_VERSION = 1

_DEFAULTS = {
    "dim": 2,
    "cells": None,  # resolved to 16 per axis
    "alpha": 4.0,
    "dt": None,  # resolved to h/2
    "T": 0.25,
    "algorithm": "alg22",
    "forcing": "manufactured",
    "stride": 1,
    "seed": 0,
    "out_dir": "out",
}


class ConfigError(ValueError):
    """Configuration problem; maps to exit code 1."""


@dataclass
class RunManifest:
    """Record of what a command did, written next to its outputs."""

    command: str
    config: dict
    outputs: list[str] = field(default_factory=list)

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "manifest.json"
        payload = {
            "command": self.command,
            "config": self.config,
            "outputs": sorted(self.outputs),
            "version": _VERSION,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return path


def _fmt(x) -> str:
    """CSV cell formatting: 17 significant digits for floats."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([_fmt(c) for c in row] for row in rows)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def _parse_value(key: str, raw: str):
    try:
        if key in ("dim", "stride", "seed"):
            return int(raw)
        if key in ("alpha", "dt", "T"):
            return float(raw)
        if key == "cells":
            return [int(p) for p in raw.replace(",", " ").split()]
        if key in ("algorithm", "forcing", "out_dir"):
            return raw
    except ValueError:
        raise ConfigError(f"could not parse value {raw!r} for key '{key}'") from None
    raise ConfigError(f"unknown config key: '{key}'")


def _read_config_file(path: Path) -> dict:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _DEFAULTS:
            raise ConfigError(f"unknown config key: '{key}'")
        values[key] = _parse_value(key, raw)
    return values


def parse_config(path: Optional[str], overrides: dict) -> tuple[SolverConfig, dict]:
    """Resolve defaults <- file <- flags into a SolverConfig and a manifest dict.

    Raises :class:`ConfigError` with a message naming the offending key for
    every rejected value.
    """
    resolved = dict(_DEFAULTS)
    if path is not None:
        resolved.update(_read_config_file(Path(path)))
    resolved.update({k: v for k, v in overrides.items() if v is not None})

    dim = resolved["dim"]
    if dim not in (1, 2, 3):
        raise ConfigError(f"dim must be 1, 2 or 3, got {dim}")
    cells = resolved["cells"]
    if cells is None:
        cells = [16] * dim
    if isinstance(cells, int):
        cells = [cells] * dim
    if len(cells) == 1:
        cells = cells * dim
    if len(cells) != dim:
        raise ConfigError(f"cells must give 1 or {dim} counts, got {cells}")
    if any(n < 2 for n in cells):
        raise ConfigError(f"cells must all be >= 2, got {cells}")
    grid = build_grid(dim, cells)
    resolved["cells"] = list(cells)

    alpha = resolved["alpha"]
    if alpha <= 0.0:
        raise ConfigError(f"alpha must be positive, got {alpha}")
    dt = resolved["dt"]
    if dt is None:
        dt = 0.5 * min(grid.h)
        resolved["dt"] = dt
    if dt <= 0.0:
        raise ConfigError(f"dt must be positive, got {dt}")
    t_final = resolved["T"]
    if t_final <= 0.0:
        raise ConfigError(f"T must be positive, got {t_final}")
    n_steps = int(math.floor(t_final / dt + 1e-9))
    if n_steps < 2:
        raise ConfigError(
            f"T = {t_final:g} with dt = {dt:g} yields {n_steps} step(s); "
            "the scheme needs at least 2 (keys T, dt)"
        )
    if resolved["algorithm"] not in ("alg21", "alg22"):
        raise ConfigError(
            f"algorithm must be 'alg21' or 'alg22', got '{resolved['algorithm']}'"
        )
    if resolved["forcing"] not in ("none", "manufactured"):
        raise ConfigError(
            f"forcing must be 'none' or 'manufactured', got '{resolved['forcing']}'"
        )
    if resolved["stride"] < 1:
        raise ConfigError(f"stride must be >= 1, got {resolved['stride']}")
    if not 0 <= resolved["seed"] < 2 ** 64:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {resolved['seed']}")

    solution = default_manufactured(alpha)
    forcing = forcing_sampler(solution, grid) if resolved["forcing"] == "manufactured" else None
    cfg = SolverConfig(
        grid=grid,
        alpha=alpha,
        dt=dt,
        t_final=t_final,
        algorithm=Algorithm(resolved["algorithm"]),
        forcing=forcing,
    )
    return cfg, resolved


# ---------------------------------------------------------------------------
# Field snapshots
# ---------------------------------------------------------------------------


def dump_field(m: VectorField, path: Path, time: float) -> None:
    """Write a vector field snapshot (interior only) in the binary layout."""
    grid = m.grid
    header = struct.pack("<4sII", _MAGIC, _VERSION, grid.dim)
    header += struct.pack(f"<{grid.dim}I", *grid.cells)
    header += struct.pack("<d", time)
    payload = np.ascontiguousarray(m.interior, dtype="<f8").tobytes()
    Path(path).write_bytes(header + payload)


def load_field(path: Path) -> tuple[VectorField, float]:
    """Read a snapshot back; ghosts are re-extended, interior is bit-exact."""
    blob = Path(path).read_bytes()
    magic, version, dim = struct.unpack_from("<4sII", blob, 0)
    if magic != _MAGIC:
        raise ConfigError(f"not a field snapshot: {path}")
    if version != _VERSION:
        raise ConfigError(f"unsupported snapshot version {version} in {path}")
    off = struct.calcsize("<4sII")
    cells = struct.unpack_from(f"<{dim}I", blob, off)
    off += struct.calcsize(f"<{dim}I")
    (time,) = struct.unpack_from("<d", blob, off)
    off += struct.calcsize("<d")
    grid = build_grid(dim, cells)
    data = np.frombuffer(blob, dtype="<f8", offset=off).reshape((3,) + grid.interior_shape)
    out = VectorField.zeros(grid)
    out.interior[...] = data
    extend_neumann(out)
    return out, time


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _ensure_out_dir(resolved: dict) -> Path:
    out_dir = Path(resolved["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def cmd_run(args: argparse.Namespace) -> int:
    overrides = {
        "dim": args.dim,
        "cells": args.cells,
        "alpha": args.alpha,
        "dt": args.dt,
        "T": args.T,
        "algorithm": args.algorithm,
        "forcing": args.forcing,
        "stride": args.stride,
        "seed": args.seed,
        "out_dir": args.out_dir,
    }
    cfg, resolved = parse_config(args.config, overrides)
    out_dir = _ensure_out_dir(resolved)
    manifest = RunManifest(command="run", config=resolved)
    snap_stride = args.snapshots or 0

    solution = default_manufactured(cfg.alpha)
    m0 = sample_on_grid(solution.field, cfg.grid, 0.0)
    m0.unit = True

    rows = []

    def observe(step, t, m, mtilde):
        nm = norms(m)
        mag = np.sqrt(np.sum(m.interior ** 2, axis=0))
        rows.append(
            (step, t, nm.l2, nm.linf, nm.h1, float(np.min(mag)), float(np.max(mag)))
        )
        if snap_stride and (step % snap_stride == 0):
            name = f"field_{step:06d}.bin"
            dump_field(m, out_dir / name, t)
            manifest.outputs.append(name)
        return None

    try:
        run(m0, cfg, observer=observe, stride=resolved["stride"])
    except ProjectionError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2

    _write_csv(
        out_dir / "norms.csv",
        ["step", "time", "l2", "linf", "h1", "min_len", "max_len"],
        rows,
    )
    manifest.outputs.append("norms.csv")
    manifest.write(out_dir)
    print(f"run finished: {len(rows)} records -> {out_dir / 'norms.csv'}")
    return 0


def cmd_converge(args: argparse.Namespace) -> int:
    levels = [int(p) for p in args.levels.replace(",", " ").split()]
    if args.alpha <= 0.0:
        raise ConfigError(f"alpha must be positive, got {args.alpha}")
    if args.T <= 0.0:
        raise ConfigError(f"T must be positive, got {args.T}")
    if args.ratio <= 0.0:
        raise ConfigError(f"ratio must be positive, got {args.ratio}")
    try:
        report = convergence_study(
            levels=levels,
            dim=args.dim,
            alpha=args.alpha,
            ratio=args.ratio,
            t_final=args.T,
            algorithm=Algorithm(args.algorithm),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    orders1 = report.orders("err_linf_l2")
    orders2 = report.orders("err_l2_h1")
    rows = []
    for i, lv in enumerate(report.levels):
        o1 = _fmt(orders1[i - 1]) if i > 0 else ""
        o2 = _fmt(orders2[i - 1]) if i > 0 else ""
        rows.append(
            (lv.cells, lv.h, lv.dt, lv.errors.err_linf_l2, lv.errors.err_l2_h1, o1, o2)
        )
    _write_csv(
        out_dir / "convergence.csv",
        ["N", "h", "k", "err_linf_l2", "err_l2_h1", "order_1", "order_2"],
        rows,
    )
    manifest = RunManifest(
        command="converge",
        config={
            "dim": args.dim,
            "levels": levels,
            "alpha": args.alpha,
            "ratio": args.ratio,
            "T": args.T,
            "algorithm": args.algorithm,
            "out_dir": str(out_dir),
        },
        outputs=["convergence.csv"],
    )
    manifest.write(out_dir)

    print(f"{'N':>6} {'err_linf_l2':>14} {'order':>7} {'err_l2_h1':>14} {'order':>7}")
    for i, lv in enumerate(report.levels):
        o1 = f"{orders1[i - 1]:7.3f}" if i > 0 else "      -"
        o2 = f"{orders2[i - 1]:7.3f}" if i > 0 else "      -"
        print(
            f"{lv.cells:>6} {lv.errors.err_linf_l2:14.6e} {o1} "
            f"{lv.errors.err_l2_h1:14.6e} {o2}"
        )

    if args.order_band is not None:
        lo, hi = args.order_band
        if args.band_scope == "finest":
            checked = orders1[-1:] + orders2[-1:]
        else:
            checked = orders1 + orders2
        if any(not (lo <= o <= hi) for o in checked):
            print(
                f"order gate violated: fitted orders {checked} outside [{lo}, {hi}]",
                file=sys.stderr,
            )
            return 2
    return 0


def cmd_lemmas(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise ConfigError(f"trials must be >= 1, got {args.trials}")
    k_values = [float(p) for p in args.k_values.replace(",", " ").split()]
    if any(k <= 0 for k in k_values):
        raise ConfigError(f"k values must be positive, got {k_values}")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports = []
    grid8 = build_grid(3, 8)
    reports.append((check_lemma_cross_gradient(args.trials, grid8, args.seed), "cells=8"))
    grid16 = build_grid(3, 16)
    for k in k_values:
        reports.append(
            (check_projection_stability(args.trials, grid16, k, args.seed), f"cells=16 k={k:g}")
        )
    for k in k_values:
        reports.append(
            (check_two_level_projection(args.trials, grid16, k, args.seed), f"cells=16 k={k:g}")
        )
    ladder = [build_grid(3, n) for n in (8, 16, 32)]
    for rep in check_inverse_and_sobolev(args.trials, ladder, args.seed):
        reports.append((rep, "fit=8 test=16,32"))

    rows = [
        (
            rep.lemma,
            params,
            rep.trials,
            rep.violations,
            rep.worst_slack,
            "" if rep.fitted_constant is None else _fmt(rep.fitted_constant),
        )
        for rep, params in reports
    ]
    _write_csv(
        out_dir / "lemmas.csv",
        ["lemma", "params", "trials", "violations", "worst_slack", "fitted_constant"],
        rows,
    )
    manifest = RunManifest(
        command="lemmas",
        config={
            "trials": args.trials,
            "seed": args.seed,
            "k_values": k_values,
            "out_dir": str(out_dir),
        },
        outputs=["lemmas.csv"],
    )
    manifest.write(out_dir)

    total_viol = 0
    for rep, params in reports:
        status = "ok" if rep.passed else "VIOLATED"
        print(
            f"{rep.lemma:22s} {params:18s} trials={rep.trials:<6d} "
            f"violations={rep.violations:<4d} worst_slack={rep.worst_slack:.3e} {status}"
        )
        total_viol += rep.violations
    return 2 if total_viol else 0


def cmd_compare(args: argparse.Namespace) -> int:
    alphas = [float(p) for p in args.alphas.replace(",", " ").split()]
    ratios = [float(p) for p in args.ratios.replace(",", " ").split()]
    if args.T <= 0.0:
        raise ConfigError(f"T must be positive, got {args.T}")
    if any(a <= 0 for a in alphas):
        raise ConfigError(f"alphas must be positive, got {alphas}")
    if any(r <= 0 for r in ratios):
        raise ConfigError(f"ratios must be positive, got {ratios}")
    grid = build_grid(args.dim, args.cells)
    rows = stability_comparison(alphas, ratios, grid, args.T)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "compare.csv",
        ["algorithm", "alpha", "ratio", "completed", "max_deviation"],
        [(r.algorithm, r.alpha, r.ratio, r.completed, r.max_deviation) for r in rows],
    )
    manifest = RunManifest(
        command="compare",
        config={
            "dim": args.dim,
            "cells": args.cells,
            "T": args.T,
            "alphas": alphas,
            "ratios": ratios,
            "out_dir": str(out_dir),
        },
        outputs=["compare.csv"],
    )
    manifest.write(out_dir)

    for r in rows:
        print(
            f"{r.algorithm}  alpha={r.alpha:<5g} k/h={r.ratio:<6g} "
            f"completed={str(r.completed):5s} max_dev={r.max_deviation:.3e}"
        )
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llbdf2",
        description=(
            "BDF2 projection solver for the Landau-Lifshitz equation with a "
            "DCT-based Helmholtz core and a verification harness"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one configuration, emit norms.csv")
    p_run.add_argument("--config", help="flat key = value configuration file")
    p_run.add_argument("--dim", type=int)
    p_run.add_argument("--cells", type=lambda s: [int(p) for p in s.replace(",", " ").split()])
    p_run.add_argument("--alpha", type=float)
    p_run.add_argument("--dt", type=float)
    p_run.add_argument("--T", type=float)
    p_run.add_argument("--algorithm", choices=["alg21", "alg22"])
    p_run.add_argument("--forcing", choices=["none", "manufactured"])
    p_run.add_argument("--stride", type=int)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--out-dir", dest="out_dir")
    p_run.add_argument(
        "--snapshots", type=int, default=0,
        help="dump a binary field snapshot every this many steps (0 = off)",
    )
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("converge", help="manufactured-solution refinement study")
    p_conv.add_argument("--dim", type=int, default=2)
    p_conv.add_argument("--levels", default="8,16,32,64", help="comma-separated cell counts")
    p_conv.add_argument("--alpha", type=float, default=4.0)
    p_conv.add_argument("--ratio", type=float, default=0.5, help="dt / h")
    p_conv.add_argument("--T", type=float, default=0.25)
    p_conv.add_argument("--algorithm", choices=["alg21", "alg22"], default="alg22")
    p_conv.add_argument("--out-dir", dest="out_dir", default="out")
    p_conv.add_argument(
        "--order-band", type=float, nargs=2, metavar=("MIN", "MAX"),
        help="exit 2 unless fitted orders fall inside this band",
    )
    p_conv.add_argument("--band-scope", choices=["all", "finest"], default="all")
    p_conv.set_defaults(func=cmd_converge)

    p_lem = sub.add_parser("lemmas", help="inequality fuzz suites, emit lemmas.csv")
    p_lem.add_argument("--trials", type=int, default=1000)
    p_lem.add_argument("--seed", type=int, default=0)
    p_lem.add_argument("--k-values", dest="k_values", default="0.1,0.05,0.025")
    p_lem.add_argument("--out-dir", dest="out_dir", default="out")
    p_lem.set_defaults(func=cmd_lemmas)

    p_cmp = sub.add_parser("compare", help="stability sweep over both schemes")
    p_cmp.add_argument("--dim", type=int, default=3)
    p_cmp.add_argument("--cells", type=int, default=16)
    p_cmp.add_argument("--T", type=float, default=0.1)
    p_cmp.add_argument("--alphas", default="0.5,1,2,4")
    p_cmp.add_argument("--ratios", default="0.125,0.25,0.5,1")
    p_cmp.add_argument("--out-dir", dest="out_dir", default="out")
    p_cmp.set_defaults(func=cmd_compare)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad flags; remap to 1
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ProjectionError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
