"""Command-line entry point.

Subcommands:
  analyze  run the uniformity/homogeneity pipeline from a JSON config
  bodies   list the built-in analytic test bodies
  flow     integrate one exponential trajectory of the material lift

Exit codes: 0 analysis completed (whatever the verdicts), 2 config error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .algebroid import fiber
from .analysis import AnalysisConfig, emit_report, resolve_body, run_analysis
from .bodies import BUILTIN_DESCRIPTIONS, make_samples
from .connection import minimal_lift_section
from .errors import ConfigError, MatbodyError
from .flows import SectionField, exp_trajectory
from .grid import make_grid

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load_config(path: str) -> AnalysisConfig:
    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}")
    return AnalysisConfig.from_dict(raw)


def _write_out(data: bytes, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(out).write_bytes(data)


def _cmd_analyze(args) -> int:
    cfg = _load_config(args.config)
    report = run_analysis(cfg)
    _write_out(emit_report(report, args.format), args.out)
    return EXIT_OK


def _cmd_bodies(_args) -> int:
    width = max(len(n) for n in BUILTIN_DESCRIPTIONS)
    for name in sorted(BUILTIN_DESCRIPTIONS):
        print(f"{name:<{width}}  {BUILTIN_DESCRIPTIONS[name]}")
    return EXIT_OK


def _cmd_flow(args) -> int:
    cfg = _load_config(args.config)
    body = resolve_body(cfg)
    x = np.array([float(v) for v in args.x.split(",")])
    if x.shape != (3,):
        raise ConfigError("--x must be three comma-separated reals")
    u = np.array([float(v) for v in args.direction.split(",")])
    if u.shape != (3,) or not np.any(u):
        raise ConfigError("--direction must be three comma-separated reals, not all zero")

    grid = make_grid(body.lo, body.hi, cfg.resolution, cfg.margin)
    samples = make_samples(cfg.sample_count, cfg.seed)
    fibers = [fiber(body, p, samples, cfg.rank_tol, cfg.fd_step) for p in grid.points]
    section = minimal_lift_section(grid, fibers, cfg.v_tol)
    a_data = grid.reshape(np.einsum("pjkl,j->pkl", section.lam, u))
    v_data = grid.reshape(np.tile(u, (grid.n_points, 1)))
    s = SectionField.from_grid(grid.axes, v_data, a_data)

    step = float(args.step)
    records = [
        {"t": t_k, "y": y.tolist(), "F": F.tolist()}
        for t_k, y, F in exp_trajectory(s, args.t, x, step)
    ]
    doc = {
        "schema": "matbody.trajectory.v1",
        "body": body.name,
        "x0": x.tolist(),
        "direction": u.tolist(),
        "t": args.t,
        "step": step,
        "records": records,
    }
    _write_out((json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8"),
               args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="matbody",
        description="Uniformity and homogeneity analysis of simple elastic bodies",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the full analysis pipeline")
    a.add_argument("--config", required=True, help="path to JSON config")
    a.add_argument("--format", choices=["text", "structured"], default="text")
    a.add_argument("--out", default=None, help="output path (default stdout)")
    a.set_defaults(fn=_cmd_analyze)

    b = sub.add_parser("bodies", help="list built-in bodies")
    b.set_defaults(fn=_cmd_bodies)

    f = sub.add_parser("flow", help="dump one exponential trajectory of the material lift")
    f.add_argument("--config", required=True, help="path to JSON config")
    f.add_argument("--t", type=float, required=True, help="flow time")
    f.add_argument("--x", required=True, help="start point 'x,y,z'")
    f.add_argument("--direction", default="1,0,0", help="anchor direction 'x,y,z'")
    f.add_argument("--step", default="1e-3", help="RK4 step")
    f.add_argument("--out", default=None, help="output path (default stdout)")
    f.set_defaults(fn=_cmd_flow)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MatbodyError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
