"""Command-line interface.

    mongeampere solve --config run.cfg
    mongeampere bench --table 1 --out table1.csv
    mongeampere verify --level fast

Exit codes: 0 success, 1 config error, 2 solver failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import enum
import io
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .export import EXTENSIONS, export_field, read_field
from .mesh import MeshFormatError, MeshValidationError, generate_disk_mesh, load_mesh
from .optimizer import BetaRule, OptimizerConfig
from .problems import builtin_problem, custom_problem
from .runner import BENCH_G0, BENCH_H, run_bench, solve
from .verify import run_checks

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3

logger = logging.getLogger("mongeampere")


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _prepare(cfg: RunConfig):
    """Mesh, problem and interior initial guess; raises ConfigError on bad input."""
    if cfg.mesh is not None:
        try:
            mesh = load_mesh(Path(cfg.mesh).read_text())
        except OSError as exc:
            raise ConfigError("mesh", f"cannot read {cfg.mesh}: {exc.strerror}") from None
        except (MeshFormatError, MeshValidationError) as exc:
            raise ConfigError("mesh", str(exc)) from None
    else:
        mesh = generate_disk_mesh(cfg.h)

    if cfg.problem == "custom":
        try:
            problem = custom_problem(cfg.f, cfg.exact_u,
                                     domain="mesh-file" if cfg.mesh else "unit-disk")
        except (SyntaxError, ValueError) as exc:
            raise ConfigError("f", str(exc)) from None
    else:
        problem = builtin_problem(cfg.problem)

    if isinstance(cfg.g0, Path):
        try:
            _, values = read_field(cfg.g0)
        except (OSError, ValueError) as exc:
            raise ConfigError("g0", f"cannot read field file {cfg.g0}: {exc}") from None
        if values.shape != (mesh.n_vertices,):
            raise ConfigError("g0", f"field file has {len(values)} values, mesh has {mesh.n_vertices} vertices")
        g0 = mesh.restrict(values)
    else:
        g0 = np.full(mesh.n_interior, cfg.g0)
    if cfg.optimizer.project_nonnegative and (g0 < 0).any():
        raise ConfigError("g0", "must be >= 0 when project_nonnegative is on")
    try:
        problem.nodal_f(mesh)
    except ValueError as exc:
        raise ConfigError("f" if cfg.problem == "custom" else "problem", str(exc)) from None
    return mesh, problem, g0


def cmd_solve(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        mesh, problem, g0 = _prepare(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    result = solve(problem, mesh, g0, cfg.optimizer)
    report = result.report
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    with open(out_dir / "trace.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "J", "grad_norm", "alpha", "beta", "backtracks"])
        for r in report.records:
            writer.writerow([r.k, repr(r.J), repr(r.grad_norm), repr(r.alpha), repr(r.beta), r.backtracks])

    g_full = mesh.extend(report.g)
    for fmt in cfg.export_formats:
        export_field(mesh, report.u, fmt, out_dir / f"u{EXTENSIONS[fmt]}", name="u")
        export_field(mesh, g_full, fmt, out_dir / f"g{EXTENSIONS[fmt]}", name="g")

    summary = {
        "problem": problem.name,
        "domain": problem.domain,
        "h": mesh.h,
        "n_vertices": mesh.n_vertices,
        "n_interior": mesh.n_interior,
        "min_angle_deg": mesh.min_angle(),
        "optimizer": _jsonable(cfg.optimizer),
        "termination": report.termination.value,
        "message": report.message,
        "iterations": report.iterations,
        "J": report.J,
        "grad_norm": report.records[-1].grad_norm,
        "l2_error": result.l2_error,
        "u_min": float(report.u.min()),
        "g_min": float(report.g.min()),
        "g_max": float(report.g.max()),
        "wall_time_s": report.wall_time,
    }
    (out_dir / "report.json").write_text(json.dumps(_jsonable(summary), indent=2) + "\n")

    err = "n/a" if result.l2_error is None else f"{result.l2_error:.4e}"
    print(f"{report.termination.value}: {report.iterations} iterations, J = {report.J:.3e}, "
          f"L2 error = {err}, outputs in {out_dir}", file=out)
    return EXIT_OK if report.converged else EXIT_SOLVER


def _parse_list(text, kind=float):
    return tuple(kind(Fraction(v)) if "/" in v else kind(v) for v in text.split(","))


def cmd_bench(table: int, out_path, hs=BENCH_H, g0s=BENCH_G0, config=OptimizerConfig(), jobs=1,
              out=None) -> int:
    out = out or sys.stdout
    rows = run_bench(table, hs, g0s, config, jobs)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["h", "g0", "l2_error", "iterations", "termination"])
    writer.writerows([repr(r.h), repr(r.g0), repr(r.l2_error), r.iterations, r.termination] for r in rows)
    text = buf.getvalue()
    if out_path is None or str(out_path) == "-":
        out.write(text)
    else:
        Path(out_path).write_text(text)
        for r in rows:
            print(f"h=1/{round(1 / r.h)} g0={r.g0:g}: error {r.l2_error:.4e}, "
                  f"{r.iterations} iterations, {r.termination}", file=out)
    return EXIT_SOLVER if any(r.termination.startswith("error") for r in rows) else EXIT_OK


def cmd_verify(level: str, gradient_fn=None, out=None) -> int:
    out = out or sys.stdout
    results = run_checks(level, gradient_fn=gradient_fn)
    for res in results:
        print(res.line(), file=out)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed", file=out)
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mongeampere",
        description="Least-squares / conjugate-gradient solver for det D^2 u = f, u = 0 on the boundary.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv per-iteration debug")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solve from a key = value config file")
    p.add_argument("--config", required=True, type=Path)

    p = sub.add_parser("bench", help="error table over h x g0 for a benchmark problem")
    p.add_argument("--table", required=True, type=int, choices=(1, 2, 3))
    p.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    p.add_argument("--h", default=None, help="comma list of mesh sizes (default 1/32,1/64,1/128)")
    p.add_argument("--g0", default=None, help="comma list of constant initial shifts (default 0.1,0.2,0.3)")
    p.add_argument("--beta-rule", default="prp", choices=[b.value for b in BetaRule])
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("verify", help="run the self-check suites")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "solve":
        try:
            cfg = load_config(args.config)
        except OSError as exc:
            print(f"config error: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
            return EXIT_CONFIG
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return cmd_solve(cfg)
    if args.command == "bench":
        try:
            hs = _parse_list(args.h) if args.h else BENCH_H
            g0s = _parse_list(args.g0) if args.g0 else BENCH_G0
            config = OptimizerConfig(beta_rule=args.beta_rule, max_iters=args.max_iters)
        except (ValueError, ZeroDivisionError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return cmd_bench(args.table, args.out, hs, g0s, config, args.jobs)
    return cmd_verify(args.level)


if __name__ == "__main__":
    sys.exit(main())
