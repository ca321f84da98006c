"""Command-line front end: ``psalink {capacity,sweep,optimize,validate}``.

Exit codes: 0 success, 2 usage or config error, 3 infeasible plan,
4 validation failure.
"""
from __future__ import annotations

import argparse
import contextlib
import datetime as _dt
import json
import os
import platform
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, config, kernels, records, validation
from .errors import ConfigError, DomainError, InfeasibleError, NumericalFailure
from .optimize import OptimizationProblem, optimize

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_VALIDATION = 4
THREADS_ENV = "PSALINK_THREADS"


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"expected a positive integer, got {raw!r}", THREADS_ENV) from None
    if n < 1:
        raise ConfigError(f"expected a positive integer, got {raw!r}", THREADS_ENV)
    return n


def _metadata(args, cfg: config.LoadedConfig | None) -> list[str]:
    if args.no_metadata:
        return []
    lines = [f"psalink {__version__}", f"python {platform.python_version()}", f"numpy {np.__version__}",
             f"kernel_backend {kernels.BACKEND}"]
    if cfg is not None:
        lines.append(f"config_sha256 {cfg.digest}")
    lines.append("amplifier_positions equal spacing unless the config says otherwise")
    if not args.no_timestamp:
        stamp = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
        lines.append(f"generated {stamp}")
    return lines


def _meta_dict(lines: list[str]) -> dict:
    return dict(ln.split(" ", 1) for ln in lines)


@contextlib.contextmanager
def _open_output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _emit_records(args, cfg, recs, single: bool) -> None:
    meta = _metadata(args, cfg)
    with _open_output(args.output) as out:
        if args.format == "csv":
            records.write_csv(out, recs, meta, timings=args.timings)
        elif args.format == "json":
            records.write_json(out, recs, _meta_dict(meta), timings=args.timings, single=single)
        else:
            records.write_table(out, recs, timings=args.timings)


def cmd_capacity(args) -> int:
    cfg = config.load(args.config)
    spec = config.point_spec(cfg)
    rec = records.evaluate(spec)
    _emit_records(args, cfg, [rec], single=True)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = config.load(args.config)
    sweep = config.sweep_config(cfg)
    points = sweep.points()
    threads = args.threads or _default_threads()
    if threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(threads) as ex:
            recs = list(ex.map(records.evaluate, points))  # map keeps input order
    else:
        recs = [records.evaluate(p) for p in points]
    _emit_records(args, cfg, recs, single=False)
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = config.load(args.config)
    spec = config.point_spec(cfg)
    if spec.plan_positions is not None or spec.count == config.CONTINUOUS:
        raise ConfigError("optimize needs an integer amplifier count, not a plan", "amplifiers.count")
    res = optimize(OptimizationProblem(spec.alpha, spec.length, spec.count, spec.nbar, spec.regime,
                                       spec.objective, spec.positions))
    meta = _metadata(args, cfg)
    summary = {"capacity": res.capacity, "feasibility_margin": res.feasibility_margin,
               "iterations": res.iterations, "converged": res.converged, "regime": spec.regime,
               "objective": spec.objective, "positions": spec.positions}
    with _open_output(args.output) as out:
        if args.format == "json":
            doc = dict(summary, amp_positions_km=list(res.plan.amp_positions),
                       amp_gains=list(res.plan.amp_gains))
            if meta:
                doc["metadata"] = _meta_dict(meta)
            json.dump(doc, out, indent=2)
            out.write("\n")
        elif args.format == "csv":
            for ln in meta:
                out.write(f"# {ln}\n")
            for k, v in summary.items():
                out.write(f"# {k} {records._cell(v)}\n")
            out.write("index,position_km,gain\n")
            for i, (p, g) in enumerate(zip(res.plan.amp_positions, res.plan.amp_gains)):
                out.write(f"{i},{records._cell(p)},{records._cell(g)}\n")
        else:
            for k, v in summary.items():
                out.write(f"{k:>20}: {v}\n")
            out.write(f"{'index':>6}  {'position_km':>14}  {'gain':>14}\n")
            for i, (p, g) in enumerate(zip(res.plan.amp_positions, res.plan.amp_gains)):
                out.write(f"{i:>6}  {p:>14.6f}  {g:>14.8g}\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = config.load(args.config) if args.config else None
    tol = config.validate_tolerances(cfg)
    rep = validation.run(tol)
    with _open_output(args.output) as out:
        if args.format == "json":
            doc = {"passed": rep.ok,
                   "checks": [c.__dict__ for c in rep.checks],
                   "diagnostics": rep.diagnostics}
            json.dump(doc, out, indent=2)
            out.write("\n")
        else:
            for c in rep.checks:
                status = "PASS" if c.passed else "FAIL"
                out.write(f"{status}  {c.name:<24} {c.detail}: {c.measured:.3e} (tolerance {c.tolerance:.3e})\n")
            d = rep.diagnostics
            out.write("info  fiducial parameters, matrix form vs inline shortcut:\n")
            for key in ("tau", "y", "omega"):
                out.write(f"      {key:<6} matrix {d[key + '_matrix']:.10g}  inline {d[key + '_inline']:.10g}\n")
    return EXIT_OK if rep.ok else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file")
    common.add_argument("--format", choices=("table", "csv", "json"), default="table")
    common.add_argument("--output", help="write here instead of standard output")
    common.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or 1)")
    common.add_argument("--no-metadata", action="store_true", help="omit metadata comment lines")
    common.add_argument("--no-timestamp", action="store_true", help="omit only the generation timestamp")
    common.add_argument("--timings", action="store_true", help="add per-record evaluation time")

    p = argparse.ArgumentParser(prog="psalink", description="Capacities of phase-sensitive amplified links.")
    p.add_argument("--version", action="version", version=f"psalink {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (
        ("capacity", cmd_capacity, "capacities of one link"),
        ("sweep", cmd_sweep, "capacities over a grid of lengths"),
        ("optimize", cmd_optimize, "optimised amplifier plan"),
        ("validate", cmd_validate, "run the cross-oracle checks"),
    ):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "validate" and not args.config:
        parser.error(f"{args.command} requires --config")
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except ConfigError as exc:
        where = f" [{exc.field}]" if exc.field else ""
        print(f"psalink: config error{where}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"psalink: infeasible: {exc} (margin {exc.margin})", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DomainError, NumericalFailure) as exc:
        print(f"psalink: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
