"""Command line entry point: ``dmnls <subcommand> [options]``.

Exit codes: 0 success, 1 invalid input or usage, 2 numerical failure
(blow-up guard or resolution abort).
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, config_from_raw, config_to_raw, parse_config
from .experiments import convergence_study, estimate_order, residual_study
from .integrators import BlowUpError, evolve_avg, evolve_dm
from .io import (
    CONVERGENCE_COLUMNS,
    ResultTable,
    RunManifest,
    emit_plot,
    read_manifest,
    read_results,
    write_manifest,
    write_results,
)
from .nonlinearity import make_quadrature
from .spectral import ResolutionError, sample_initial_datum

OUT_DIR_ENV = "DMNLS_OUT_DIR"
SUBCOMMANDS = ("simulate", "average", "converge", "residual", "verify", "plot")
TRAJECTORY_COLUMNS = ("time", "mass", "h1_norm", "averaged_energy", "boundary_amplitude")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI study configuration (built-in cubic study if omitted)")
    common.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or ./results)")
    common.add_argument("--seed", type=int, help="override study.seed")
    common.add_argument("--workers", type=int, help="override study.workers")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="result table format")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a config entry (repeatable)")
    common.add_argument("--epsilons", help="override study.epsilons, comma separated")
    common.add_argument("--no-timings", action="store_true",
                        help="write wall_time_seconds as 0 for byte-reproducible tables")

    parser = _Parser(prog="dmnls", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"dmnls {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="one dispersion-managed run")
    p.add_argument("--epsilon", type=float, help="fast period parameter (default: smallest study eps)")
    sub.add_parser("average", parents=[common], help="one averaged-equation run")
    p = sub.add_parser("converge", parents=[common], help="eps sweep of the averaging error")
    p.add_argument("--plot", action="store_true", help="also write convergence.svg")
    p.add_argument("--no-resolution-check", action="store_true")
    sub.add_parser("residual", parents=[common], help="oscillatory residual decay table")
    p = sub.add_parser("verify", parents=[common], help="structural checks and lemma ensembles")
    p.add_argument("--strict", action="store_true", help="exit 2 if any check fails")
    p = sub.add_parser("plot", parents=[common], help="render a results file as SVG")
    p.add_argument("results", help="CSV or JSON results file")
    p.add_argument("--x", default="epsilon")
    p.add_argument("--y", default="sup_h1_error")
    p.add_argument("--scale", choices=("linear", "loglog"), default="loglog")
    p.add_argument("--out", help="SVG path (default: results file with .svg suffix)")
    return parser


def _config(args):
    overrides = list(args.set)
    if args.seed is not None:
        overrides.append(f"study.seed={args.seed}")
    if args.workers is not None:
        overrides.append(f"study.workers={args.workers}")
    if args.epsilons:
        overrides.append(f"study.epsilons={args.epsilons}")
    return parse_config(args.config, overrides)


def _out_dir(args) -> Path:
    out = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or "results")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _trajectory_table(traj, provenance):
    rows = zip(traj.times, traj.mass, traj.h1_norm, traj.energy, traj.boundary)
    return ResultTable(TRAJECTORY_COLUMNS, rows, provenance)


def run(command: str, cfg, fmt="csv", timings=True, options=None):
    """Execute one subcommand; returns ``(name, table, extra)``."""
    options = options or {}
    from dataclasses import replace

    cfg = replace(cfg, timings=timings)
    if command == "simulate":
        eps = options.get("epsilon") or cfg.epsilons[-1]
        phi = sample_initial_datum(cfg.datum, cfg.grid())
        traj = evolve_dm(phi, cfg.dm_config(eps), cfg.M, samples_per_period=cfg.samples_per_period,
                         quadrature=make_quadrature(cfg.quadrature, cfg.n_r))
        if not traj.completed:
            raise BlowUpError(f"managed run tripped the blow-up guard (last good t={traj.blowup_time})",
                              traj.blowup_time)
        return f"simulate_eps{eps:g}", _trajectory_table(traj, {}), {"epsilon": eps}
    if command == "average":
        phi = sample_initial_datum(cfg.datum, cfg.grid())
        traj = evolve_avg(phi, cfg.avg_config(), cfg.M)
        if not traj.completed:
            raise BlowUpError(f"averaged run tripped the blow-up guard (last good t={traj.blowup_time})",
                              traj.blowup_time)
        return "average", _trajectory_table(traj, {}), {}
    if command == "converge":
        result = convergence_study(cfg, check_resolution=not options.get("no_resolution_check"))
        rows = [(r.epsilon, r.sup_h1_error, r.sup_l2_error, r.mass_drift, r.wall_time_seconds)
                for r in result.records]
        extra = {"reference_error": result.reference_error, "dt_sensitivity": result.dt_sensitivity,
                 "flagged": result.flagged}
        if result.fit is not None:
            extra["order"] = result.fit.slope
            extra["order_residual"] = result.fit.residual
        table = ResultTable(CONVERGENCE_COLUMNS, rows, nullable=("sup_h1_error", "sup_l2_error", "mass_drift"))
        return "convergence", table, extra
    if command == "residual":
        pairs = residual_study(cfg)
        rows, prev = [], None
        for eps, res in pairs:
            rows.append((eps, res, None if prev is None else res / prev))
            prev = res
        extra = {}
        if len(pairs) >= 3:
            extra["order"] = estimate_order(epsilons=[p[0] for p in pairs], errors=[p[1] for p in pairs]).slope
        return "residual", ResultTable(("epsilon", "residual", "ratio_to_previous"), rows,
                                       nullable=("ratio_to_previous",)), extra
    if command == "verify":
        from .verify import structural_checks

        checks, report = structural_checks(cfg.alpha, cfg.d_av, cfg.seed, cfg.trials)
        rows = [(c.name, c.value, c.tolerance, c.passed) for c in checks]
        rows += [(f"lemma ensemble '{k}' refused", None, None, True) for k in report.refused]
        table = ResultTable(("check", "value", "tolerance", "passed"), rows, nullable=("value", "tolerance"))
        extra = {"failed": [c.name for c in checks if not c.passed],
                 "refused": report.refused,
                 "ensemble_max": {k: v.maximum for k, v in report.ratios.items()}}
        return "verify", table, extra
    raise UsageError(f"unknown subcommand {command!r}")


def _emit(args, name, table, extra, cfg, out):
    manifest = RunManifest(args.command, config_to_raw(cfg), cfg.seed, extra=extra)
    table.provenance = {"subcommand": args.command, "manifest": manifest.digest()}
    path = out / f"{name}.{args.format}"
    write_results(table, args.format, path)
    manifest.outputs.append(str(path))
    if getattr(args, "plot", False):
        svg = out / f"{name}.svg"
        emit_plot(table, "epsilon", "sup_h1_error", "loglog", svg)
        manifest.outputs.append(str(svg))
    write_manifest(manifest, out / f"{name}.manifest.json")
    return path


def rerun_manifest(path, fmt="csv"):
    """Recompute the table described by a manifest (timings are zeroed)."""
    manifest = read_manifest(path)
    cfg = config_from_raw(manifest.config)
    options = {"epsilon": manifest.extra.get("epsilon")}
    return run(manifest.subcommand, cfg, fmt, timings=False, options=options)[1]


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage() + "dmnls: error: a subcommand is required")
        out = _out_dir(args)
        if args.command == "plot":
            table = read_results(args.results)
            svg = args.out or str(Path(args.results).with_suffix(".svg"))
            slope = emit_plot(table, args.x, args.y, args.scale, svg)
            print(f"wrote {svg}" + (f" (order ≈ {slope:.2f})" if slope is not None else ""))
            return 0
        cfg = _config(args)
        options = {"epsilon": getattr(args, "epsilon", None),
                   "no_resolution_check": getattr(args, "no_resolution_check", False)}
        name, table, extra = run(args.command, cfg, args.format, not args.no_timings, options)
        path = _emit(args, name, table, extra, cfg, out)
        print(f"wrote {path}")
        if args.command == "converge" and "order" in extra:
            print(f"fitted order {extra['order']:.3f}")
        if args.command == "verify":
            failed = extra["failed"]
            for row in table.rows:
                print(f"{'PASS' if row[3] else 'FAIL'}  {row[0]}: {row[1] if row[1] is not None else '-'}")
            print(f"{len(table.rows) - len(failed)} passed, {len(failed)} failed")
            if failed and args.strict:
                return 2
        return 0
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ConfigError, ValueError, OSError) as exc:
        print(f"dmnls: error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ResolutionError) else 1
    except BlowUpError as exc:
        print(f"dmnls: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
