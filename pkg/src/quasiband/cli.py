"""Command line front end.

Subcommands map one-to-one onto the harness pipelines:

* ``bands``     band structure and dispersion-top diagnostics
* ``count``     window counts for one instance, no bounds
* ``verify``    one instance with bounds and verdicts
* ``sweep``     frequency x amplitude grid of verify instances
* ``bargmann``  seeded random half-line counting suite
* ``calibrate`` empirical counting-constant ratios

Exit codes: 0 success, 2 at least one verdict violation, 3 configuration
error, 4 numerical failure (factorization or eigensolve gave up).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .errors import ConfigError, EigensolveError, FactorizationError
from .harness import (
    _BUILTIN_GRAPHS,
    ExperimentConfig,
    bands_entry,
    load_config,
    run_bands,
    run_bargmann,
    run_calibrate,
    run_sweep,
    run_verify,
    write_outputs,
    write_report_json,
    _base_report,
)
from .lattice import load_graph

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_CONFIG = 3
EXIT_NUMERICAL = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad arguments, which collides with the
    # violation exit code; route usage errors through ConfigError instead.
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="quasiband",
                     description="eigenvalue counting for periodically "
                                 "driven lattice operators")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bands = sub.add_parser(
        "bands", help="band structure and dispersion-top report")
    p_bands.add_argument(
        "graph",
        help="builtin name (z1..z4, honeycomb), a graph JSON file, or a "
             "config with mode='bands'")
    p_bands.add_argument("--grid", type=int, default=None,
                         help="quasimomentum grid points per dimension")
    p_bands.add_argument("--out", default=None, help="write report JSON here")

    for name, helptext in (
        ("count", "window counts for one instance (no bounds)"),
        ("verify", "bounds and verdicts for one instance"),
        ("sweep", "verify over a frequency x amplitude grid"),
        ("bargmann", "random half-line counting suite"),
        ("calibrate", "empirical counting-constant calibration"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="TOML or JSON config")
        p.add_argument("--json", default=None, help="report JSON path")
        p.add_argument("--csv", default=None, help="report CSV path")
        if name == "verify":
            p.add_argument(
                "--bound", action="append", default=None,
                choices=["T1", "T2", "T3", "cor42", "cor43", "cor44"],
                help="override the config's bound variants (repeatable)")
        if name == "sweep":
            p.add_argument("--workers", type=int, default=None,
                           help="thread count (default: config, then "
                                "QUASIBAND_WORKERS, then cpu count)")
    return parser


def _print_verdicts(report: dict) -> None:
    for rec in report.get("instances", ()):
        if "error" in rec:
            print(f"instance {rec['index']}: ERROR {rec['error']}")
            continue
        for v in rec.get("verdicts", ()):
            if v["satisfied"] is None:
                tag = f"not applicable ({v['status']})"
            elif v["satisfied"]:
                tag = "satisfied"
            else:
                tag = "VIOLATED"
            print(
                f"instance {rec['index']} [{v['bound_id']}] "
                f"window={v['window_name']} count={v['count_filtered']} "
                f"bound={v['scaled_value']:.6g} -> {tag}"
            )


def _finish(report: dict, cfg: ExperimentConfig | None, args) -> int:
    written = write_outputs(
        report, cfg, getattr(args, "json", None), getattr(args, "csv", None)
    ) if cfg is not None else []
    for path in written:
        print(f"wrote {path}")
    summary = report.get("summary", {})
    n_viol = summary.get("n_violations", 0)
    if "n_violations" in summary:
        parts = [
            f"{summary.get('n_instances', 0)} instance(s)",
            f"{n_viol} violation(s)",
        ]
        if "n_unconverged" in summary:
            parts.append(f"{summary['n_unconverged']} unconverged")
        print(f"{report['kind']}: " + ", ".join(parts))
    return EXIT_VIOLATION if n_viol else EXIT_OK


def _cmd_bands(args) -> int:
    target = args.graph
    path = Path(target)
    cfg = None
    if target in _BUILTIN_GRAPHS:
        entry = bands_entry(target, _BUILTIN_GRAPHS[target](), args.grid)
        report = _base_report("bands", None)
        report["entries"] = [entry]
    elif path.suffix == ".toml":
        cfg = load_config(path)
        report = run_bands(cfg)
    elif path.suffix == ".json":
        if not path.exists():
            raise ConfigError(f"no such file: {path}")
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        if isinstance(payload, dict) and "mode" in payload:
            cfg = load_config(path)
            report = run_bands(cfg)
        else:
            entry = bands_entry(str(path), load_graph(path), args.grid)
            report = _base_report("bands", None)
            report["entries"] = [entry]
    else:
        raise ConfigError(
            f"{target!r} is not a builtin graph, a graph JSON, or a config"
        )
    for entry in report["entries"]:
        flat = "".join("F" if f else "." for f in entry["flat"])
        reg = entry["regular_top"]
        reg_txt = "regular" if reg else ("irregular" if reg is False
                                         else "inconclusive")
        print(
            f"{entry['graph']}: dim={entry['dim']} bands={entry['n_vertices']}"
            f" s_top={entry['s_top']:.12g} flat=[{flat}] top={reg_txt}"
        )
        if entry["diagnostic"]:
            print(f"  note: {entry['diagnostic']}")
    if cfg is not None:
        for written in write_outputs(report, cfg, json_override=args.out):
            print(f"wrote {written}")
    elif args.out:
        write_report_json(report, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "bands":
            return _cmd_bands(args)
        cfg = load_config(args.config)
        if args.command == "count":
            return _finish(run_verify(cfg, with_bounds=False), cfg, args)
        if args.command == "verify":
            if args.bound:
                variants = tuple(dict.fromkeys(args.bound))
                if any(v in ("T2", "cor43") for v in variants) \
                        and cfg.coupling_c is None:
                    raise ConfigError(
                        "variants T2/cor43 need bounds.coupling_c"
                    )
                cfg = dataclasses.replace(cfg, bound_variants=variants)
            report = run_verify(cfg)
            _print_verdicts(report)
            return _finish(report, cfg, args)
        if args.command == "sweep":
            report = run_sweep(cfg, workers=args.workers)
            _print_verdicts(report)
            return _finish(report, cfg, args)
        if args.command == "bargmann":
            report = run_bargmann(cfg)
            return _finish(report, cfg, args)
        if args.command == "calibrate":
            report = run_calibrate(cfg)
            summary = report["summary"]
            print(
                f"calibrate: empirical ratio {summary['empirical_ratio']:.6g}"
                f" per-radius {summary['per_radius']}"
                f" stable={summary['stable_5pct']}"
            )
            return _finish(report, cfg, args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FactorizationError, EigensolveError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
