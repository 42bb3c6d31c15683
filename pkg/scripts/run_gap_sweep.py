"""Run the half-line gap sweep and print a compact slack table.

Thin wrapper over the sweep pipeline for interactive use; the CLI
(`quasiband sweep --config configs/gap-1d.toml`) emits the full report.
"""

import argparse
from pathlib import Path

from quasiband import load_config, run_sweep, write_report_json


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="configs/gap-1d.toml")
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", default=None, help="report JSON path")
    args = ap.parse_args()

    cfg = load_config(args.config)
    report = run_sweep(cfg, workers=args.workers)

    print(f"{'omega':>7} {'ampl':>6} {'window':>12} {'count':>5} "
          f"{'bound':>12} {'slack':>12} {'conv':>5}")
    for rec in report["instances"]:
        if "error" in rec:
            print(f"instance {rec['index']}: ERROR {rec['error']}")
            continue
        conv = rec["convergence"]["converged"] if rec["convergence"] else "-"
        for v in rec["verdicts"]:
            slack = "-" if v["slack"] is None else f"{v['slack']:12.4g}"
            print(f"{rec['omega']:7.3f} {rec['amplitude']:6.3f} "
                  f"{v['window_name']:>12} {v['count_filtered']:5d} "
                  f"{v['scaled_value']:12.4g} {slack:>12} {str(conv):>5}")
    summary = report["summary"]
    print(f"\n{summary['n_instances']} instances, "
          f"{summary['n_violations']} violations, "
          f"{summary['n_unconverged']} unconverged")
    if args.out:
        write_report_json(report, Path(args.out))
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
