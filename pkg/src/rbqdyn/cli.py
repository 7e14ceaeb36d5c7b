"""Command-line front end: verify / converge / hbar-sweep / cost / report.

Configuration comes from a JSON file (see RunConfig for the schema and the
defaults) with individual overrides via --set key=value; dotted keys reach
nested fields, e.g. --set potential.amplitude=2.  Exit status is 0 iff every
asserted check passed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .harness import (
    RunConfig,
    SweepRow,
    print_check_results,
    run_convergence_sweep,
    run_cost_bench,
    run_hbar_sweep,
    set_config_value,
    verify_suite,
)


def _load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    for item in args.set or []:
        if "=" not in item:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        cfg = set_config_value(cfg, key, value)
    return cfg


def _add_common(p) -> None:
    p.add_argument("--config", help="JSON config file (defaults used when omitted)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config field; repeatable")
    p.add_argument("--out", help="output directory (overrides config output_dir)")


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    results = verify_suite(cfg)
    ok = print_check_results(results)
    outdir = args.out or cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "verify.json"), "w") as fh:
        json.dump(
            [{"name": r.name, "passed": r.passed, "measured": r.measured, "note": r.note}
             for r in results],
            fh, indent=2, default=repr,
        )
        fh.write("\n")
    print("verify:", "all checks passed" if ok else "FAILURES present")
    return 0 if ok else 1


def cmd_converge(args) -> int:
    cfg = _load_config(args)
    result = run_convergence_sweep(cfg)
    outdir = args.out or cfg.output_dir
    result.write(outdir)
    for row in result.rows:
        print(
            f"dt={row.dt:<8g} dist={row.trace_dist:.6f} (se {row.trace_dist_se:.6f})  "
            f"dual_lb={row.wigner_dual_lb:.6f}  bound={row.theorem_rhs:.3f}  "
            f"naive={row.naive_trace_rhs:.3f}"
        )
    print(f"fitted slope: {result.slope:.3f} (stderr {result.slope_stderr:.3f})")
    print(f"outputs in {outdir}/")
    return 0


def cmd_hbar_sweep(args) -> int:
    cfg = _load_config(args)
    result = run_hbar_sweep(cfg)
    outdir = args.out or cfg.output_dir
    result.write(outdir)
    for row in result.rows:
        print(
            f"hbar={row.hbar:<6g} M={row.M:<5d} dist={row.trace_dist:.6f} "
            f"(se {row.trace_dist_se:.6f})  bound={row.theorem_rhs:.3f}  "
            f"naive={row.naive_trace_rhs:.3f}"
        )
    print(f"outputs in {outdir}/")
    return 0


def cmd_cost(args) -> int:
    cfg = _load_config(args)
    report = run_cost_bench(cfg)
    ok = True
    for row in report["counts"]:
        ok = ok and row["ratio_is_exact"]
        print(
            f"N={row['N']}: pairs full={row['pairs_full']} rb={row['pairs_rb']} "
            f"ratio={row['ratio']:.6f} exact={row['ratio_is_exact']} "
            f"build full={row['build_wall_full'] * 1e3:.2f}ms rb={row['build_wall_rb'] * 1e3:.2f}ms"
        )
    print(f"shuffle timing exponent over N<= {report['shuffle_Ns'][-1]}: "
          f"{report['shuffle_exponent']:.3f}")
    outdir = args.out or cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "cost.json"), "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    return 0 if ok else 1


def cmd_report(args) -> int:
    outdir = args.dir
    rows_path = os.path.join(outdir, "rows.csv")
    if not os.path.exists(rows_path):
        raise SystemExit(f"no rows.csv in {outdir}")
    with open(rows_path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    cols = ("dt", "hbar", "M", "trace_dist", "trace_dist_se", "wigner_dual_lb",
            "theorem_rhs", "naive_trace_rhs")
    print("  ".join(f"{c:>14s}" for c in cols))
    for r in rows:
        print("  ".join(f"{float(r[c]):>14.6g}" for c in cols))
    summary_path = os.path.join(outdir, "summary.json")
    if os.path.exists(summary_path):
        with open(summary_path) as fh:
            summary = json.load(fh)
        slope = summary.get("slope")
        if slope is not None and slope == slope:
            print(f"fitted slope: {slope:.3f}")
        ratios = [
            float(r["trace_dist"]) / float(r["theorem_rhs"])
            for r in rows
            if float(r["theorem_rhs"]) > 0
        ]
        if ratios:
            print(f"measured/bound ratio range: [{min(ratios):.3e}, {max(ratios):.3e}]")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rbqdyn",
        description="Random-batch N-body quantum dynamics: verification and sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run every module's invariant checks")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("converge", help="dt-convergence sweep against the full dynamics")
    _add_common(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("hbar-sweep", help="fixed-dt sweep across hbar values")
    _add_common(p)
    p.set_defaults(func=cmd_hbar_sweep)

    p = sub.add_parser("cost", help="pair-count law and shuffle timing benchmark")
    _add_common(p)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("report", help="pretty-print rows.csv from an output directory")
    p.add_argument("dir", help="output directory of a previous run")
    p.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
