#!/usr/bin/env python3
"""Reproduce the synthetic benchmark table (scenario x seed, both methods).

Equivalent to `evenf evaluate --scenario all`, kept as a script so the
table is one command away during calibration work:

    python scripts/run_benchmark.py --out report/
"""

import argparse
import logging

from evenf.evaluate import SCENARIOS, emit_report, merge_reports, run_scenario


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="all",
                    choices=list(SCENARIOS) + ["all"])
    ap.add_argument("--seeds", default="1,2,3")
    ap.add_argument("--duration", type=float, default=120.0)
    ap.add_argument("--out", default="report")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")

    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    names = list(SCENARIOS) if args.scenario == "all" else [args.scenario]
    report = merge_reports(run_scenario(name, seeds, args.duration)
                           for name in names)
    _, summary = emit_report(report, args.out)
    print(summary.read_text())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
