"""Comparison tables over the bundled circle and gap scenarios.

Usage: python scripts/reproduce_tables.py [--seeds 100] [--out results/tables]

One block per scenario; rows are planner x negotiator mode, columns are mean
TTG, MMD and FR over the seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from faca.batch import RunConfig, parse_seeds, run_batch

SCENARIOS = ("circle_n4.json", "circle_n8.json", "gap_n4.json", "gap_n8.json")
ROWS = (("faca", "scripted"), ("faca", "none"), ("classical_apf", "none"), ("mpc", "none"))


def _m(stat):
    return "-" if stat is None else f"{stat['mean']:.3f}"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", default="100")
    ap.add_argument("--out", default=None, help="write tables.json here")
    args = ap.parse_args(argv)
    seeds = parse_seeds(args.seeds)
    table = {}
    for scen in SCENARIOS:
        print(f"\n{scen}  ({len(seeds)} seeds)")
        print("planner\tnegotiator\tTTG\tMMD\tFR\ttimeouts\terrors")
        for planner, neg in ROWS:
            agg, _ = run_batch(RunConfig(scen, seeds, planner=planner, negotiator=neg))
            table[f"{scen}/{planner}/{neg}"] = agg
            print(f"{planner}\t{neg}\t{_m(agg['ttg_mean'])}\t{_m(agg['mmd_robot'])}\t"
                  f"{_m(agg['flow_rate'])}\t{agg['n_timeouts']}\t{agg['n_errors']}", flush=True)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "tables.json").write_text(json.dumps(table, indent=2, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
