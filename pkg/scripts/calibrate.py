"""One-parameter sweeps of the FACA field settings.

Usage: python scripts/calibrate.py --param guard_distance --values 0,0.25,0.5 \
           [--scenario gap_n8.json] [--seeds 20]

Prints mean TTG, FR, the worst pairwise separation and the number of runs
that dropped below the safe distance, for each value.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace

import numpy as np

from faca.batch import parse_seeds
from faca.engine import run
from faca.fields import FieldParams
from faca.metrics import report
from faca.scenarios import load_scenario


def sweep(scenario: str, param: str, values, seeds):
    for v in values:
        reps = []
        for s in seeds:
            sc = load_scenario(scenario, seed=s)
            sc = replace(sc, planner="faca", fields=replace(sc.fields, **{param: v}))
            reps.append(report(run(sc)))
        seps = [r.min_separation for r in reps]
        yield {
            "value": v,
            "ttg": float(np.mean([r.ttg_mean for r in reps])),
            "fr": float(np.mean([r.flow_rate for r in reps])),
            "min_sep": float(min(seps)),
            "unsafe": sum(d < sc.safe_distance for d in seps),
            "timeouts": sum(bool(r.timeout_ids) for r in reps),
        }


def main(argv=None) -> int:
    names = [f.name for f in fields(FieldParams) if f.type in ("float", float)]
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--param", required=True, choices=names)
    ap.add_argument("--values", required=True, help="comma-separated floats")
    ap.add_argument("--scenario", default="gap_n8.json")
    ap.add_argument("--seeds", default="20")
    args = ap.parse_args(argv)
    values = [float(x) for x in args.values.split(",")]
    print(f"{args.scenario}: sweep {args.param}")
    print("value\tTTG\tFR\tmin_sep\tunsafe\ttimeouts")
    for row in sweep(args.scenario, args.param, values, parse_seeds(args.seeds)):
        print(f"{row['value']:g}\t{row['ttg']:.3f}\t{row['fr']:.3f}\t{row['min_sep']:.3f}\t"
              f"{row['unsafe']}\t{row['timeouts']}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
