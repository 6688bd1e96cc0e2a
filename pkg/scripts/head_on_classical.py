"""Separation trace of classical APF on the axis-aligned head-on pair.

Shows the two robots closing at full speed and stepping past each other
inside the repulsion range instead of settling at a force balance.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from faca.engine import run
from faca.scenarios import load_scenario


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--eta-r", type=float, default=None, help="override eta_R")
    args = ap.parse_args(argv)
    sc = load_scenario("head_on.json", seed=args.seed)
    sc = replace(sc, planner="classical_apf")
    if args.eta_r is not None:
        sc = replace(sc, apf=replace(sc.apf, eta_R=args.eta_r))
    log = run(sc)
    print("t\tseparation")
    prev = None
    for snap in log.snapshots:
        a, b = snap.states[:2]
        d = ((a.x - b.x) ** 2 + (a.y - b.y) ** 2) ** 0.5
        if d < sc.apf.sigma + 5 or (prev is not None and prev < sc.apf.sigma + 5):
            print(f"{snap.t:.2f}\t{d:.3f}")
        prev = d
    print(f"arrivals: {log.arrivals}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
