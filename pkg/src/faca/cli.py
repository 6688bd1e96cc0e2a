"""Command line entry point: ``faca run|batch|compare|render``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from faca.batch import LlmSettings, RunConfig, compare, format_table, parse_seeds, run_batch
from faca.engine import NEGOTIATORS, PLANNERS

log = logging.getLogger("faca")


def _common(p: argparse.ArgumentParser, seeds_default: str):
    p.add_argument("--scenario", required=True,
                   help="scenario JSON path or a bundled name such as circle_n4.json")
    p.add_argument("--negotiator", choices=NEGOTIATORS, default=None)
    p.add_argument("--seeds", default=seeds_default,
                   help='count ("100"), inclusive range ("3-7") or list ("1,4,9")')
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--llm-url", default=None)
    p.add_argument("--llm-model", default="gpt-4o-mini")
    p.add_argument("--llm-timeout-ms", type=int, default=30000)
    p.add_argument("--llm-max-rounds", type=int, default=6)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="faca", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="one seed; writes a log and an SVG")
    _common(p, "0")  # --seeds N runs seed N
    p.add_argument("--planner", choices=PLANNERS, default=None)

    p = sub.add_parser("batch", help="many seeds; per-seed logs plus aggregate.json")
    _common(p, "100")
    p.add_argument("--planner", choices=PLANNERS, default=None)

    p = sub.add_parser("compare", help="one batch per planner; writes a comparison table")
    _common(p, "100")
    p.add_argument("--planner", dest="planners", action="append", choices=PLANNERS,
                   help="repeat for each planner (default: all)")

    p = sub.add_parser("render", help="SVG from a stored log directory")
    p.add_argument("log_dir")
    p.add_argument("--out", default=None, help="SVG path (default: <log_dir>/trajectories.svg)")
    return ap


def _config(args, planner: Optional[str]) -> RunConfig:
    if args.cmd == "run":
        # a bare number names the seed itself here, not a count
        s = args.seeds.strip()
        seeds = (int(s),) if s.isdigit() else parse_seeds(s)[:1]
    else:
        seeds = parse_seeds(args.seeds)
    return RunConfig(
        scenario=args.scenario, seeds=seeds, out_dir=args.out,
        planner=planner, negotiator=args.negotiator, jobs=args.jobs,
        llm=LlmSettings(args.llm_url, args.llm_model, args.llm_timeout_ms, args.llm_max_rounds))


def _print_agg(agg: dict):
    print(json.dumps(agg, indent=2, sort_keys=True))


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.cmd == "render":
            from faca.logio import read_log
            from faca.render import emit_svg
            out = args.out or str(Path(args.log_dir) / "trajectories.svg")
            emit_svg(read_log(args.log_dir), out)
            print(out)
            return 0
        if args.cmd == "compare":
            rows, errored = compare(_config(args, None), args.planners or list(PLANNERS))
            sys.stdout.write(format_table(rows))
            return 1 if errored else 0
        cfg = _config(args, args.planner)
        agg, results = run_batch(cfg)
        for r in results:
            if r["error"] is not None:
                log.error("seed %d: %s", r["seed"], r["error"])
        if args.cmd == "run":
            res = results[0]
            if cfg.out_dir is not None and res["report"] is not None:
                from faca.logio import read_log
                from faca.render import emit_svg
                d = Path(cfg.out_dir) / f"seed_{res['seed']:04d}"
                emit_svg(read_log(d), d / "trajectories.svg")
            print(json.dumps(res["report"], indent=2, sort_keys=True))
        else:
            _print_agg(agg)
        return 1 if agg["n_errors"] else 0
    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
