"""Runs over many seeds, their aggregate statistics, and planner comparisons."""

from __future__ import annotations

import json
import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from faca.engine import NEGOTIATORS, PLANNERS, Scenario, run
from faca.logio import write_log
from faca.metrics import report
from faca.scenarios import load_scenario

AGG_FIELDS = ("ttg_mean", "mmd_robot", "mmd_obstacle", "flow_rate", "min_separation")


@dataclass(frozen=True)
class LlmSettings:
    url: Optional[str] = None
    model: str = "gpt-4o-mini"
    timeout_ms: int = 30000
    max_rounds: int = 6


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    seeds: tuple[int, ...]
    out_dir: Optional[str] = None
    planner: Optional[str] = None  # None keeps the scenario file's choice
    negotiator: Optional[str] = None
    llm: LlmSettings = field(default_factory=LlmSettings)
    jobs: int = 1

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seed list must not be empty")
        if self.planner is not None and self.planner not in PLANNERS:
            raise ValueError(f"planner must be one of {PLANNERS}, got {self.planner!r}")
        if self.negotiator is not None and self.negotiator not in NEGOTIATORS:
            raise ValueError(f"negotiator must be one of {NEGOTIATORS}, got {self.negotiator!r}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"5"`` is seeds 0..4, ``"3-7"`` is 3..7 inclusive, ``"1,4,9"`` is a list."""
    text = text.strip()
    if "," in text:
        return tuple(int(s) for s in text.split(",") if s.strip())
    if "-" in text[1:]:
        a, b = text.split("-", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise ValueError(f"empty seed range {text!r}")
        return tuple(range(lo, hi + 1))
    n = int(text)
    if n < 1:
        raise ValueError("seed count must be >= 1")
    return tuple(range(n))


def scenario_for(config: RunConfig, seed: int) -> Scenario:
    sc = load_scenario(config.scenario, seed=seed)
    changes = {}
    if config.planner is not None:
        changes["planner"] = config.planner
    if config.negotiator is not None:
        changes["negotiator"] = config.negotiator
    return replace(sc, **changes).validate() if changes else sc


def _llm_client(config: RunConfig):
    from faca.chat import HttpChatClient
    if not config.llm.url:
        raise ValueError("negotiator 'llm' needs --llm-url")
    return HttpChatClient(config.llm.url, config.llm.model, config.llm.timeout_ms / 1000.0)


def run_seed(config: RunConfig, seed: int) -> dict:
    """One run; never raises. Returns the report (or the error) as a dict."""
    try:
        sc = scenario_for(config, seed)
        negotiator = None
        if sc.negotiator == "llm":
            from faca.negotiation import LlmNegotiator
            negotiator = LlmNegotiator(_llm_client(config), max_rounds=config.llm.max_rounds)
        log = run(sc, negotiator=negotiator)
        if config.out_dir is not None:
            write_log(log, Path(config.out_dir) / f"seed_{seed:04d}")
        rep = report(log).to_dict()
        return {"seed": seed, "error": log.aborted, "report": rep}
    except Exception as e:  # noqa: BLE001 - a failed seed is recorded, not fatal
        return {"seed": seed, "error": f"{type(e).__name__}: {e}",
                "traceback": traceback.format_exc(), "report": None}


def _stats(values: Sequence[Optional[float]]) -> Optional[dict]:
    xs = [v for v in values if v is not None]
    if not xs:
        return None
    a = np.asarray(xs, dtype=float)
    return {"mean": float(a.mean()), "std": float(a.std()), "n": len(xs)}


def aggregate(results: Sequence[dict]) -> dict:
    reps = [r["report"] for r in results if r["report"] is not None]
    out = {"n_runs": len(results), "n_errors": sum(r["error"] is not None for r in results),
           "n_timeouts": sum(bool(r["timeout_ids"]) for r in reps)}
    for name in AGG_FIELDS:
        out[name] = _stats([r[name] for r in reps])
    fair = [r["fairness_match"] for r in reps if r["fairness_match"] is not None]
    out["fairness_rate"] = (sum(fair) / len(fair)) if fair else None
    return out


def run_batch(config: RunConfig) -> tuple[dict, list[dict]]:
    if config.jobs > 1 and len(config.seeds) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(run_seed, [config] * len(config.seeds), config.seeds))
    else:
        results = [run_seed(config, s) for s in config.seeds]
    agg = aggregate(results)
    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "aggregate.json").write_text(json.dumps(
            {"format_version": 1, "scenario": config.scenario, "planner": config.planner,
             "negotiator": config.negotiator, "seeds": list(config.seeds),
             "aggregate": agg,
             "runs": [{k: v for k, v in r.items() if k != "traceback"} for r in results]},
            indent=2, sort_keys=True) + "\n")
    return agg, results


def _mean(stat: Optional[dict]) -> Optional[float]:
    return None if stat is None else stat["mean"]


def _cell(v: Optional[float]) -> str:
    return "-" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.3f}"


def compare(config: RunConfig, planners: Sequence[str]) -> tuple[list[dict], bool]:
    """One batch per planner. Returns table rows and whether any run errored."""
    if len(planners) < 2:
        raise ValueError("compare needs at least two planners")
    rows, errored = [], False
    for pl in planners:
        sub = replace(config, planner=pl,
                      out_dir=None if config.out_dir is None else str(Path(config.out_dir) / pl))
        agg, _ = run_batch(sub)
        errored |= agg["n_errors"] > 0
        neg = config.negotiator or scenario_for(sub, config.seeds[0]).negotiator
        rows.append({"planner": pl, "negotiator": neg,
                     "ttg": _mean(agg["ttg_mean"]), "mmd": _mean(agg["mmd_robot"]),
                     "fr": _mean(agg["flow_rate"]), "n_runs": agg["n_runs"],
                     "n_errors": agg["n_errors"], "n_timeouts": agg["n_timeouts"]})
    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "comparison.tsv").write_text(format_table(rows))
        (out / "comparison.json").write_text(json.dumps(
            {"format_version": 1, "scenario": config.scenario, "seeds": list(config.seeds),
             "rows": rows}, indent=2, sort_keys=True) + "\n")
    return rows, errored


def format_table(rows: Sequence[dict]) -> str:
    lines = ["planner\tnegotiator\tTTG\tMMD\tFR"]
    for r in rows:
        lines.append("\t".join([r["planner"], r["negotiator"], _cell(r["ttg"]),
                                _cell(r["mmd"]), _cell(r["fr"])]))
    return "\n".join(lines) + "\n"
