"""Evaluation metrics computed from a trajectory log alone."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Optional

from faca.engine import TrajectoryLog
from faca.fields import WallGap

PRIORITY_TIE = 1e-6


class TooFewRobots(ValueError):
    pass


class ZeroMakespan(ValueError):
    pass


class Incomplete(ValueError):
    """Fairness is undefined while some robot never arrived."""


@dataclass
class MetricsReport:
    ttg_per_robot: dict[str, float]
    ttg_mean: float
    mmd_robot: Optional[float]
    mmd_obstacle: Optional[float]
    flow_rate: Optional[float]
    fairness_match: Optional[bool]
    timeout_ids: list[str] = field(default_factory=list)
    min_separation: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def ttg(log: TrajectoryLog) -> tuple[dict[str, float], float]:
    """Arrival time per robot (``max_time`` for robots that never arrived) and the mean."""
    max_t = log.scenario.max_time
    per = {k: (max_t if log.arrivals.get(k) is None else log.arrivals[k]) for k in log.robot_ids}
    return per, sum(per.values()) / len(per)


def _is_active(log: TrajectoryLog, rid: str, t: float) -> bool:
    a = log.arrivals.get(rid)
    return a is None or t < a


def mmd(log: TrajectoryLog) -> float:
    """Time-average of the smallest pairwise separation among unarrived robots."""
    if len(log.robot_ids) < 2:
        raise TooFewRobots("MMD needs at least two robots")
    total, count = 0.0, 0
    for snap in log.snapshots:
        pts = [(s.x, s.y) for s in snap.states if _is_active(log, s.id, snap.t)]
        if len(pts) < 2:
            continue
        total += min(math.hypot(a[0] - b[0], a[1] - b[1]) for a, b in combinations(pts, 2))
        count += 1
    if count == 0:
        raise TooFewRobots("no timestep with two active robots")
    return total / count


def min_separation(log: TrajectoryLog) -> float:
    """Smallest robot-robot distance over the run (arrived robots excluded)."""
    best = math.inf
    for snap in log.snapshots:
        pts = [(s.x, s.y) for s in snap.states if _is_active(log, s.id, snap.t)]
        for a, b in combinations(pts, 2):
            best = min(best, math.hypot(a[0] - b[0], a[1] - b[1]))
    return best


def mmd_obstacle(log: TrajectoryLog) -> Optional[float]:
    obstacles = log.scenario.obstacles
    if not obstacles:
        return None
    total, count = 0.0, 0
    for snap in log.snapshots:
        dists = [math.hypot(s.x - o.center.x, s.y - o.center.y) - o.radius
                 for s in snap.states if _is_active(log, s.id, snap.t) for o in obstacles]
        if dists:
            total += min(dists)
            count += 1
    return total / count if count else None


def crossed_wall(log: TrajectoryLog, gap: WallGap) -> list[str]:
    first, last = log.snapshots[0].by_id(), log.snapshots[-1].by_id()
    out = []
    for rid in log.robot_ids:
        s0 = first[rid].x - gap.wall_x
        s1 = last[rid].x - gap.wall_x
        if s0 * s1 < 0:
            out.append(rid)
    return out


def flow_rate(log: TrajectoryLog, gap: Optional[WallGap] = None) -> float:
    """N / (z T): wall crossers per metre of gap width per second of makespan."""
    gap = log.scenario.gap if gap is None else gap
    if gap is None:
        raise ValueError("flow rate needs a wall gap")
    per, _ = ttg(log)
    makespan = max(per.values())
    if not makespan > 0:
        raise ZeroMakespan("makespan is zero")
    return len(crossed_wall(log, gap)) / (gap.gap_width * makespan)


def fairness_match(log: TrajectoryLog) -> bool:
    """True when no robot with a strictly higher final priority arrived later
    than a lower-priority one. Equal priorities (within 1e-6) or equal arrival
    times may come in either order."""
    if log.timeout_ids:
        raise Incomplete(f"robots never arrived: {log.timeout_ids}")
    rho = log.final_priorities
    arr = log.arrivals
    for a, b in combinations(log.robot_ids, 2):
        if abs(rho[a] - rho[b]) <= PRIORITY_TIE:
            continue
        hi, lo = (a, b) if rho[a] > rho[b] else (b, a)
        if arr[hi] > arr[lo]:
            return False
    return True


def report(log: TrajectoryLog) -> MetricsReport:
    per, mean = ttg(log)
    multi = len(log.robot_ids) >= 2
    fair = None if log.timeout_ids else fairness_match(log)
    return MetricsReport(
        ttg_per_robot=per,
        ttg_mean=mean,
        mmd_robot=mmd(log) if multi else None,
        mmd_obstacle=mmd_obstacle(log),
        flow_rate=flow_rate(log) if log.scenario.gap is not None else None,
        fairness_match=fair,
        timeout_ids=log.timeout_ids,
        min_separation=min_separation(log) if multi else None,
    )
