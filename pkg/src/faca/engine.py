"""Synchronous simulation loop.

Every tick reads one frozen snapshot of the world: priority events are
applied, finished negotiations take effect, new conflicts open negotiations,
each robot plans against the snapshot, and only then do all robots move.
Nothing a robot computes in a tick can see another robot's next state, so the
order in which robots are evaluated has no effect on the outcome.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from faca.baselines import ClassicalApfParams, MpcParams, classical_apf_step, mpc_step
from faca.fields import (CircularObstacle, FieldParams, InsideObstacle, WallGap,
                         faca_step, navigation_target)
from faca.geometry import EPS_NORM, ZERO, Vec2, wrap_angle
from faca.negotiation import (MissionContext, PriorityAssignment, apply_assignment,
                              pair_key)
from faca.prediction import DEFAULT_HORIZON, closest_approach
from faca.state import RobotState

PRIORITY_TIE = 1e-6
PLANNERS = ("faca", "classical_apf", "mpc")
NEGOTIATORS = ("scripted", "llm", "none")


class ValidationError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class SimulationAborted(RuntimeError):
    pass


@dataclass(frozen=True)
class PriorityEvent:
    at_time: float
    new_priorities: Mapping[str, float]

    def __post_init__(self):
        if not self.at_time >= 0:
            raise ValidationError("priority_events.at_time", f"must be >= 0, got {self.at_time}")


@dataclass(frozen=True)
class Scenario:
    robots: tuple[RobotState, ...]
    obstacles: tuple[CircularObstacle, ...] = ()
    gap: Optional[WallGap] = None
    arena_radius: float = 50.0
    dt: float = 0.05
    max_time: float = 30.0
    goal_tolerance: float = 0.5
    safe_distance: float = 1.0
    priority_events: tuple[PriorityEvent, ...] = ()
    planner: str = "faca"
    negotiator: str = "scripted"
    seed: int = 0
    horizon: float = DEFAULT_HORIZON
    cooldown: float = 2.0
    fields: FieldParams = FieldParams()
    apf: ClassicalApfParams = ClassicalApfParams()
    mpc: MpcParams = MpcParams()
    name: str = ""

    def validate(self) -> Scenario:
        if not self.robots:
            raise ValidationError("robots", "at least one robot is required")
        ids = [r.id for r in self.robots]
        if len(set(ids)) != len(ids):
            raise ValidationError("robots", "robot ids must be unique")
        for name in ("dt", "max_time", "arena_radius", "goal_tolerance", "safe_distance",
                     "horizon"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValidationError(name, f"must be a positive number, got {v!r}")
        if self.cooldown < 0:
            raise ValidationError("cooldown", "must be >= 0")
        if self.planner not in PLANNERS:
            raise ValidationError("planner", f"must be one of {PLANNERS}, got {self.planner!r}")
        if self.negotiator not in NEGOTIATORS:
            raise ValidationError("negotiator",
                                  f"must be one of {NEGOTIATORS}, got {self.negotiator!r}")
        for a in range(len(self.robots)):
            for b in range(a + 1, len(self.robots)):
                d = (self.robots[a].position - self.robots[b].position).norm()
                if d < self.safe_distance:
                    raise ValidationError(
                        "robots", f"{ids[a]} and {ids[b]} start {d:.3f} m apart "
                                  f"(< safe_distance {self.safe_distance})")
        for ev in self.priority_events:
            unknown = set(ev.new_priorities) - set(ids)
            if unknown:
                raise ValidationError("priority_events", f"unknown robot ids {sorted(unknown)}")
            if any(not v > 0 for v in ev.new_priorities.values()):
                raise ValidationError("priority_events", "priorities must be > 0")
        return self

    @property
    def n_ticks(self) -> int:
        return int(math.ceil(self.max_time / self.dt - 1e-9))


@dataclass(frozen=True)
class RobotSnap:
    id: str
    x: float
    y: float
    vx: float
    vy: float
    heading: float
    priority: float


@dataclass(frozen=True)
class Snapshot:
    t: float
    states: tuple[RobotSnap, ...]

    def by_id(self) -> dict[str, RobotSnap]:
        return {s.id: s for s in self.states}


@dataclass
class NegotiationRecord:
    pair: tuple[str, str]
    opened_at: float
    resolved_at: Optional[float]
    high: str
    low: str
    new_priorities: dict[str, float]
    fallback: bool = False
    fallback_reason: Optional[str] = None
    transcript: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class TrajectoryLog:
    scenario: Scenario
    digest: str
    snapshots: list[Snapshot]
    arrivals: dict[str, Optional[float]]
    negotiations: list[NegotiationRecord]
    final_priorities: dict[str, float]
    aborted: Optional[str] = None

    @property
    def robot_ids(self) -> list[str]:
        return sorted(r.id for r in self.scenario.robots)

    @property
    def timeout_ids(self) -> list[str]:
        return [k for k in self.robot_ids if self.arrivals.get(k) is None]

    def active_sessions(self, t: float) -> list[tuple[str, str]]:
        return [r.pair for r in self.negotiations
                if r.opened_at <= t and (r.resolved_at is None or t < r.resolved_at)]


@dataclass
class PendingSession:
    pair: tuple[str, str]
    opened_at: float
    due_at: float
    outcome: PriorityAssignment
    session: object = None


@dataclass
class World:
    tick: int
    robots: dict[str, RobotState]
    pending: dict[frozenset, PendingSession] = field(default_factory=dict)
    cooldown_until: dict[frozenset, float] = field(default_factory=dict)
    records: list[NegotiationRecord] = field(default_factory=list)
    # pairs that have completed a negotiation and so know each other's priority
    acquainted: frozenset = frozenset()

    def time(self, dt: float) -> float:
        return self.tick * dt


def scenario_digest(scenario: Scenario) -> str:
    from faca.scenarios import scenario_to_dict
    blob = json.dumps(scenario_to_dict(scenario), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def mission_context(r: RobotState) -> MissionContext:
    return MissionContext(r.id, r.mission, r.priority, r.distance_to_goal(), r.urgency)


def initial_world(scenario: Scenario) -> World:
    robots = {}
    for r in sorted(scenario.robots, key=lambda r: r.id):
        if r.distance_to_goal() <= scenario.goal_tolerance:
            r = replace(r, velocity=ZERO, arrived_at=0.0)
        robots[r.id] = r
    return World(0, robots)


def _set_priorities(robots: dict[str, RobotState], new: Mapping[str, float]):
    for rid, rho in new.items():
        robots[rid] = replace(robots[rid], priority=rho)


def _mpc_seed(scenario: Scenario, tick: int, index: int) -> list[int]:
    return [int(scenario.seed) & 0xFFFFFFFF, tick, index]


def perceived_others(robot: RobotState, snapshot: Sequence[RobotState],
                     acquainted: frozenset) -> list[RobotState]:
    """The other robots as ``robot`` knows them.

    A robot learns another's priority only by negotiating with it, after which
    the two keep each other informed. A robot it has never negotiated with is
    taken to be a peer (same priority as ``robot``).
    """
    return [o if pair_key(robot.id, o.id) in acquainted else replace(o, priority=robot.priority)
            for o in snapshot if o.id != robot.id]


def yield_scale(robot: RobotState, others: Sequence[RobotState],
                conflicts: Mapping[frozenset, float],
                p: FieldParams) -> tuple[float, bool]:
    """Cruise-speed multiplier for ``robot`` this tick, given ``others`` as it
    perceives them.

    It gives way (``give_way_speed_factor``) to a robot it knows to rank
    higher while the two are in a predicted conflict, and also while that
    robot is within ``yield_radius`` and has not yet got ``pass_margin``
    closer to its goal. A peer is given way to (``yield_speed_factor``) only
    while the two are in a predicted conflict; both sides do so, having no
    basis to decide who goes first.

    Returns the multiplier and whether ``robot`` is giving way to a higher
    rank (in which case it must not finish ahead of that robot).
    """
    scale = 1.0
    ranked = False
    remaining = robot.distance_to_goal()
    for o in others:
        if o.arrived:
            continue
        in_conflict = pair_key(robot.id, o.id) in conflicts
        if o.priority == robot.priority:
            if in_conflict:
                scale = min(scale, p.yield_speed_factor)
        elif o.priority > robot.priority:
            if in_conflict or ((o.position - robot.position).norm() <= p.yield_radius
                               and o.distance_to_goal() > remaining - p.pass_margin):
                scale = min(scale, p.give_way_speed_factor)
                ranked = True
    return scale, ranked


def plan(robot: RobotState, snapshot: Sequence[RobotState], scenario: Scenario,
         tick: int, index: int, acquainted: frozenset = frozenset(),
         conflicts: Mapping[frozenset, float] = {}) -> Vec2:
    """Velocity command for one robot from the frozen snapshot."""
    others = perceived_others(robot, snapshot, acquainted)
    if scenario.planner == "faca":
        scale, ranked = yield_scale(robot, others, conflicts, scenario.fields)
        # hold short of the goal rather than arrive ahead of a higher rank
        hold = scenario.goal_tolerance + scenario.fields.hold_distance if ranked else 0.0
        v, _ = faca_step(robot, others, scenario.obstacles, scenario.gap, scenario.fields,
                         scenario.dt, scale, hold)
        return v
    if scenario.planner == "classical_apf":
        apf = scenario.apf
        if scenario.negotiator != "none" and not apf.use_priorities:
            apf = replace(apf, use_priorities=True)
        return classical_apf_step(robot, others, scenario.obstacles, apf, scenario.dt,
                                  gap=scenario.gap)
    target = navigation_target(robot.position, robot.goal, scenario.gap)
    return mpc_step(robot, others, scenario.obstacles, scenario.mpc, scenario.dt,
                    _mpc_seed(scenario, tick, index), target)


def _integrate(r: RobotState, v: Vec2, scenario: Scenario) -> tuple[Vec2, Vec2]:
    s = r.position
    new = s + v * scenario.dt
    gap = scenario.gap
    if gap is not None:
        before, after = gap.side(s), gap.side(new)
        if before != 0 and after != before:
            # where the step meets the wall line
            f = (gap.wall_x - s.x) / (new.x - s.x)
            y_cross = s.y + f * (new.y - s.y)
            if not gap.in_opening(y_cross):
                new = Vec2(gap.wall_x - before * 1e-6, new.y)
                v = Vec2(0.0, v.y)
    rad = new.norm()
    if rad > scenario.arena_radius:
        u = new / rad
        new = u * scenario.arena_radius
        outward = v.dot(u)
        if outward > 0:
            v = v - u * outward
    return new, v


def step(world: World, scenario: Scenario, negotiator=None,
         eval_order: Optional[Sequence[str]] = None) -> World:
    dt = scenario.dt
    t = world.time(dt)
    robots = dict(world.robots)
    pending = dict(world.pending)
    cooldown = dict(world.cooldown_until)
    records = list(world.records)
    acquainted = set(world.acquainted)

    # 1. scheduled priority changes
    for ev in scenario.priority_events:
        if t - dt < ev.at_time <= t + 1e-12:
            _set_priorities(robots, ev.new_priorities)

    # 2. negotiations whose dialogue has finished
    for key in sorted(pending, key=lambda k: pending[k].pair):
        ps = pending[key]
        if ps.due_at > t + 1e-12:
            continue
        del pending[key]
        current = {rid: robots[rid].priority for rid in ps.pair}
        assignment = ps.outcome.bind(current)
        new = apply_assignment({k: r.priority for k, r in robots.items()}, assignment)
        _set_priorities(robots, {k: new[k] for k in ps.pair})
        cooldown[key] = t + scenario.cooldown
        acquainted.add(key)
        sess = ps.session
        records.append(NegotiationRecord(
            ps.pair, ps.opened_at, t, assignment.high, assignment.low,
            dict(assignment.new_priorities),
            fallback=getattr(sess, "fallback", False),
            fallback_reason=getattr(sess, "fallback_reason", None),
            transcript=list(getattr(sess, "transcript", []))))

    # 3. conflict detection on the frozen snapshot
    active = [robots[k] for k in sorted(robots) if not robots[k].arrived]
    conflicts: dict[frozenset, float] = {}
    for a in range(len(active)):
        for b in range(a + 1, len(active)):
            ri, rj = active[a], active[b]
            key = pair_key(ri.id, rj.id)
            ca = closest_approach(ri.position, ri.velocity, rj.position, rj.velocity,
                                  scenario.horizon)
            if not ca.d_min < scenario.safe_distance:
                continue
            conflicts[key] = ca.t_star
            if negotiator is not None:
                if key in pending or cooldown.get(key, -math.inf) > t + 1e-12:
                    continue
                # a pair that already negotiated knows where it stands unless tied
                if key in acquainted and abs(ri.priority - rj.priority) > PRIORITY_TIE:
                    continue
                outcome, session, latency = negotiator.negotiate(mission_context(ri),
                                                                 mission_context(rj))
                due = t + math.ceil(latency / dt - 1e-9) * dt
                pending[key] = PendingSession((ri.id, rj.id), t, due, outcome, session)

    # 4. plan against the snapshot
    snapshot = [robots[k] for k in sorted(robots)]
    index = {k: i for i, k in enumerate(sorted(robots))}
    order = list(eval_order) if eval_order is not None else [r.id for r in active]
    commands = {}
    for rid in order:
        r = robots[rid]
        if r.arrived:
            continue
        commands[rid] = plan(r, snapshot, scenario, world.tick, index[rid], frozenset(acquainted),
                             conflicts)

    # 5-6. move everyone, then check arrivals
    t_next = (world.tick + 1) * dt
    for rid in sorted(commands):
        r = robots[rid]
        pos, v = _integrate(r, commands[rid], scenario)
        for obs in scenario.obstacles:
            if (pos - obs.center).norm() < obs.radius - EPS_NORM:
                raise SimulationAborted(
                    f"t={t_next:.3f}: robot {rid} entered obstacle at "
                    f"({obs.center.x}, {obs.center.y}) r={obs.radius}")
        heading = v.angle() if v.norm() > EPS_NORM else r.heading
        arrived_at = None
        if (r.goal - pos).norm() <= scenario.goal_tolerance:
            v, arrived_at = ZERO, t_next
        robots[rid] = replace(r, position=pos, velocity=v, heading=heading,
                              arrived_at=arrived_at)

    return World(world.tick + 1, robots, pending, cooldown, records, frozenset(acquainted))


def snapshot_of(world: World, dt: float) -> Snapshot:
    return Snapshot(world.time(dt), tuple(
        RobotSnap(r.id, r.position.x, r.position.y, r.velocity.x, r.velocity.y,
                  r.heading, r.priority)
        for r in (world.robots[k] for k in sorted(world.robots))))


def make_negotiator(scenario: Scenario, llm_client=None, **llm_kwargs):
    if scenario.negotiator == "none":
        return None
    if scenario.negotiator == "scripted":
        from faca.negotiation import ScriptedNegotiator
        return ScriptedNegotiator()
    if llm_client is None:
        raise ValueError("negotiator 'llm' needs a chat client")
    from faca.negotiation import LlmNegotiator
    return LlmNegotiator(llm_client, **llm_kwargs)


def run(scenario: Scenario, negotiator=None, eval_order: Optional[Callable[[int], Sequence[str]]] = None,
        llm_client=None) -> TrajectoryLog:
    """Simulate until every robot has arrived or ``max_time`` is reached.

    ``negotiator`` defaults to the one named by the scenario. ``eval_order``,
    if given, maps a tick number to the order robots are planned in (used to
    check that the order does not matter).
    """
    scenario.validate()
    if negotiator is None:
        negotiator = make_negotiator(scenario, llm_client)
    world = initial_world(scenario)
    snaps = [snapshot_of(world, scenario.dt)]
    aborted = None
    while world.tick < scenario.n_ticks and not all(r.arrived for r in world.robots.values()):
        order = eval_order(world.tick) if eval_order is not None else None
        try:
            world = step(world, scenario, negotiator, order)
        except (SimulationAborted, InsideObstacle) as e:
            aborted = str(e)
            break
        snaps.append(snapshot_of(world, scenario.dt))
    return TrajectoryLog(
        scenario=scenario,
        digest=scenario_digest(scenario),
        snapshots=snaps,
        arrivals={k: r.arrived_at for k, r in sorted(world.robots.items())},
        negotiations=world.records,
        final_priorities={k: r.priority for k, r in sorted(world.robots.items())},
        aborted=aborted,
    )
