"""Scenario construction and the JSON scenario file format.

A scenario file either lists its robots explicitly or carries a ``generator``
block describing the circle setup (robots on an arc of the arena boundary,
goals antipodal). Generated scenarios are re-drawn per seed, which is how a
batch over seeds varies priorities and the mid-run priority shuffle.
"""

from __future__ import annotations

import dataclasses
import json
import math
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import numpy as np

from faca.baselines import ClassicalApfParams, MpcParams
from faca.engine import PriorityEvent, Scenario, ValidationError
from faca.fields import CircularObstacle, FieldParams, WallGap
from faca.geometry import ZERO, Vec2, wrap_angle
from faca.state import RobotState

FORMAT_VERSION = 1
PRIORITY_MEAN = 3.0
PRIORITY_STD = 1.0
PRIORITY_FLOOR = 0.5

MISSIONS = (
    ("medical", "Carrying a patient to the field hospital."),
    ("equipment", "Delivering a ventilator needed for surgery."),
    ("food", "Delivering food rations to a shelter."),
    ("surveillance", "Surveying the perimeter for hazards."),
)


class ParseError(ValueError):
    pass


def draw_priorities(n: int, rng: np.random.Generator) -> list[float]:
    """Normal(3, 1) draws, redrawn while below the floor."""
    out = []
    while len(out) < n:
        v = float(rng.normal(PRIORITY_MEAN, PRIORITY_STD))
        if v >= PRIORITY_FLOOR:
            out.append(v)
    return out


def make_circle_scenario(n: int, arena_radius: float = 50.0, arc: float = math.pi / 16,
                         priority_seed: int = 0, *, arc_center: float = math.pi,
                         gap_width: Optional[float] = None,
                         obstacle_radius: Optional[float] = None,
                         equal_priorities: bool = False,
                         priority_change: bool = True,
                         change_time: Optional[float] = None,
                         v_max: float = 15.0,
                         moving: bool = True,
                         rotate: bool = False,
                         **scenario_kwargs: Any) -> Scenario:
    """Robots evenly spaced on an arc of the boundary circle, goals antipodal.

    Priorities are drawn from Normal(3, 1) truncated at 0.5; unless disabled,
    one seed-drawn permutation of them takes effect at ``change_time``, which
    defaults to half the straight-line crossing time ``arena_radius / v_max``.
    With ``rotate`` the arc is centred at a seed-drawn angle instead of
    ``arc_center`` (drawn from its own stream, so priorities are unaffected).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(priority_seed)
    if rotate:
        arc_center = float(np.random.default_rng([priority_seed, 1]).uniform(0.0, 2 * math.pi))
    if n == 1:
        angles = [arc_center]
    else:
        angles = [arc_center - arc / 2 + arc * k / (n - 1) for k in range(n)]
    rho = [PRIORITY_MEAN] * n if equal_priorities else draw_priorities(n, rng)
    width = len(str(n - 1))
    ids = [f"r{k:0{width}d}" for k in range(n)]

    robots = []
    for k, a in enumerate(angles):
        start = Vec2.polar(arena_radius, a)
        goal = Vec2.polar(arena_radius, a + math.pi)
        tag, text = MISSIONS[k % len(MISSIONS)]
        robots.append(RobotState(id=ids[k], position=start, goal=goal, priority=rho[k],
                                 v_max=v_max, heading=wrap_angle(a + math.pi),
                                 velocity=(goal - start) * (v_max / (2 * arena_radius))
                                 if moving else ZERO,
                                 mission=text, urgency=tag))

    events = ()
    if priority_change and n > 1 and not equal_priorities:
        perm = rng.permutation(n)
        at = arena_radius / v_max if change_time is None else change_time
        events = (PriorityEvent(at, {ids[k]: rho[int(perm[k])] for k in range(n)}),)

    obstacles = ()
    if obstacle_radius is not None:
        obstacles = (CircularObstacle(Vec2(0.0, 0.0), obstacle_radius),)
    gap = None
    if gap_width is not None:
        gap = WallGap(0.0, Vec2(0.0, 0.0), gap_width)

    kw = dict(arena_radius=arena_radius, seed=priority_seed)
    kw.update(scenario_kwargs)
    if "fields" not in kw:
        kw["fields"] = FieldParams(v_max=v_max)
    return Scenario(robots=tuple(robots), obstacles=obstacles, gap=gap,
                    priority_events=events, **kw)


# ---------------------------------------------------------------- JSON format

def _vec(v: Vec2) -> list[float]:
    return [v.x, v.y]


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "name": sc.name,
        "arena_radius": sc.arena_radius,
        "dt": sc.dt,
        "max_time": sc.max_time,
        "goal_tolerance": sc.goal_tolerance,
        "safe_distance": sc.safe_distance,
        "horizon": sc.horizon,
        "cooldown": sc.cooldown,
        "planner": sc.planner,
        "negotiator": sc.negotiator,
        "seed": sc.seed,
        "robots": [{
            "id": r.id, "position": _vec(r.position), "goal": _vec(r.goal),
            "priority": r.priority, "v_max": r.v_max, "velocity": _vec(r.velocity),
            "heading": r.heading, "mission": r.mission, "urgency": r.urgency,
        } for r in sc.robots],
        "obstacles": [{"center": _vec(o.center), "radius": o.radius} for o in sc.obstacles],
        "gap": None if sc.gap is None else {
            "wall_x": sc.gap.wall_x, "gap_center": _vec(sc.gap.gap_center),
            "gap_width": sc.gap.gap_width},
        "priority_events": [{"at_time": e.at_time,
                             "new_priorities": dict(sorted(e.new_priorities.items()))}
                            for e in sc.priority_events],
        "fields": dataclasses.asdict(sc.fields),
        "apf": dataclasses.asdict(sc.apf),
        "mpc": dataclasses.asdict(sc.mpc),
    }


def _req(d: dict, key: str, where: str):
    if key not in d:
        raise ValidationError(f"{where}{key}", "missing")
    return d[key]


def _to_vec(v, where: str) -> Vec2:
    try:
        x, y = v
        return Vec2(float(x), float(y))
    except (TypeError, ValueError) as e:
        raise ValidationError(where, f"expected [x, y], got {v!r}") from e


def _params(cls, d: Optional[dict], where: str, **defaults):
    d = dict(defaults, **(d or {}))
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ValidationError(f"{where}.{sorted(unknown)[0]}", "unknown parameter")
    try:
        return cls(**d)
    except ValueError as e:
        raise ValidationError(where, str(e)) from e


_SCALARS = {"name": str, "arena_radius": float, "dt": float, "max_time": float,
            "goal_tolerance": float, "safe_distance": float, "horizon": float,
            "cooldown": float, "planner": str, "negotiator": str, "seed": int}


def _scalar_overrides(d: dict) -> dict:
    out = {}
    for key, typ in _SCALARS.items():
        if key in d:
            try:
                out[key] = typ(d[key])
            except (TypeError, ValueError) as e:
                raise ValidationError(key, f"expected {typ.__name__}, got {d[key]!r}") from e
    return out


def scenario_from_dict(d: dict, seed: Optional[int] = None) -> Scenario:
    if not isinstance(d, dict):
        raise ValidationError("<root>", "expected a JSON object")
    version = d.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ValidationError("format_version", f"unsupported version {version!r}")
    scalars = _scalar_overrides(d)
    if seed is not None:
        scalars["seed"] = int(seed)

    if "generator" in d:
        gen = dict(d["generator"])
        kind = gen.pop("kind", "circle")
        if kind != "circle":
            raise ValidationError("generator.kind", f"unknown generator {kind!r}")
        if "n" not in gen:
            raise ValidationError("generator.n", "missing")
        v_max = float(gen.get("v_max", 15.0))
        kw = dict(scalars)
        kw["fields"] = _params(FieldParams, d.get("fields"), "fields", v_max=v_max)
        kw["apf"] = _params(ClassicalApfParams, d.get("apf"), "apf")
        kw["mpc"] = _params(MpcParams, d.get("mpc"), "mpc")
        arena = kw.pop("arena_radius", 50.0)
        prio_seed = kw.pop("seed", 0)
        try:
            sc = make_circle_scenario(priority_seed=prio_seed, arena_radius=arena,
                                      seed=prio_seed, **gen, **kw)
        except TypeError as e:
            raise ValidationError("generator", str(e)) from e
        return sc.validate()

    robots = []
    for k, r in enumerate(_req(d, "robots", "")):
        where = f"robots[{k}]."
        try:
            robots.append(RobotState(
                id=str(_req(r, "id", where)),
                position=_to_vec(_req(r, "position", where), where + "position"),
                goal=_to_vec(_req(r, "goal", where), where + "goal"),
                priority=float(_req(r, "priority", where)),
                v_max=float(r.get("v_max", 15.0)),
                velocity=_to_vec(r.get("velocity", [0.0, 0.0]), where + "velocity"),
                heading=float(r.get("heading", 0.0)),
                mission=str(r.get("mission", "")),
                urgency=r.get("urgency")))
        except ValidationError:
            raise
        except ValueError as e:
            raise ValidationError(where.rstrip("."), str(e)) from e
    obstacles = []
    for k, o in enumerate(d.get("obstacles", [])):
        where = f"obstacles[{k}]."
        try:
            obstacles.append(CircularObstacle(_to_vec(_req(o, "center", where), where + "center"),
                                              float(_req(o, "radius", where))))
        except ValidationError:
            raise
        except ValueError as e:
            raise ValidationError(where + "radius", str(e)) from e
    gap = None
    if d.get("gap") is not None:
        g = d["gap"]
        try:
            gap = WallGap(float(_req(g, "wall_x", "gap.")),
                          _to_vec(_req(g, "gap_center", "gap."), "gap.gap_center"),
                          float(_req(g, "gap_width", "gap.")))
        except ValidationError:
            raise
        except ValueError as e:
            raise ValidationError("gap", str(e)) from e
    events = []
    for k, e in enumerate(d.get("priority_events", [])):
        where = f"priority_events[{k}]."
        events.append(PriorityEvent(float(_req(e, "at_time", where)),
                                    {str(a): float(b) for a, b in
                                     _req(e, "new_priorities", where).items()}))
    v_max = max((r.v_max for r in robots), default=15.0)
    return Scenario(
        robots=tuple(robots), obstacles=tuple(obstacles), gap=gap,
        priority_events=tuple(events),
        fields=_params(FieldParams, d.get("fields"), "fields", v_max=v_max),
        apf=_params(ClassicalApfParams, d.get("apf"), "apf"),
        mpc=_params(MpcParams, d.get("mpc"), "mpc"),
        **scalars,
    ).validate()


def load_scenario(path, seed: Optional[int] = None) -> Scenario:
    """Read a scenario file; a bare name like ``circle_n4.json`` falls back to
    the bundled scenarios."""
    p = Path(path)
    if not p.exists():
        bundled = resources.files("faca").joinpath("data", p.name)
        if not bundled.is_file():
            raise FileNotFoundError(path)
        text = bundled.read_text()
    else:
        text = p.read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e}") from e
    return scenario_from_dict(d, seed=seed)


def dump_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(sc), indent=2, sort_keys=True) + "\n")


def bundled_scenarios() -> list[str]:
    return sorted(p.name for p in resources.files("faca").joinpath("data").iterdir()
                  if p.name.endswith(".json"))
