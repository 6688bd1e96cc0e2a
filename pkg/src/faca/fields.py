"""Exponential potential fields with tangential, priority-scaled repulsion.

Each robot is pulled toward its goal by a force whose magnitude saturates at
``kappa_A`` far away and fades smoothly to zero at the goal. Other robots push
it *sideways*: the radial repulsion is turned by a quarter turn, so two robots
on a collision course circulate around each other instead of stalling nose to
nose. Static circular obstacles push along their tangent. A gap in a wall is
handled by steering at the gap center until the robot is through it.

The potentials are only used to check the forces against their gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from faca.geometry import (EPS_NORM, ZERO, NearZeroVector, Vec2,
                           direction_or_fallback, rotate90, wrap_angle)
from faca.prediction import closest_approach
from faca.state import RobotState

SQRT_PI = math.sqrt(math.pi)


class InsideObstacle(RuntimeError):
    """A robot is strictly inside a static obstacle."""


class ZeroNetForce(ValueError):
    """The summed force is too small to define a heading."""


@dataclass(frozen=True)
class FieldParams:
    kappa_A: float = 2.0
    phi_A: float = -0.05
    kappa_R: float = 4.0
    phi_R: float = 0.25
    subgoal_decay_c: float = 0.05
    blend_influence: float = 5.0
    v_max: float = 15.0
    # cruise-speed multipliers while giving way: to a peer (priority unknown)
    # in a predicted conflict, and to a robot known to rank higher
    yield_speed_factor: float = 0.25
    give_way_speed_factor: float = 0.25
    # a known higher-priority robot within this range is given way to until it
    # is pass_margin closer to its goal than we are to ours
    yield_radius: float = 100.0
    pass_margin: float = 3.0
    # while giving way to a higher rank, stay this far outside the goal tolerance
    hold_distance: float = 0.5
    # opt-in: cut commanded speed so no robot is predicted to come closer than
    # this; costs throughput in crowded gaps (0 disables)
    guard_distance: float = 0.0
    # "yield": force on i scaled by rho_j / rho_i (lower priority deviates more)
    # "literal": scaled by rho_i / rho_j
    priority_scaling: str = "yield"

    def __post_init__(self):
        if not self.kappa_A > 0:
            raise ValueError("kappa_A must be > 0")
        if not self.phi_A < 0:
            raise ValueError("phi_A must be < 0")
        if not self.kappa_R > 0:
            raise ValueError("kappa_R must be > 0")
        if not self.phi_R > 0:
            raise ValueError("phi_R must be > 0")
        if not self.subgoal_decay_c > 0:
            raise ValueError("subgoal_decay_c must be > 0")
        if not self.blend_influence > 0:
            raise ValueError("blend_influence must be > 0")
        if not self.v_max > 0:
            raise ValueError("v_max must be > 0")
        if not 0 < self.yield_speed_factor <= 1:
            raise ValueError("yield_speed_factor must be in (0, 1]")
        if not 0 <= self.give_way_speed_factor <= 1:
            raise ValueError("give_way_speed_factor must be in [0, 1]")
        if min(self.yield_radius, self.pass_margin, self.hold_distance, self.guard_distance) < 0:
            raise ValueError("yield_radius, pass_margin, hold_distance and guard_distance "
                             "must be >= 0")
        if self.priority_scaling not in ("yield", "literal"):
            raise ValueError(f"unknown priority_scaling {self.priority_scaling!r}")


@dataclass(frozen=True)
class CircularObstacle:
    center: Vec2
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"obstacle radius must be > 0, got {self.radius}")

    def boundary_distance(self, s: Vec2) -> float:
        return max(0.0, (s - self.center).norm() - self.radius)


@dataclass(frozen=True)
class WallGap:
    """A vertical wall at ``x = wall_x`` with one opening of width ``gap_width``."""
    wall_x: float
    gap_center: Vec2
    gap_width: float

    def __post_init__(self):
        if not self.gap_width > 0:
            raise ValueError(f"gap_width must be > 0, got {self.gap_width}")
        if abs(self.gap_center.x - self.wall_x) > 1e-9:
            raise ValueError("gap_center must lie on the wall line")

    def in_opening(self, y: float) -> bool:
        return abs(y - self.gap_center.y) <= 0.5 * self.gap_width

    def nearest_wall_point(self, p: Vec2) -> Vec2:
        """Closest point of the solid wall (the line minus the opening) to ``p``."""
        if not self.in_opening(p.y):
            return Vec2(self.wall_x, p.y)
        half = 0.5 * self.gap_width
        edge = half if p.y >= self.gap_center.y else -half
        return Vec2(self.wall_x, self.gap_center.y + edge)

    def side(self, p: Vec2) -> int:
        d = p.x - self.wall_x
        return (d > 0) - (d < 0)


def navigation_target(s: Vec2, goal: Vec2, gap: Optional[WallGap]) -> Vec2:
    """Gap center while the robot still has to get through the wall, else the goal."""
    if gap is None:
        return goal
    goal_side = gap.side(goal)
    if goal_side == 0 or gap.side(s) == goal_side:
        return goal
    # inside the mouth of the opening counts as through
    if (s - gap.gap_center).norm() <= 0.5 * gap.gap_width:
        return goal
    return gap.gap_center


def attractive_potential(s: Vec2, g: Vec2, p: FieldParams) -> float:
    d = (g - s).norm()
    k = math.sqrt(-p.phi_A)
    return p.kappa_A * d - p.kappa_A * SQRT_PI / (2.0 * k) * math.erf(k * d)


def _saturating_pull(s: Vec2, target: Vec2, gain: float, spread: float) -> Vec2:
    # gain * (1 - exp(-spread d^2)) toward target
    dx = target.x - s.x
    dy = target.y - s.y
    d = math.hypot(dx, dy)
    if d <= EPS_NORM:
        return ZERO
    m = gain * -math.expm1(-spread * d * d) / d
    return Vec2(m * dx, m * dy)


def attractive_force(s: Vec2, g: Vec2, p: FieldParams) -> Vec2:
    return _saturating_pull(s, g, p.kappa_A, -p.phi_A)


def subgoal_attraction(s: Vec2, gap: WallGap, p: FieldParams) -> Vec2:
    """Pull toward the gap center with decay rate ``subgoal_decay_c``."""
    return _saturating_pull(s, gap.gap_center, p.kappa_A, p.subgoal_decay_c)


def repulsive_potential(d_ij: float, p: FieldParams) -> float:
    if d_ij < 0:
        raise ValueError(f"distance must be >= 0, got {d_ij}")
    k = math.sqrt(p.phi_R)
    return -p.kappa_R * SQRT_PI / (2.0 * k) * math.erf(k * d_ij)


def radial_repulsive_force(s_i: Vec2, s_j: Vec2, p: FieldParams) -> Vec2:
    """Unrotated repulsion on ``i`` from ``j``: the negative gradient of the
    repulsive potential with respect to ``s_i``."""
    diff = s_i - s_j
    d = diff.norm()
    u = direction_or_fallback(diff)
    return u * (p.kappa_R * math.exp(-p.phi_R * d * d))


def priority_factor(rho_i: float, rho_j: float, p: FieldParams) -> float:
    if not (rho_i > 0 and rho_j > 0):
        raise ValueError(f"priorities must be positive, got {rho_i}, {rho_j}")
    if p.priority_scaling == "yield":
        return rho_j / rho_i
    return rho_i / rho_j


def tangential_repulsive_force(s_i: Vec2, s_j: Vec2, rho_i: float, rho_j: float,
                               p: FieldParams) -> Vec2:
    diff = s_i - s_j
    d2 = diff.x * diff.x + diff.y * diff.y
    u = direction_or_fallback(diff)
    m = priority_factor(rho_i, rho_j, p) * p.kappa_R * math.exp(-p.phi_R * d2)
    return rotate90(u) * m


def obstacle_tangent_force(s_i: Vec2, obs: CircularObstacle, goal_dir: Vec2,
                           p: FieldParams) -> Vec2:
    radial = s_i - obs.center
    r = radial.norm()
    if r < obs.radius - EPS_NORM:
        raise InsideObstacle(
            f"position {s_i!r} is inside obstacle at {obs.center!r} (r={obs.radius})")
    u = direction_or_fallback(radial)
    ccw = Vec2(-u.y, u.x)
    cw = Vec2(u.y, -u.x)
    tangent = cw if cw.dot(goal_dir) > ccw.dot(goal_dir) else ccw
    b = max(0.0, r - obs.radius)
    return tangent * (p.kappa_R * math.exp(-p.phi_R * b * b))


def compose_heading(f_attr: Vec2, f_rep_total: Vec2) -> float:
    total = f_attr + f_rep_total
    if total.norm() <= EPS_NORM:
        raise ZeroNetForce(f"net force {total!r} has no direction")
    return wrap_angle(math.atan2(total.y, total.x))


def blend_factor(dist_nearest_hazard: float, p: FieldParams) -> float:
    """Weight of the goal-directed velocity; drops to 0 at contact."""
    return min(1.0, max(0.0, dist_nearest_hazard) / p.blend_influence)


def steer_velocity(v_cur: Vec2, theta_new: float, dist_nearest_hazard: float,
                   p: FieldParams, v_max: Optional[float] = None) -> Vec2:
    v_max = p.v_max if v_max is None else v_max
    speed = v_cur.norm()
    beta = blend_factor(dist_nearest_hazard, p)
    cand = Vec2(speed * math.cos(theta_new), speed * math.sin(theta_new))
    out = v_cur * beta + cand * (1.0 - beta)
    n = out.norm()
    if n > v_max:
        out = out * (v_max / n)
    return out


def active_others(robot: RobotState, others: Iterable[RobotState]) -> list[RobotState]:
    """Other robots that still act as hazards, in a canonical (id) order so
    that force sums do not depend on how the caller ordered them."""
    return sorted((o for o in others if o.id != robot.id and not o.arrived),
                  key=lambda o: o.id)


def slide_along_obstacles(s: Vec2, v: Vec2, obstacles: Sequence[CircularObstacle],
                          dt: float) -> Vec2:
    """Drop the inward radial part of ``v`` for any obstacle the next step
    would cut into, leaving the tangential part (the robot slides around)."""
    for obs in obstacles:
        nxt = s + v * dt
        if (nxt - obs.center).norm() >= obs.radius:
            continue
        u = direction_or_fallback(s - obs.center)
        inward = v.dot(u)
        if inward < 0.0:
            v = v - u * inward
    return v


GOVERNOR_STEPS = (1.0, 0.5, 0.25, 0.0)


def govern_speed(s: Vec2, v: Vec2, others: Sequence[RobotState], guard: float,
                 dt: float) -> Vec2:
    """Largest of ``GOVERNOR_STEPS`` times ``v`` under which, over the next
    tick, no robot ends up both closer than ``guard`` and closer than it is
    now. Each other robot is checked both holding its velocity and stopping,
    since it may be braking this very tick."""
    if guard <= 0.0 or not others:
        return v
    for k in GOVERNOR_STEPS:
        cand = v * k
        if all(_keeps_clear(s, cand, o, guard, dt) for o in others):
            return cand
    return ZERO


def _keeps_clear(s: Vec2, v: Vec2, o: RobotState, guard: float, dt: float) -> bool:
    d_now = (o.position - s).norm()
    for vo in (o.velocity, ZERO):
        d = closest_approach(s, v, o.position, vo, dt).d_min
        if d < guard and d < d_now:
            return False
    return True


def faca_step(robot: RobotState, others: Sequence[RobotState],
              obstacles: Sequence[CircularObstacle], gap: Optional[WallGap],
              p: FieldParams, dt: float, speed_scale: float = 1.0,
              stop_short: float = 0.0) -> tuple[Vec2, float]:
    """One planning tick for ``robot`` against a frozen snapshot of the world.

    Returns the new velocity and the composed heading. The goal-directed
    reference velocity points straight at the current target at cruise speed
    (``v_max``, or less so as not to come closer than ``stop_short`` to the
    target this step); it is blended with the same speed re-aimed along the
    force heading. A ``speed_scale`` below 1 (giving way) shrinks only the
    goal-directed part, so the robot still dodges at cruise speed.
    """
    s = robot.position
    target = navigation_target(s, robot.goal, gap)
    if target is robot.goal:
        f_attr = attractive_force(s, target, p)
    else:
        f_attr = subgoal_attraction(s, gap, p)

    to_target = target - s
    d_target = to_target.norm()
    goal_dir = direction_or_fallback(to_target)

    f_rep = ZERO
    hazard = math.inf
    near = active_others(robot, others)
    for o in near:
        f_rep = f_rep + tangential_repulsive_force(s, o.position, robot.priority, o.priority, p)
        hazard = min(hazard, (o.position - s).norm())
    for obs in obstacles:
        f_rep = f_rep + obstacle_tangent_force(s, obs, goal_dir, p)
        hazard = min(hazard, obs.boundary_distance(s))

    try:
        theta = compose_heading(f_attr, f_rep)
    except ZeroNetForce:
        theta = robot.heading

    if d_target <= EPS_NORM:
        return ZERO, theta
    cruise = min(robot.v_max, max(0.0, d_target - stop_short) / dt)
    speed = min(robot.v_max * speed_scale, cruise)
    if cruise <= 0.0:
        return ZERO, theta
    if speed < cruise:
        # giving way slows progress toward the target, not the dodge
        beta = blend_factor(hazard, p)
        dodge = Vec2(math.cos(theta), math.sin(theta)) * cruise
        out = goal_dir * (speed * beta) + dodge * (1.0 - beta)
    else:
        out = steer_velocity(goal_dir * speed, theta, hazard, p, v_max=robot.v_max)
    out = slide_along_obstacles(s, out, obstacles, dt)
    return govern_speed(s, out, near, p.guard_distance, dt), theta


__all__ = [
    "CircularObstacle", "FieldParams", "InsideObstacle", "NearZeroVector",
    "WallGap", "ZeroNetForce", "attractive_force", "attractive_potential",
    "blend_factor", "compose_heading", "faca_step", "govern_speed", "navigation_target",
    "obstacle_tangent_force", "priority_factor", "radial_repulsive_force",
    "repulsive_potential", "slide_along_obstacles", "steer_velocity", "subgoal_attraction",
    "tangential_repulsive_force",
]
