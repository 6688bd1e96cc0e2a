"""Comparison planners: classical potential fields and a sampling MPC."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from faca.fields import CircularObstacle, WallGap, active_others
from faca.geometry import EPS_NORM, ZERO, Vec2, direction_or_fallback
from faca.state import RobotState


@dataclass(frozen=True)
class ClassicalApfParams:
    eta_A: float = 1.0
    eta_R: float = 50.0
    sigma: float = 3.0
    # speed = min(|F| * speed_gain, v_max)
    speed_gain: float = 1.0
    use_priorities: bool = False

    def __post_init__(self):
        for name in ("eta_A", "eta_R", "sigma", "speed_gain"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class MpcParams:
    horizon_steps: int = 10
    samples: int = 64
    collision_weight: float = 100.0
    goal_weight: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.horizon_steps < 1 or self.samples < 1:
            raise ValueError("horizon_steps and samples must be >= 1")
        if not (self.collision_weight > 0 and self.goal_weight > 0 and self.sigma > 0):
            raise ValueError("weights and sigma must be > 0")


REPULSION_CAP = 1e3


def classical_attraction(s: Vec2, g: Vec2, p: ClassicalApfParams) -> Vec2:
    return (g - s) * p.eta_A


def classical_repulsion(s: Vec2, hazard_dist: float, away: Vec2,
                        p: ClassicalApfParams) -> Vec2:
    """Negative gradient of 0.5 eta_R (1/d - 1/sigma)^2, zero beyond sigma."""
    if hazard_dist >= p.sigma:
        return ZERO
    d = max(hazard_dist, EPS_NORM)
    m = min(p.eta_R * (1.0 / d - 1.0 / p.sigma) / (d * d), REPULSION_CAP * p.eta_R)
    return away * m


def classical_apf_force(robot: RobotState, others: Sequence[RobotState],
                        obstacles: Sequence[CircularObstacle], p: ClassicalApfParams,
                        target: Optional[Vec2] = None, gap: Optional[WallGap] = None) -> Vec2:
    """Attraction to the goal plus repulsion from every hazard within sigma:
    other robots, obstacle boundaries and, if present, the wall."""
    s = robot.position
    f = classical_attraction(s, robot.goal if target is None else target, p)
    for o in active_others(robot, others):
        diff = s - o.position
        rep = classical_repulsion(s, diff.norm(), direction_or_fallback(diff), p)
        if p.use_priorities:
            rep = rep * (o.priority / robot.priority)
        f = f + rep
    for obs in obstacles:
        diff = s - obs.center
        f = f + classical_repulsion(s, obs.boundary_distance(s), direction_or_fallback(diff), p)
    if gap is not None:
        diff = s - gap.nearest_wall_point(s)
        f = f + classical_repulsion(s, diff.norm(), direction_or_fallback(diff), p)
    return f


def classical_apf_step(robot: RobotState, others: Sequence[RobotState],
                       obstacles: Sequence[CircularObstacle], p: ClassicalApfParams,
                       dt: float, target: Optional[Vec2] = None,
                       gap: Optional[WallGap] = None) -> Vec2:
    f = classical_apf_force(robot, others, obstacles, p, target, gap)
    n = f.norm()
    if n <= EPS_NORM:
        return ZERO
    return f * (min(n * p.speed_gain, robot.v_max) / n)


def _sample_controls(v_max: float, n: int, rng: np.random.Generator) -> np.ndarray:
    speed = rng.uniform(0.0, v_max, size=n)
    heading = rng.uniform(0.0, 2.0 * math.pi, size=n)
    return np.stack([speed * np.cos(heading), speed * np.sin(heading)], axis=1)


def mpc_step(robot: RobotState, others: Sequence[RobotState],
             obstacles: Sequence[CircularObstacle], p: MpcParams, dt: float,
             rng_seed: int, target: Optional[Vec2] = None) -> Vec2:
    """Pick the best of a set of constant-velocity controls over a short horizon.

    Candidate 0 drives straight at the target (never past it), candidate 1
    holds still; the rest are seeded random draws. Others are predicted at
    constant velocity. Ties go to the lowest candidate index.
    """
    s = np.array(robot.position.to_tuple())
    g = np.array((robot.goal if target is None else target).to_tuple())
    to_g = g - s
    d_g = float(np.hypot(*to_g))
    horizon_t = p.horizon_steps * dt

    rng = np.random.default_rng(rng_seed)
    straight = np.zeros(2)
    if d_g > EPS_NORM:
        straight = to_g / d_g * min(robot.v_max, d_g / horizon_t)
    controls = np.vstack([straight, np.zeros(2), _sample_controls(robot.v_max, p.samples, rng)])

    steps = np.arange(1, p.horizon_steps + 1) * dt
    # (S, H, 2) rollout positions
    traj = s[None, None, :] + controls[:, None, :] * steps[None, :, None]
    terminal = np.hypot(*(traj[:, -1, :] - g).T)
    cost = p.goal_weight * terminal

    others = active_others(robot, others)
    if others:
        pos = np.array([o.position.to_tuple() for o in others])
        vel = np.array([o.velocity.to_tuple() for o in others])
        pred = pos[:, None, :] + vel[:, None, :] * steps[None, :, None]  # (K, H, 2)
        sep = np.linalg.norm(traj[:, None, :, :] - pred[None, :, :, :], axis=-1)  # (S, K, H)
        min_sep = sep.min(axis=2)
        cost = cost + p.collision_weight * (np.maximum(0.0, p.sigma - min_sep) ** 2).sum(axis=1)
    for obs in obstacles:
        c = np.array(obs.center.to_tuple())
        gap = np.linalg.norm(traj - c, axis=-1) - obs.radius
        cost = cost + p.collision_weight * np.maximum(0.0, p.sigma - gap.min(axis=1)) ** 2

    best = int(np.argmin(cost))  # argmin returns the first minimum
    v = Vec2(*controls[best])
    n = v.norm()
    if n > robot.v_max:
        v = v * (robot.v_max / n)
    return v
