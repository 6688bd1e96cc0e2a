"""Straight-line closest-approach forecasting between two moving robots."""

from __future__ import annotations

import math
from dataclasses import dataclass

from faca.geometry import Vec2

DEFAULT_HORIZON = 5.0
PARALLEL_EPS = 1e-12


@dataclass(frozen=True)
class ApproachResult:
    t_star: float
    d_min: float


def closest_approach(s_i: Vec2, v_i: Vec2, s_j: Vec2, v_j: Vec2,
                     horizon: float = DEFAULT_HORIZON) -> ApproachResult:
    """Minimize the squared separation over ``t`` in ``[0, horizon]``.

    The squared separation is the quadratic
    ``|ds|^2 + 2 (ds . dv) t + |dv|^2 t^2`` whose vertex is clamped into the
    window. Nearly equal velocities keep the current separation.
    """
    if not horizon > 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    dsx = s_i.x - s_j.x
    dsy = s_i.y - s_j.y
    dvx = v_i.x - v_j.x
    dvy = v_i.y - v_j.y
    dv2 = dvx * dvx + dvy * dvy
    if dv2 < PARALLEL_EPS:
        return ApproachResult(0.0, math.hypot(dsx, dsy))
    t = -(dsx * dvx + dsy * dvy) / dv2
    t = min(max(t, 0.0), horizon)
    return ApproachResult(t, math.hypot(dsx + dvx * t, dsy + dvy * t))


def collision_imminent(s_i: Vec2, v_i: Vec2, s_j: Vec2, v_j: Vec2,
                       safe_distance: float,
                       horizon: float = DEFAULT_HORIZON) -> bool:
    if not safe_distance > 0.0:
        raise ValueError(f"safe_distance must be positive, got {safe_distance}")
    return closest_approach(s_i, v_i, s_j, v_j, horizon).d_min < safe_distance
