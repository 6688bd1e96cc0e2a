"""Per-robot simulation state."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from faca.geometry import Vec2, ZERO


@dataclass(frozen=True)
class RobotState:
    id: str
    position: Vec2
    goal: Vec2
    priority: float
    v_max: float
    velocity: Vec2 = ZERO
    heading: float = 0.0
    mission: str = ""
    urgency: Optional[str] = None
    arrived_at: Optional[float] = None

    def __post_init__(self):
        if not self.priority > 0.0:
            raise ValueError(f"robot {self.id}: priority must be positive, got {self.priority}")
        if not self.v_max > 0.0:
            raise ValueError(f"robot {self.id}: v_max must be positive, got {self.v_max}")
        # small slack: speeds are clamped with a float multiply
        if self.velocity.norm() > self.v_max * (1.0 + 1e-9):
            raise ValueError(f"robot {self.id}: speed {self.velocity.norm()} exceeds v_max {self.v_max}")

    @property
    def arrived(self) -> bool:
        return self.arrived_at is not None

    def distance_to_goal(self) -> float:
        return (self.goal - self.position).norm()
