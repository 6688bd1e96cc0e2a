"""Planar vector math shared by the planners, the engine and the metrics.

Vectors are small immutable value objects. Every constructor checks that both
components are finite, so a NaN produced anywhere in a force computation fails
loudly at the point it is created instead of silently poisoning a trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EPS_NORM = 1e-9
TWO_PI = 2.0 * math.pi


class NearZeroVector(ValueError):
    """Raised when a direction is requested for a (near) zero-length vector."""


class Vec2:
    __slots__ = ("x", "y")

    def __init__(self, x: float, y: float):
        x = float(x)
        y = float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite vector component ({x}, {y})")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __setattr__(self, name, value):
        raise AttributeError("Vec2 is immutable")

    def __repr__(self) -> str:
        return f"Vec2({self.x!r}, {self.y!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vec2):
            return NotImplemented
        return self.x == other.x and self.y == other.y

    def __hash__(self) -> int:
        return hash((self.x, self.y))

    def __iter__(self):
        yield self.x
        yield self.y

    def __add__(self, other: Vec2) -> Vec2:
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: Vec2) -> Vec2:
        return Vec2(self.x - other.x, self.y - other.y)

    def __neg__(self) -> Vec2:
        return Vec2(-self.x, -self.y)

    def __mul__(self, k: float) -> Vec2:
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __truediv__(self, k: float) -> Vec2:
        return Vec2(self.x / k, self.y / k)

    def dot(self, other: Vec2) -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: Vec2) -> float:
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def angle(self) -> float:
        """Full-quadrant direction angle in [0, 2*pi)."""
        return wrap_angle(math.atan2(self.y, self.x))

    def to_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)

    @classmethod
    def polar(cls, r: float, angle: float) -> Vec2:
        return cls(r * math.cos(angle), r * math.sin(angle))


ZERO = Vec2(0.0, 0.0)
UNIT_X = Vec2(1.0, 0.0)


def wrap_angle(a: float) -> float:
    """Map an angle into [0, 2*pi)."""
    a = math.fmod(a, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod of a tiny negative number can round back up to exactly 2*pi
    if a >= TWO_PI:
        a = 0.0
    return a


@dataclass(frozen=True)
class Pose:
    position: Vec2
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))


def rotate90(v: Vec2) -> Vec2:
    """Apply the clockwise quarter turn [[0, 1], [-1, 0]] to ``v``."""
    return Vec2(v.y, -v.x)


def rotate(v: Vec2, angle: float) -> Vec2:
    c = math.cos(angle)
    s = math.sin(angle)
    return Vec2(c * v.x - s * v.y, s * v.x + c * v.y)


def normalize(v: Vec2) -> Vec2:
    n = v.norm()
    if n <= EPS_NORM:
        raise NearZeroVector(f"cannot normalize {v!r} (norm {n:.3g})")
    return Vec2(v.x / n, v.y / n)


def direction_or_fallback(v: Vec2) -> Vec2:
    """Unit vector along ``v``; the +x axis when ``v`` is degenerate.

    Used wherever two points may coincide (robots on top of each other, a
    robot exactly on an obstacle center) so that the result stays finite and
    deterministic.
    """
    try:
        return normalize(v)
    except NearZeroVector:
        return UNIT_X


def distance(a: Vec2, b: Vec2) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)
