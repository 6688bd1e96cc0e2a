"""Planar multi-robot collision avoidance with negotiated priorities."""

from faca.geometry import Vec2

__version__ = "0.1.0"

__all__ = ["Vec2", "__version__"]
