import numpy as np
import pytest
from hypothesis import given, strategies as st

from faca.geometry import Vec2
from faca.prediction import closest_approach, collision_imminent

c = st.floats(-50, 50, allow_nan=False)
v = st.floats(-20, 20, allow_nan=False)
vecs = st.builds(Vec2, c, c)
vels = st.builds(Vec2, v, v)


def grid_dmin(si, vi, sj, vj, horizon, n):
    t = np.linspace(0.0, horizon, n)
    dx = (sj.x - si.x) + (vj.x - vi.x) * t
    dy = (sj.y - si.y) + (vj.y - vi.y) * t
    return float(np.min(np.hypot(dx, dy)))


def test_symmetric_head_on():
    r = closest_approach(Vec2(0, 0), Vec2(1, 0), Vec2(10, 0), Vec2(-1, 0), 10.0)
    assert r.t_star == 5.0
    assert r.d_min == 0.0


def test_parallel_motion_keeps_separation():
    r = closest_approach(Vec2(0, 0), Vec2(2, 1), Vec2(3, 4), Vec2(2, 1), 10.0)
    assert r.t_star == 0.0
    assert r.d_min == 5.0


def test_passing_a_static_point():
    si, vi, sj, vj = Vec2(0, 0), Vec2(1, 0), Vec2(4, 3), Vec2(0, 0)
    r = closest_approach(si, vi, sj, vj, 10.0)
    assert r.t_star == pytest.approx(4.0)
    assert r.d_min == pytest.approx(3.0)
    assert abs(r.d_min - grid_dmin(si, vi, sj, vj, 10.0, 10_001)) < 1e-6


def test_imminent_uses_strict_threshold():
    assert collision_imminent(Vec2(0, 0), Vec2(1, 0), Vec2(10, 0), Vec2(-1, 0), 1.0, 10.0)
    assert not collision_imminent(Vec2(0, 0), Vec2(1, 0), Vec2(5, 0), Vec2(1, 0), 1.0, 10.0)
    # grazing: closest approach is exactly 1 m at t=5
    r = closest_approach(Vec2(0, 0), Vec2(1, 0), Vec2(5, 1), Vec2(0, 0), 10.0)
    assert r.d_min == 1.0
    assert not collision_imminent(Vec2(0, 0), Vec2(1, 0), Vec2(5, 1), Vec2(0, 0), 1.0, 10.0)


def test_t_star_clamped_to_horizon():
    r = closest_approach(Vec2(0, 0), Vec2(1, 0), Vec2(100, 0), Vec2(0, 0), 5.0)
    assert r.t_star == 5.0
    assert r.d_min == pytest.approx(95.0)


@given(vecs, vels, vecs, vels, st.floats(0.1, 20))
def test_swap_symmetry(si, vi, sj, vj, h):
    a = closest_approach(si, vi, sj, vj, h)
    b = closest_approach(sj, vj, si, vi, h)
    assert a.d_min == pytest.approx(b.d_min, abs=1e-9)
    assert 0.0 <= a.t_star <= h


@given(vecs, vels, vecs, vels, st.floats(0.1, 20))
def test_never_farther_than_now(si, vi, sj, vj, h):
    r = closest_approach(si, vi, sj, vj, h)
    assert r.d_min <= (sj - si).norm() + 1e-9
