"""Trajectory figures as plain SVG text.

Obstacles are the only ``<circle>`` elements; starts are squares and goals are
crosses so markers and obstacles can be counted separately.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

from faca.engine import TrajectoryLog

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#17becf", "#bcbd22", "#7f7f7f")
MARGIN = 3.0
MARKER = 0.8


def _f(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def color_for(index: int) -> str:
    return PALETTE[index % len(PALETTE)]


def svg_text(log: TrajectoryLog) -> str:
    if not log.snapshots:
        raise ValueError("log has no snapshots")
    sc = log.scenario
    R = sc.arena_radius + MARGIN
    ids = log.robot_ids
    paths = {rid: [] for rid in ids}
    for snap in log.snapshots:
        for s in snap.states:
            paths[s.id].append((s.x, s.y))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_f(-R)} {_f(-R)} {_f(2 * R)} {_f(2 * R)}"'
        f' width="600" height="600">',
        f'<title>{sc.name or "run"} planner={sc.planner} negotiator={sc.negotiator} '
        f'seed={sc.seed}</title>',
        # flip y so the figure reads with +y up
        '<g transform="scale(1,-1)" fill="none" stroke-linecap="round">',
        f'<path class="arena" d="M {_f(sc.arena_radius)} 0 A {_f(sc.arena_radius)} '
        f'{_f(sc.arena_radius)} 0 1 0 {_f(-sc.arena_radius)} 0 A {_f(sc.arena_radius)} '
        f'{_f(sc.arena_radius)} 0 1 0 {_f(sc.arena_radius)} 0" stroke="#cccccc" '
        f'stroke-width="0.2" stroke-dasharray="1 1"/>',
    ]
    for o in sc.obstacles:
        out.append(f'<circle class="obstacle" cx="{_f(o.center.x)}" cy="{_f(o.center.y)}" '
                   f'r="{_f(o.radius)}" fill="#999999" stroke="#555555" stroke-width="0.2"/>')
    if sc.gap is not None:
        g = sc.gap
        lo, hi = g.gap_center.y - g.gap_width / 2, g.gap_center.y + g.gap_width / 2
        for y0, y1 in ((-R, lo), (hi, R)):
            out.append(f'<line class="wall" x1="{_f(g.wall_x)}" y1="{_f(y0)}" '
                       f'x2="{_f(g.wall_x)}" y2="{_f(y1)}" stroke="#000000" stroke-width="0.5"/>')
    robots = {r.id: r for r in sc.robots}
    for k, rid in enumerate(ids):
        c = color_for(k)
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in paths[rid])
        out.append(f'<polyline class="trajectory" data-id="{rid}" points="{pts}" '
                   f'stroke="{c}" stroke-width="0.3"/>')
        s, g = robots[rid].position, robots[rid].goal
        h = MARKER / 2
        out.append(f'<rect class="start" data-id="{rid}" x="{_f(s.x - h)}" y="{_f(s.y - h)}" '
                   f'width="{_f(MARKER)}" height="{_f(MARKER)}" fill="{c}"/>')
        out.append(f'<path class="goal" data-id="{rid}" d="M {_f(g.x - h)} {_f(g.y - h)} '
                   f'L {_f(g.x + h)} {_f(g.y + h)} M {_f(g.x - h)} {_f(g.y + h)} '
                   f'L {_f(g.x + h)} {_f(g.y - h)}" stroke="{c}" stroke-width="0.25"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(log: TrajectoryLog, path: Union[str, Path]) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(svg_text(log))
    return p
