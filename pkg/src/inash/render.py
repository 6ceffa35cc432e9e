"""Deterministic SVG rendering: black-outlined obstacles, tinted goal
regions, colored per-robot polylines, 'O' rings at starts (drawn at three
times the robot radius) and 'X' marks at path ends."""
from __future__ import annotations

from typing import Optional, Sequence

from .environment import Region, Scenario

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _fmt(v: float) -> str:
    return f"{v:.4f}".rstrip("0").rstrip(".")


def _region_svg(region: Region, style: str) -> str:
    if region.kind == "rect":
        x0, y0, x1, y1 = region.params
        return (
            f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" '
            f'height="{_fmt(y1 - y0)}" {style}/>'
        )
    cx, cy, r = region.params
    return f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" {style}/>'


def render_svg(
    scenario: Scenario,
    paths: Optional[Sequence] = None,
    scale: float = 30.0,
) -> str:
    """SVG document of the environment and, optionally, one timed path per
    robot (None entries skipped). Output is deterministic."""
    b = scenario.workspace.bounds
    wpx = (b[2] - b[0]) * scale
    hpx = (b[3] - b[1]) * scale
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(wpx)}" '
        f'height="{_fmt(hpx)}" viewBox="{_fmt(b[0])} {_fmt(b[1])} '
        f'{_fmt(b[2] - b[0])} {_fmt(b[3] - b[1])}">',
        # flip y so +y points up
        f'<g transform="translate(0,{_fmt(b[1] + b[3])}) scale(1,-1)">',
        f'<rect x="{_fmt(b[0])}" y="{_fmt(b[1])}" width="{_fmt(b[2] - b[0])}" '
        f'height="{_fmt(b[3] - b[1])}" fill="white" stroke="black" stroke-width="0.1"/>',
    ]
    for ob in scenario.workspace.obstacles:
        parts.append(_region_svg(ob, 'fill="#d9d9d9" stroke="black" stroke-width="0.08"'))
    for robot in scenario.robots:
        color = PALETTE[(robot.id - 1) % len(PALETTE)]
        parts.append(
            _region_svg(
                robot.goal,
                f'fill="{color}" fill-opacity="0.12" stroke="{color}" '
                'stroke-width="0.04" stroke-dasharray="0.3,0.2"',
            )
        )
    if paths is not None:
        for p in paths:
            if p is None:
                continue
            color = PALETTE[(p.robot_id - 1) % len(PALETTE)]
            pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in p.vertices)
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="0.12"/>'
            )
    for robot in scenario.robots:
        color = PALETTE[(robot.id - 1) % len(PALETTE)]
        x, y = robot.x_init
        parts.append(
            f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(3 * robot.radius)}" '
            f'fill="none" stroke="{color}" stroke-width="0.12"/>'
        )
    if paths is not None:
        for p in paths:
            if p is None:
                continue
            color = PALETTE[(p.robot_id - 1) % len(PALETTE)]
            x, y = p.vertices[-1]
            s = 1.5 * p.radius
            parts.append(
                f'<path d="M {_fmt(x - s)} {_fmt(y - s)} L {_fmt(x + s)} {_fmt(y + s)} '
                f'M {_fmt(x - s)} {_fmt(y + s)} L {_fmt(x + s)} {_fmt(y - s)}" '
                f'stroke="{color}" stroke-width="0.14" fill="none"/>'
            )
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
