"""Ternary SVG plots of three-strategy trajectories."""
from __future__ import annotations

from xml.sax.saxutils import quoteattr

import numpy as np

SIZE = 400.0
MARGIN = 30.0
H = np.sqrt(3.0) / 2.0


class UnsupportedDimensionError(ValueError):
    pass


def ternary(x) -> np.ndarray:
    """Map points of the 3-simplex to the plane: ``u = x2 + x3/2``, ``v = sqrt(3)/2 x3``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.column_stack([x[:, 1] + 0.5 * x[:, 2], H * x[:, 2]])


def to_svg_coords(uv) -> np.ndarray:
    uv = np.atleast_2d(uv)
    return np.column_stack([MARGIN + SIZE * uv[:, 0], MARGIN + SIZE * (H - uv[:, 1])])


def set_boundary(cset, n=720) -> np.ndarray:
    """Boundary of a convex subset of the 3-simplex, traced by projecting a far circle."""
    inner = cset.project(np.full(3, 1.0 / 3.0))
    e1 = np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0)
    e2 = np.array([1.0, 1.0, -2.0]) / np.sqrt(6.0)
    angles = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    pts = [cset.project(inner + 3.0 * (np.cos(a) * e1 + np.sin(a) * e2)) for a in angles]
    return np.array(pts)


def _points(xy):
    return " ".join(f"{a:.4f},{b:.4f}" for a, b in xy)


def _marker(kind, xy, color):
    a, b = xy
    if kind == "final":
        r = 5.0
        return (f'<path class="final" data-x="{a:.6f}" data-y="{b:.6f}" stroke={quoteattr(color)} '
                f'stroke-width="2" fill="none" d="M{a - r:.4f},{b - r:.4f} L{a + r:.4f},{b + r:.4f} '
                f'M{a - r:.4f},{b + r:.4f} L{a + r:.4f},{b - r:.4f}"/>')
    return (f'<circle class="{kind}" cx="{a:.6f}" cy="{b:.6f}" r="4" fill={quoteattr(color)} '
            f'stroke="none"/>')


def render_svg(social, channels=(), target=None, title="") -> str:
    social = np.atleast_2d(np.asarray(social, dtype=float))
    if social.shape[1] != 3:
        raise UnsupportedDimensionError(f"ternary plots need 3 strategies, got {social.shape[1]}")
    width = SIZE + 2 * MARGIN
    height = SIZE * H + 2 * MARGIN
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0f}" '
             f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">']
    if title:
        parts.append(f"<title>{title}</title>")
    corners = to_svg_coords(ternary(np.eye(3)))
    parts.append(f'<polygon class="simplex" points="{_points(corners)}" fill="white" stroke="black" '
                 f'stroke-width="1.5"/>')
    for label, (a, b), dy in zip(("R1", "R2", "R3"), corners, (15, 15, -8)):
        parts.append(f'<text x="{a:.2f}" y="{b + dy:.2f}" font-size="12" text-anchor="middle">{label}</text>')
    if target is not None:
        boundary = to_svg_coords(ternary(set_boundary(target)))
        parts.append(f'<polygon class="target" points="{_points(boundary)}" fill="#cce5ff" '
                     f'fill-opacity="0.6" stroke="#3366cc" stroke-width="1"/>')

    series = [(np.atleast_2d(c), "channel", "#d4a017", 1.0) for c in channels]
    series.append((social, "social", "#1f3fbf", 3.0))
    for traj, cls, color, width_px in series:
        xy = to_svg_coords(ternary(traj))
        if np.abs(traj - traj[0]).max() <= 1e-12:
            parts.append(_marker("rest", xy[0], "#888888").replace('class="rest"', f'class="rest {cls}"'))
            continue
        parts.append(f'<polyline class="{cls}" points="{_points(xy)}" fill="none" stroke={quoteattr(color)} '
                     f'stroke-width="{width_px}"/>')
        parts.append(_marker("initial", xy[0], "#2ca02c"))
        parts.append(_marker("final", xy[-1], "#d62728"))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plot(traj, path, target=None) -> None:
    """Write the social trajectory and every three-strategy final-layer group to ``path``."""
    h = traj.config.hierarchy
    if traj.x.shape[1] != 3:
        raise UnsupportedDimensionError(f"ternary plots need 3 strategies, got {traj.x.shape[1]}")
    last = h.num_layers - 1
    channels = []
    if last > 0:
        channels = [s for s in traj.states[last] if s.shape[1] == 3]
    with open(path, "w") as fh:
        fh.write(render_svg(traj.x, channels, target=target, title=traj.config.name))
