"""SVG 1.1 drawings of a graph and its deformation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .embeddedness import DeformedGraph, deformed_graph
from .errors import PreconditionError
from .horizontal import deformation_space, is_balanced
from .model import Configuration, GeometricGraph

PADDING = 0.2
PIXELS_PER_UNIT = 200.0
MIN_EXTENT = 1.0
LIGHT = "#b8c4d6"
DARK = "#1b1f2a"


@dataclass(frozen=True)
class Viewport:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin


def viewport(points) -> Viewport:
    """Bounding box of ``points`` padded by 20% on each side."""
    pts = np.asarray(list(points), dtype=complex)
    x0, x1 = float(pts.real.min()), float(pts.real.max())
    y0, y1 = float(pts.imag.min()), float(pts.imag.max())
    # a point or a segment still gets an area to draw rays in
    if x1 - x0 < MIN_EXTENT:
        c = 0.5 * (x0 + x1)
        x0, x1 = c - MIN_EXTENT / 2, c + MIN_EXTENT / 2
    if y1 - y0 < MIN_EXTENT:
        c = 0.5 * (y0 + y1)
        y0, y1 = c - MIN_EXTENT / 2, c + MIN_EXTENT / 2
    px, py = PADDING * (x1 - x0), PADDING * (y1 - y0)
    return Viewport(x0 - px, x1 + px, y0 - py, y1 + py)


def clip_ray(p: complex, theta: float, box: Viewport) -> complex:
    """Point where the ray from ``p`` at angle ``theta`` leaves ``box``."""
    d = complex(math.cos(theta), math.sin(theta))
    ts = []
    if d.real > 1e-15:
        ts.append((box.xmax - p.real) / d.real)
    elif d.real < -1e-15:
        ts.append((box.xmin - p.real) / d.real)
    if d.imag > 1e-15:
        ts.append((box.ymax - p.imag) / d.imag)
    elif d.imag < -1e-15:
        ts.append((box.ymin - p.imag) / d.imag)
    t = max(0.0, min(ts)) if ts else 0.0
    return p + t * d


def _fmt(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


class _Canvas:
    def __init__(self, box: Viewport):
        self.box = box
        self.w = box.width * PIXELS_PER_UNIT
        self.h = box.height * PIXELS_PER_UNIT
        self.items: list[str] = []

    def xy(self, z: complex) -> tuple[str, str]:
        x = (z.real - self.box.xmin) * PIXELS_PER_UNIT
        y = (self.box.ymax - z.imag) * PIXELS_PER_UNIT
        return _fmt(x), _fmt(y)

    def line(self, a: complex, b: complex, cls: str) -> None:
        (x1, y1), (x2, y2) = self.xy(a), self.xy(b)
        self.items.append(f'<line class="{cls}" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>')

    def dot(self, z: complex, cls: str) -> None:
        x, y = self.xy(z)
        self.items.append(f'<circle class="{cls}" cx="{x}" cy="{y}" r="4"/>')

    def text(self, i: int, s: str) -> None:
        self.items.append(f'<text x="8" y="{18 + 16 * i}">{escape(s)}</text>')

    def draw_graph(self, graph: GeometricGraph, pos, ray_theta, cls: str) -> None:
        self.items.append(f'<g class="{cls}">')
        for e in range(graph.n_edges):
            self.line(pos[graph.edge_tail[e]], pos[graph.edge_head[e]], cls)
        for k, r in enumerate(graph.rays):
            p = pos[graph.vertex_of[r]]
            self.line(p, clip_ray(p, float(ray_theta[k]), self.box), cls)
        for v in range(graph.n_vertices):
            self.dot(pos[v], cls)
        self.items.append("</g>")

    def svg(self) -> str:
        head = [
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{_fmt(self.w)}" height="{_fmt(self.h)}" '
            f'viewBox="0 0 {_fmt(self.w)} {_fmt(self.h)}">',
            "<style>",
            f"line.original {{ stroke: {LIGHT}; stroke-width: 6; stroke-linecap: round; }}",
            f"circle.original {{ fill: {LIGHT}; }}",
            f"line.deformed {{ stroke: {DARK}; stroke-width: 1.5; }}",
            f"circle.deformed {{ fill: {DARK}; }}",
            "text { font-family: monospace; font-size: 12px; fill: #333333; }",
            "</style>",
            f'<rect x="0" y="0" width="{_fmt(self.w)}" height="{_fmt(self.h)}" fill="white"/>',
        ]
        return "\n".join(head + self.items + ["</svg>"]) + "\n"


def render_svg(config: Configuration, eps: float = 0.0) -> str:
    """Original graph in a light stroke, the graph at ``eps`` on top in a dark stroke.

    Graphs that are not balanced and rigid are drawn at the limit only,
    with a note saying why.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    g = config.graph
    notes = [config.name or "configuration", f"eps = {eps:g}"]
    deformed: DeformedGraph | None = None
    if not is_balanced(g):
        notes.append("not balanced: limit graph only")
    elif not deformation_space(config).rigid:
        notes.append("not rigid: limit graph only")
    else:
        try:
            deformed = deformed_graph(config, eps)
        except PreconditionError as exc:
            notes.append(f"no deformation: {exc}")
        else:
            if deformed.tau:
                notes.append(f"tau = {deformed.tau:.3e}")
            if g.n_rays:
                turn = np.abs(np.angle(np.exp(1j * (deformed.ray_angles - g.ray_theta))))
                notes.append(f"max ray turn = {float(turn.max()):.3e} rad")
            notes.extend(deformed.notes)

    pts = list(g.positions)
    if deformed is not None:
        pts += list(deformed.positions)
    canvas = _Canvas(viewport(pts))
    canvas.draw_graph(g, g.positions, g.ray_theta, "original")
    if deformed is not None:
        canvas.draw_graph(g, deformed.positions, deformed.ray_angles, "deformed")
    for i, s in enumerate(notes):
        canvas.text(i, s)
    return canvas.svg()
