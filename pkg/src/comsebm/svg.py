"""Minimal SVG emission for scatter-over-heatmap and quiver figures.

Output is plain text built from rect / circle / path / line primitives, with
coordinates rounded to a fixed number of decimals, so the same inputs always
give the same bytes.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

SIZE = 480           # drawing area in px (square)
MARGIN = 10
LOW_COLOR = (255, 255, 255)
HIGH_COLOR = (49, 54, 149)
DATA_COLOR = "#ff8c00"


def _fmt(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _ramp(values: np.ndarray, vmin: float, vmax: float) -> list[str]:
    span = vmax - vmin
    t = np.zeros_like(values) if span <= 0 else np.clip((values - vmin) / span, 0.0, 1.0)
    lo, hi = np.array(LOW_COLOR, float), np.array(HIGH_COLOR, float)
    rgb = np.rint(lo + t[..., None] * (hi - lo)).astype(int)
    return ["#%02x%02x%02x" % tuple(c) for c in rgb.reshape(-1, 3)]


class _Canvas:
    def __init__(self, low: float, high: float):
        if not high > low:
            raise ConfigError("plot bounds must satisfy high > low")
        self.low, self.high = float(low), float(high)
        self.scale = SIZE / (self.high - self.low)
        self.parts: list[str] = []

    def px(self, x, y):
        return (MARGIN + (np.asarray(x) - self.low) * self.scale,
                MARGIN + (self.high - np.asarray(y)) * self.scale)

    def render(self) -> str:
        total = SIZE + 2 * MARGIN
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" '
                f'viewBox="0 0 {total} {total}">')
        defs = ('<defs><marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" '
                'orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="black"/></marker></defs>')
        frame = (f'<rect class="frame" x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" '
                 f'fill="none" stroke="black"/>')
        return "\n".join([head, defs, *self.parts, frame, "</svg>"]) + "\n"


def heatmap_grid(fn, low: float, high: float, cells: int = 100):
    """Cell centres of a cells x cells grid and ``fn`` evaluated on them."""
    edge = np.linspace(low, high, cells + 1)
    c = 0.5 * (edge[:-1] + edge[1:])
    xx, yy = np.meshgrid(c, c)
    pts = np.stack([xx.ravel(), yy.ravel()], axis=-1)
    return pts, np.asarray(fn(pts), dtype=np.float64).reshape(cells, cells)


def scatter_svg(heat_fn, data=None, samples=None, low: float = -2.0, high: float = 2.5,
                cells: int = 100) -> str:
    """Heatmap of ``heat_fn`` with data as orange dots and samples as black crosses."""
    cv = _Canvas(low, high)
    _, vals = heatmap_grid(heat_fn, low, high, cells)
    colors = _ramp(vals, float(vals.min()), float(vals.max()))
    w = SIZE / cells
    cv.parts.append('<g class="heatmap" shape-rendering="crispEdges">')
    for k, col in enumerate(colors):
        i, j = divmod(k, cells)  # row i is y, column j is x
        x0, y1 = cv.px(low + j * (high - low) / cells, low + (i + 1) * (high - low) / cells)
        cv.parts.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y1)}" width="{_fmt(w)}" '
                        f'height="{_fmt(w)}" fill="{col}"/>')
    cv.parts.append("</g>")

    if data is not None and len(data):
        d = np.asarray(data, dtype=np.float64).reshape(-1, 2)
        px, py = cv.px(d[:, 0], d[:, 1])
        cv.parts.append(f'<g fill="{DATA_COLOR}">')
        cv.parts += [f'<circle class="data" cx="{_fmt(a)}" cy="{_fmt(b)}" r="2"/>'
                     for a, b in zip(px, py)]
        cv.parts.append("</g>")

    if samples is not None and len(samples):
        s = np.asarray(samples, dtype=np.float64).reshape(-1, 2)
        px, py = cv.px(s[:, 0], s[:, 1])
        r = 3.0
        cv.parts.append('<g stroke="black" stroke-width="1">')
        for a, b in zip(px, py):
            cv.parts.append(
                f'<path class="sample" d="M{_fmt(a - r)},{_fmt(b - r)} L{_fmt(a + r)},{_fmt(b + r)} '
                f'M{_fmt(a - r)},{_fmt(b + r)} L{_fmt(a + r)},{_fmt(b - r)}"/>')
        cv.parts.append("</g>")
    return cv.render()


def quiver_svg(grad_fn, low: float = -1.5, high: float = 2.0, grid: int = 25) -> str:
    """Arrows of ``grad_fn`` on a grid x grid lattice.

    Every arrow is normalised to 0.8 of the grid spacing, so the figure shows
    direction only. Arrows that are exactly zero are drawn as dots.
    """
    cv = _Canvas(low, high)
    g = np.linspace(low, high, grid)
    xx, yy = np.meshgrid(g, g)
    pts = np.stack([xx.ravel(), yy.ravel()], axis=-1)
    v = np.asarray(grad_fn(pts), dtype=np.float64).reshape(-1, 2)
    n = np.linalg.norm(v, axis=1)
    cell = (high - low) / max(grid - 1, 1)
    v = v * (0.8 * cell / np.where(n > 0, n, 1.0))[:, None]

    cv.parts.append('<g stroke="black" stroke-width="1">')
    for p, d, length in zip(pts, v, n):
        x0, y0 = cv.px(*p)
        if length == 0:
            cv.parts.append(f'<circle class="arrow-dot" cx="{_fmt(x0)}" cy="{_fmt(y0)}" r="1"/>')
            continue
        x1, y1 = cv.px(*(p + d))
        cv.parts.append(f'<line class="arrow" x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" '
                        f'y2="{_fmt(y1)}" marker-end="url(#head)"/>')
    cv.parts.append("</g>")
    return cv.render()
