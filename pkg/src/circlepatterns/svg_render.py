"""Deterministic SVG 1.1 rendering of developed circle patterns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cell_complex import DiskComplex
from .pattern_engine import Layout, PatternSolution


@dataclass
class RenderOptions:
    show_circles: bool = True
    show_primal: bool = True
    show_dual: bool = False
    color_by: np.ndarray | None = None  # per-face values mapped to fill opacity
    stroke_scale: float = 1.0


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def render_svg(l: Layout, pattern: PatternSolution | None = None,
               options: RenderOptions | None = None) -> str:
    """Render a layout (one circle per face, optional edge polylines).

    The viewBox is fitted to the drawn geometry with a 5% margin; the
    y axis is flipped so the mathematical orientation is preserved.
    Output is byte-identical for identical inputs.
    """
    options = options or RenderOptions()
    c = pattern.complex if pattern is not None else None
    radii = pattern.radii if pattern is not None else None

    xs, ys = [], []
    for z in l.z_V:
        if np.isfinite(z):
            xs.append(z.real)
            ys.append(-z.imag)
    if radii is not None:
        for f, z in enumerate(l.z_F):
            if np.isfinite(z):
                xs.extend([z.real - radii[f], z.real + radii[f]])
                ys.extend([-z.imag - radii[f], -z.imag + radii[f]])
    if not xs:
        return ('<?xml version="1.0" encoding="UTF-8"?>\n'
                '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                'viewBox="0 0 1 1"></svg>\n')

    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    w, h = max(x1 - x0, 1e-12), max(y1 - y0, 1e-12)
    mx, my = 0.05 * w, 0.05 * h
    vb = (x0 - mx, y0 - my, w + 2 * mx, h + 2 * my)
    stroke = 0.002 * max(w, h) * options.stroke_scale

    parts = ['<?xml version="1.0" encoding="UTF-8"?>']
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_fmt(vb[0])} {_fmt(vb[1])} {_fmt(vb[2])} {_fmt(vb[3])}">'
    )

    fill_opacity = None
    if options.color_by is not None:
        vals = np.asarray(options.color_by, dtype=float)
        lo, hi = np.nanmin(vals), np.nanmax(vals)
        span = hi - lo if hi > lo else 1.0
        fill_opacity = 0.05 + 0.85 * (vals - lo) / span

    if options.show_circles and radii is not None:
        parts.append(f'<g fill="none" stroke="#1f4f84" stroke-width="{_fmt(stroke)}">')
        for f in range(len(radii)):
            z = l.z_F[f]
            if not np.isfinite(z):
                continue
            attrs = f'cx="{_fmt(z.real)}" cy="{_fmt(-z.imag)}" r="{_fmt(radii[f])}"'
            if fill_opacity is not None:
                attrs += f' fill="#4f8fc0" fill-opacity="{_fmt(fill_opacity[f])}"'
            parts.append(f"<circle {attrs}/>")
        parts.append("</g>")

    if options.show_primal and c is not None:
        parts.append(f'<g stroke="#222222" stroke-width="{_fmt(stroke)}" stroke-linecap="round">')
        for e in range(c.num_edges):
            za, zb = l.z_V[c.edge_tail[e]], l.z_V[c.edge_head[e]]
            if np.isfinite(za) and np.isfinite(zb):
                parts.append(
                    f'<line x1="{_fmt(za.real)}" y1="{_fmt(-za.imag)}" '
                    f'x2="{_fmt(zb.real)}" y2="{_fmt(-zb.imag)}"/>'
                )
        parts.append("</g>")

    if options.show_dual and c is not None:
        parts.append(f'<g stroke="#b03030" stroke-width="{_fmt(stroke)}" stroke-dasharray="{_fmt(3 * stroke)}">')
        for e in c.interior_edges:
            za, zb = l.z_F[c.edge_left[e]], l.z_F[c.edge_right[e]]
            if np.isfinite(za) and np.isfinite(zb):
                parts.append(
                    f'<line x1="{_fmt(za.real)}" y1="{_fmt(-za.imag)}" '
                    f'x2="{_fmt(zb.real)}" y2="{_fmt(-zb.imag)}"/>'
                )
        parts.append("</g>")

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
