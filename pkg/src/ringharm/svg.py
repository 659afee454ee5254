"""SVG images of parameter grids under a map."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from . import geometry as geo
from .domains import Annulus, RingDomain
from .validate import _window


def _parameter_curves(d: RingDomain, resolution: int, n_lines: int) -> list[np.ndarray]:
    """Circles and rays for annuli, horizontal and vertical lines otherwise."""
    if isinstance(d, Annulus):
        curves = []
        theta = np.linspace(0.0, 2 * np.pi, resolution)
        for k in range(1, n_lines + 1):
            r = d.r * (d.R / d.r) ** (k / (n_lines + 1))
            curves.append(d.center + r * np.exp(1j * theta))
        rho = np.linspace(d.r, d.R, resolution + 2)[1:-1]
        for k in range(2 * n_lines):
            curves.append(d.center + rho * np.exp(2j * np.pi * k / (2 * n_lines)))
        return curves
    c, half, _ = _window(d)
    s = np.linspace(-half, half, resolution)
    offs = np.linspace(-half, half, 2 * n_lines + 1)[1:-1]
    return [c + s + 1j * o for o in offs] + [c + o + 1j * s for o in offs]


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    out, start = [], None
    for i, ok in enumerate(mask):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            out.append((start, i))
            start = None
    if start is not None:
        out.append((start, len(mask)))
    return out


def render_grid_svg(f, source: RingDomain, resolution: int = 200, n_lines: int = 8,
                    size: int = 600, title: str = "grid image") -> str:
    """SVG 1.1 document with the images of parameter curves of ``source``.

    Points outside the source or where ``f`` fails or is not finite are left
    as gaps; their number is recorded in a comment.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    inner, outer = source.complement_sets()
    sets = inner + outer
    pieces, gaps = [], 0
    for curve in _parameter_curves(source, resolution, n_lines):
        inside = ~geo.components_contains(sets, curve)
        img = np.full(curve.shape, complex(math.nan, math.nan))
        with np.errstate(all="ignore"):
            try:
                img[inside] = np.asarray(f(curve[inside]), dtype=complex)
            except (ValueError, ArithmeticError):
                for i in np.flatnonzero(inside):
                    try:
                        img[i] = complex(f(curve[i]))
                    except (ValueError, ArithmeticError):
                        pass
        ok = np.isfinite(img)
        gaps += int(np.sum(inside & ~ok))
        pieces += [img[a:b] for a, b in _runs(ok) if b - a >= 2]

    pts = np.concatenate(pieces) if pieces else np.array([0j])
    # clip far-away images so that one stray point does not shrink the picture
    lo_x, hi_x = np.percentile(pts.real, [1, 99])
    lo_y, hi_y = np.percentile(pts.imag, [1, 99])
    span = max(hi_x - lo_x, hi_y - lo_y, 1e-12)
    pad = 0.05 * span
    scale = size / (span + 2 * pad)

    def xy(w):
        return (w.real - lo_x + pad) * scale, (hi_y + pad - w.imag) * scale

    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             '<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" '
             '"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">',
             f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f"<title>{escape(title)}</title>",
             f"<!-- evaluation gaps: {gaps} points -->",
             '<g fill="none" stroke="#1f4e79" stroke-width="0.8">']
    for piece in pieces:
        coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in zip(*xy(piece)))
        lines.append(f'<polyline points="{coords}"/>')
    lines += ["</g>", "</svg>"]
    return "\n".join(lines) + "\n"


def render_spec_svg(spec, resolution: int = 200, n_lines: int = 8) -> str:
    from .construct import evaluate_map
    if spec.source is None:
        raise ValueError("the map has no source domain")
    return render_grid_svg(lambda z: evaluate_map(spec, z), spec.source, resolution, n_lines)
