"""Minimal SVG plots: line charts and a masked heat map.

Diagnostic figures only; nothing here feeds back into CSV output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#000000")
PLOT_KINDS = ("impedance_curve", "coupling_contour", "radial_power", "radial_temperature",
              "ghsv_vs_beta", "efficiency_vs_beta", "axial_temperature")

W, H = 640, 440
ML, MR, MT, MB = 70, 150, 30, 50


@dataclass
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]
    dashed: bool = False


@dataclass
class PlotSpec:
    kind: str
    title: str
    xlabel: str
    ylabel: str
    xlog: bool = False
    ylog: bool = False
    series: list = field(default_factory=list)
    vlines: list = field(default_factory=list)  # (x, label)

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise ValueError(f"unknown plot kind {self.kind!r}")


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
        return [10.0**k for k in range(a, b + 1) if lo <= 10.0**k <= hi] or [lo, hi]
    return list(np.linspace(lo, hi, 6))


def _fmt(v):
    return f"{v:.3g}"


def line_plot(spec: PlotSpec) -> str:
    pts = [(x, y) for s in spec.series for x, y in zip(s.x, s.y)
           if np.isfinite(x) and np.isfinite(y) and (not spec.xlog or x > 0) and (not spec.ylog or y > 0)]
    if not pts:
        raise ValueError("plot has no finite data")
    xs, ys = zip(*pts)
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x0 == x1:
        x0, x1 = x0 * 0.9 - 1e-12, x1 * 1.1 + 1e-12
    if y0 == y1:
        y0, y1 = y0 * 0.9 - 1e-12, y1 * 1.1 + 1e-12
    tx = (lambda v: math.log10(v)) if spec.xlog else (lambda v: v)
    ty = (lambda v: math.log10(v)) if spec.ylog else (lambda v: v)
    pw, ph = W - ML - MR, H - MT - MB

    def px(v):
        return ML + pw * (tx(v) - tx(x0)) / (tx(x1) - tx(x0))

    def py(v):
        return MT + ph * (1 - (ty(v) - ty(y0)) / (ty(y1) - ty(y0)))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">',
           f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
           f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="13">{escape(spec.title)}</text>',
           f'<text x="{ML + pw / 2}" y="{H - 10}" text-anchor="middle">{escape(spec.xlabel)}</text>',
           f'<text x="15" y="{MT + ph / 2}" text-anchor="middle" transform="rotate(-90 15 {MT + ph / 2})">{escape(spec.ylabel)}</text>']
    for t in _ticks(x0, x1, spec.xlog):
        out.append(f'<line x1="{px(t):.1f}" y1="{MT + ph}" x2="{px(t):.1f}" y2="{MT + ph + 5}" stroke="#444"/>'
                   f'<text x="{px(t):.1f}" y="{MT + ph + 17}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(y0, y1, spec.ylog):
        out.append(f'<line x1="{ML - 5}" y1="{py(t):.1f}" x2="{ML}" y2="{py(t):.1f}" stroke="#444"/>'
                   f'<text x="{ML - 8}" y="{py(t) + 4:.1f}" text-anchor="end">{_fmt(t)}</text>')
    for x, label in spec.vlines:
        if x0 <= x <= x1:
            out.append(f'<line x1="{px(x):.1f}" y1="{MT}" x2="{px(x):.1f}" y2="{MT + ph}" stroke="#888" stroke-dasharray="2,3"/>'
                       f'<text x="{px(x) + 3:.1f}" y="{MT + 12}">{escape(label)}</text>')
    for k, s in enumerate(spec.series):
        colour = PALETTE[k % len(PALETTE)]
        seg = [(px(x), py(y)) for x, y in zip(s.x, s.y)
               if np.isfinite(x) and np.isfinite(y) and (not spec.xlog or x > 0) and (not spec.ylog or y > 0)]
        if not seg:
            continue
        d = " ".join(f"{a:.1f},{b:.1f}" for a, b in seg)
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        out.append(f'<polyline points="{d}" fill="none" stroke="{colour}" stroke-width="1.8"{dash}/>')
        for a, b in seg:
            out.append(f'<circle cx="{a:.1f}" cy="{b:.1f}" r="2" fill="{colour}"/>')
        ly = MT + 14 + 16 * k
        out.append(f'<line x1="{W - MR + 10}" y1="{ly - 4}" x2="{W - MR + 30}" y2="{ly - 4}" stroke="{colour}" stroke-width="2"{dash}/>'
                   f'<text x="{W - MR + 35}" y="{ly}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def heatmap(x, y, z, mask, *, title, xlabel, ylabel, xlog=True, ylog=True) -> str:
    """Cell map of ``z`` (shape len(y) x len(x)) with masked cells hatched."""
    z = np.asarray(z, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    pw, ph = W - ML - MR, H - MT - MB
    nx, ny = len(x), len(y)
    cw, ch = pw / nx, ph / ny
    finite = z[np.isfinite(z)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    span = hi - lo or 1.0
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">',
           '<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">'
           '<line x1="0" y1="0" x2="0" y2="6" stroke="#000" stroke-width="1.5"/></pattern></defs>',
           f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
           f'<text x="{ML + pw / 2}" y="{H - 10}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="15" y="{MT + ph / 2}" text-anchor="middle" transform="rotate(-90 15 {MT + ph / 2})">{escape(ylabel)}</text>']
    for j in range(ny):
        for i in range(nx):
            v = z[j, i]
            t = 0.0 if not np.isfinite(v) else (v - lo) / span
            r, g, b = int(255 * t), int(80 + 120 * (1 - abs(2 * t - 1))), int(255 * (1 - t))
            X, Y = ML + i * cw, MT + (ny - 1 - j) * ch
            out.append(f'<rect x="{X:.1f}" y="{Y:.1f}" width="{cw + 0.5:.1f}" height="{ch + 0.5:.1f}" fill="rgb({r},{g},{b})"/>')
            if mask[j, i]:
                out.append(f'<rect x="{X:.1f}" y="{Y:.1f}" width="{cw + 0.5:.1f}" height="{ch + 0.5:.1f}" fill="url(#hatch)"/>')
    for i in range(0, nx, max(nx // 6, 1)):
        out.append(f'<text x="{ML + (i + 0.5) * cw:.1f}" y="{MT + ph + 15}" text-anchor="middle">{_fmt(x[i])}</text>')
    for j in range(0, ny, max(ny // 6, 1)):
        out.append(f'<text x="{ML - 5}" y="{MT + (ny - j - 0.5) * ch + 4:.1f}" text-anchor="end">{_fmt(y[j])}</text>')
    out.append(f'<text x="{W - MR + 10}" y="{MT + 14}">low {_fmt(lo)}</text>')
    out.append(f'<text x="{W - MR + 10}" y="{MT + 30}">high {_fmt(hi)}</text>')
    out.append(f'<rect x="{W - MR + 10}" y="{MT + 40}" width="14" height="14" fill="url(#hatch)" stroke="#000"/>'
               f'<text x="{W - MR + 30}" y="{MT + 51}">above SRF</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
