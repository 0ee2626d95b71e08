"""Minimal self-contained SVG line plots (linear or log-log)."""

from __future__ import annotations

import math
from typing import Mapping
from xml.sax.saxutils import escape

import numpy as np

from .impact import ImpactPath
from .regimes import SweepResult

__all__ = ["emit_plot"]

WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=80, right=20, top=40, bottom=60)
# discrete green, continuous blue, then a fallback cycle
COLORS = {"discrete": "#2ca02c", "continuous": "#1f77b4"}
CYCLE = ("#d62728", "#9467bd", "#8c564b", "#ff7f0e")


def _series_from(data):
    if isinstance(data, SweepResult):
        rate = data.column("rate")
        series = {
            "discrete": (rate, data.column("cost_discrete")),
            "continuous": (rate, data.column("cost_continuous")),
        }
        series = {k: v for k, v in series.items() if not np.all(np.isnan(v[1]))}
        return series, True, "trading rate q [ADV/day]", "cost per share [dimensionless]"
    if isinstance(data, ImpactPath):
        return (
            {"impact": (data.times, data.h_values)},
            False,
            "time t [days]",
            "impact h [dimensionless]",
        )
    if isinstance(data, Mapping):
        return dict(data), False, "x", "y"
    raise TypeError(f"cannot plot {type(data).__name__}")


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
        return [10.0**e for e in range(a, b + 1)]
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / 5)) if span > 0 else 1.0
    for m in (1, 2, 5, 10):
        if span / (step * m) <= 6:
            step *= m
            break
    first = math.ceil(lo / step) * step
    return [first + i * step for i in range(int((hi - first) / step + 1e-9) + 1)]


def _inside(t, lo, hi):
    eps = 1e-9 * max(abs(lo), abs(hi))
    return lo - eps <= t <= hi + eps


def emit_plot(data, log: bool | None = None, title: str | None = None, xlabel=None, ylabel=None) -> str:
    """Render a sweep, an impact path or ``{name: (x, y)}`` series as SVG text.

    Sweeps default to log-log axes.  Raises ``ValueError`` for an empty
    series, fewer than two points, or a nonpositive value on a log axis.
    """
    series, default_log, dx, dy = _series_from(data)
    log = default_log if log is None else log
    xlabel, ylabel = xlabel or dx, ylabel or dy
    if not series:
        raise ValueError("nothing to plot: no series")

    clean = {}
    for name, (x, y) in series.items():
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if x.size == 0:
            raise ValueError(f"series {name!r} is empty")
        if x.shape != y.shape:
            raise ValueError(f"series {name!r}: x and y lengths differ")
        if x.size < 2:
            raise ValueError(f"series {name!r} needs at least 2 points")
        if log:
            bad = np.flatnonzero((x <= 0) | (y <= 0))
            if bad.size:
                i = int(bad[0])
                raise ValueError(
                    f"series {name!r} row {i}: nonpositive value ({x[i]!r}, {y[i]!r}) on log axes"
                )
        clean[name] = (x, y)

    xs = np.concatenate([v[0] for v in clean.values()])
    ys = np.concatenate([v[1] for v in clean.values()])
    f = np.log10 if log else (lambda v: np.asarray(v, dtype=float))
    x0, x1 = float(f(xs.min())), float(f(xs.max()))
    y0, y1 = float(f(ys.min())), float(f(ys.max()))
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (f(v) - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN["top"] + ph - (f(v) - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="#000"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle">{escape(title)}</text>')

    lo_x, hi_x = (10**x0, 10**x1) if log else (x0, x1)
    lo_y, hi_y = (10**y0, 10**y1) if log else (y0, y1)
    for t in _ticks(lo_x, hi_x, log):
        if _inside(t, lo_x, hi_x):
            X = px(t)
            out.append(f'<line x1="{X:.2f}" y1="{MARGIN["top"] + ph}" x2="{X:.2f}" '
                       f'y2="{MARGIN["top"] + ph + 5}" stroke="#000"/>')
            out.append(f'<text x="{X:.2f}" y="{MARGIN["top"] + ph + 18}" '
                       f'text-anchor="middle">{t:g}</text>')
    for t in _ticks(lo_y, hi_y, log):
        if _inside(t, lo_y, hi_y):
            Y = py(t)
            out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{Y:.2f}" x2="{MARGIN["left"]}" '
                       f'y2="{Y:.2f}" stroke="#000"/>')
            out.append(f'<text x="{MARGIN["left"] - 8}" y="{Y + 4:.2f}" '
                       f'text-anchor="end">{t:g}</text>')

    out.append(f'<text x="{MARGIN["left"] + pw / 2:.1f}" y="{HEIGHT - 15}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{MARGIN["top"] + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {MARGIN["top"] + ph / 2:.1f})">{escape(ylabel)}</text>')

    extra = iter(CYCLE)
    for i, (name, (x, y)) in enumerate(clean.items()):
        color = COLORS.get(name) or next(extra, "#000")
        dash = ' stroke-dasharray="6 3"' if name == "continuous" else ""
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2"{dash} '
                   f'points="{pts}"><title>{escape(name)}</title></polyline>')
        ly = MARGIN["top"] + 16 + 16 * i
        lx = MARGIN["left"] + 10
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
