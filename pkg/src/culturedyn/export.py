"""CSV and SVG renderings of trajectories. Output is byte-deterministic."""

from __future__ import annotations

import csv
import io
import math
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import ValidationError
from .integrator import TrajectorySet
from .model import Scenario

VARIABLES = ("D", "S", "H")


def _g9(value: float) -> str:
    return format(float(value), ".9g")


def csv_header(n_cultures: int) -> list[str]:
    return ["t"] + [f"{v}_{k}" for k in range(n_cultures) for v in VARIABLES]


def export_trajectory_csv(trajectory: TrajectorySet) -> str:
    """``t,D_0,S_0,H_0[,D_1,...]`` with 9 significant digits, one row per sample."""
    n = trajectory.n_cultures
    lines = [",".join(csv_header(n))]
    series = (trajectory.D, trajectory.S, trajectory.H)
    for i, t in enumerate(trajectory.times):
        row = [_g9(t)]
        for k in range(n):
            row.extend(_g9(arr[i, k]) for arr in series)
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def read_trajectory_csv(text: str, scenario: Scenario) -> TrajectorySet:
    """Parse CSV written by :func:`export_trajectory_csv` back into a trajectory.

    ``scenario`` supplies the culture count and is attached to the result.
    """
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValidationError("empty CSV", field="observed")
    expected = csv_header(scenario.n_cultures)
    header = [h.strip() for h in rows[0]]
    if header != expected:
        raise ValidationError(
            f"CSV header {','.join(header)} does not match {','.join(expected)}", field="observed")
    try:
        data = np.array([[float(v) for v in row] for row in rows[1:] if row], dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(f"CSV holds a non-numeric value: {exc}", field="observed") from None
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != len(expected):
        raise ValidationError("CSV rows have the wrong number of columns", field="observed")
    if not np.all(np.isfinite(data)):
        raise ValidationError("CSV holds non-finite values", field="observed")
    n = scenario.n_cultures
    cols = data[:, 1:].reshape(len(data), n, 3)
    return TrajectorySet(scenario, data[:, 0], cols[:, :, 0], cols[:, :, 1], cols[:, :, 2])


# -- SVG ---------------------------------------------------------------------

WIDTH, HEIGHT = 800, 600
LEFT, RIGHT, TOP, BOTTOM = 80, 160, 50, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


def _extent(values: np.ndarray) -> tuple[float, float]:
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _select(trajectory: TrajectorySet, name: str) -> np.ndarray:
    var, _, idx = name.partition("_")
    if var not in VARIABLES or not idx.isdigit() or int(idx) >= trajectory.n_cultures:
        raise ValidationError(f"unknown series {name!r}; use e.g. D_0, S_1, H_0", field="series_selection")
    return getattr(trajectory, var)[:, int(idx)]


def render_svg_plot(trajectory: TrajectorySet, series_selection: Sequence[str]) -> str:
    """Standalone 800x600 line chart of the selected series (names like ``D_0``)."""
    names = list(series_selection)
    if not names:
        raise ValidationError("empty series selection", field="series_selection")
    if len(trajectory) == 0:
        raise ValidationError("empty trajectory", field="trajectory")
    data = [_select(trajectory, name) for name in names]
    t = trajectory.times
    x_lo, x_hi = _extent(t)
    y_lo, y_hi = _extent(np.concatenate(data))
    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM

    def sx(v):
        return LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v):
        return TOP + (y_hi - v) / (y_hi - y_lo) * plot_h

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>',
    ]
    for i in range(5):
        xv = x_lo + i * (x_hi - x_lo) / 4
        yv = y_lo + i * (y_hi - y_lo) / 4
        px, py = sx(xv), sy(yv)
        out.append(f'<line x1="{px:.3f}" y1="{TOP + plot_h:.3f}" x2="{px:.3f}" y2="{TOP + plot_h + 5:.3f}" stroke="black"/>')
        out.append(f'<text x="{px:.3f}" y="{TOP + plot_h + 20:.3f}" font-size="12" text-anchor="middle">{xv:.4g}</text>')
        out.append(f'<line x1="{LEFT - 5:.3f}" y1="{py:.3f}" x2="{LEFT:.3f}" y2="{py:.3f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8:.3f}" y="{py + 4:.3f}" font-size="12" text-anchor="end">{yv:.4g}</text>')
    out.append(f'<text x="{LEFT + plot_w / 2:.3f}" y="{HEIGHT - 10:.3f}" font-size="13" text-anchor="middle">t</text>')

    for n, (name, values) in enumerate(zip(names, data)):
        colour = PALETTE[n % len(PALETTE)]
        points = " ".join(f"{sx(a):.3f},{sy(b):.3f}" for a, b in zip(t, values))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{points}"/>')
        ly = TOP + 20 + 20 * n
        lx = WIDTH - RIGHT + 15
        out.append(f'<line x1="{lx:.3f}" y1="{ly:.3f}" x2="{lx + 25:.3f}" y2="{ly:.3f}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 32:.3f}" y="{ly + 4:.3f}" font-size="12">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def default_selection(trajectory: TrajectorySet) -> list[str]:
    return [f"D_{k}" for k in range(trajectory.n_cultures)]


def format_number(value: float) -> str:
    return "nan" if math.isnan(value) else _g9(value)
