"""Two-panel SVG rendering of a trajectory CSV, written by hand.

Left panel: the dual path (x_0, y_0).  Right panel: energy and modified
energy against the step index.  Output depends only on the CSV contents.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

from .errors import MissingColumnError

WIDTH, HEIGHT = 800, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 60, 20, 30, 40
PANEL_GAP = 60
FONT = 12
REQUIRED = ("step", "x_0", "y_0", "energy", "modified_energy")
MAX_MARKERS = 400


def _num(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.2e}"
    return f"{v:.4g}"


class _Axes:
    """Linear map from data to pixel coordinates inside one panel."""

    def __init__(self, left, top, width, height, xs, ys):
        self.left, self.top, self.width, self.height = left, top, width, height
        self.x0, self.x1 = _padded_range(xs)
        self.y0, self.y1 = _padded_range(ys)

    def px(self, x):
        return self.left + (x - self.x0) / (self.x1 - self.x0) * self.width

    def py(self, y):
        return self.top + self.height - (y - self.y0) / (self.y1 - self.y0) * self.height

    def frame(self, title, xlabel, ylabel) -> list[str]:
        l, t, w, h = self.left, self.top, self.width, self.height
        out = [
            f'<rect x="{_num(l)}" y="{_num(t)}" width="{_num(w)}" height="{_num(h)}" fill="none" stroke="#000" stroke-width="1"/>',
            f'<text x="{_num(l + w / 2)}" y="{_num(t - 10)}" text-anchor="middle">{escape(title)}</text>',
            f'<text x="{_num(l + w / 2)}" y="{_num(t + h + 32)}" text-anchor="middle">{escape(xlabel)}</text>',
            f'<text x="{_num(l - 45)}" y="{_num(t + h / 2)}" text-anchor="middle" '
            f'transform="rotate(-90 {_num(l - 45)} {_num(t + h / 2)})">{escape(ylabel)}</text>',
        ]
        for v in (self.x0, self.x1):
            out.append(f'<text x="{_num(self.px(v))}" y="{_num(t + h + 15)}" text-anchor="middle">{_tick_label(v)}</text>')
        for v in (self.y0, self.y1):
            out.append(f'<text x="{_num(l - 4)}" y="{_num(self.py(v) + 4)}" text-anchor="end">{_tick_label(v)}</text>')
        return out

    def polyline(self, xs, ys, color) -> str:
        pts = " ".join(f"{_num(self.px(a))},{_num(self.py(b))}" for a, b in zip(xs, ys))
        return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>'

    def markers(self, xs, ys, color) -> list[str]:
        stride = max(1, math.ceil(len(xs) / MAX_MARKERS))
        return [
            f'<circle cx="{_num(self.px(a))}" cy="{_num(self.py(b))}" r="2" fill="{color}"/>'
            for a, b in list(zip(xs, ys))[::stride]
        ]


def _padded_range(values) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if hi - lo <= 1e-12 * max(1.0, abs(lo), abs(hi)):
        pad = max(1.0, abs(lo)) * 0.5
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def read_columns(csv_path) -> dict[str, list[float]]:
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED if c not in header]
        if missing:
            raise MissingColumnError(f"{csv_path}: missing columns {missing}")
        cols: dict[str, list[float]] = {c: [] for c in REQUIRED}
        for row in reader:
            for c in REQUIRED:
                cols[c].append(float(row[c]))
    if not cols["step"]:
        raise MissingColumnError(f"{csv_path}: no data rows")
    return cols


def render_svg(cols: dict[str, list[float]], title: str = "") -> str:
    panel_w = (WIDTH - MARGIN_L - MARGIN_R - PANEL_GAP - MARGIN_L) / 2
    panel_h = HEIGHT - MARGIN_T - MARGIN_B
    left = _Axes(MARGIN_L, MARGIN_T, panel_w, panel_h, cols["x_0"], cols["y_0"])
    energies = cols["energy"] + cols["modified_energy"]
    right = _Axes(2 * MARGIN_L + panel_w + PANEL_GAP, MARGIN_T, panel_w, panel_h, cols["step"], energies)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="{FONT}px">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>',
    ]
    if title:
        out.append(f'<title>{escape(title)}</title>')
    out += left.frame("dual trajectory", "x_0", "y_0")
    out.append(left.polyline(cols["x_0"], cols["y_0"], "#1f77b4"))
    out += left.markers(cols["x_0"], cols["y_0"], "#1f77b4")

    out += right.frame("energy", "k", "H, H_eta")
    out.append(right.polyline(cols["step"], cols["energy"], "#d62728"))
    out.append(right.polyline(cols["step"], cols["modified_energy"], "#2ca02c"))
    lx, ly = right.left + 8, right.top + 14
    out.append(f'<line x1="{_num(lx)}" y1="{_num(ly - 4)}" x2="{_num(lx + 18)}" y2="{_num(ly - 4)}" stroke="#d62728"/>')
    out.append(f'<text x="{_num(lx + 22)}" y="{_num(ly)}">H</text>')
    out.append(f'<line x1="{_num(lx)}" y1="{_num(ly + 12)}" x2="{_num(lx + 18)}" y2="{_num(ly + 12)}" stroke="#2ca02c"/>')
    out.append(f'<text x="{_num(lx + 22)}" y="{_num(ly + 16)}">H_eta</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(csv_path, out_path=None) -> Path:
    """Render ``csv_path`` to ``out_path`` (default: same name with .svg)."""
    csv_path = Path(csv_path)
    out_path = Path(out_path) if out_path is not None else csv_path.with_suffix(".svg")
    cols = read_columns(csv_path)
    out_path.write_text(render_svg(cols, title=csv_path.stem), encoding="utf-8")
    return out_path
