"""Static prediction-vs-truth plots: SVG with a CSV twin.

Two stacked panels (longitudinal and lateral acceleration) over frame index.
The vertical axes are fixed to [-2, 2]; values outside are drawn at the
clamp with an overflow marker, while the CSV keeps full precision. The CSV
round-trips: rendering from parsed CSV reproduces the SVG byte-for-byte.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

CSV_HEADER = ["frame", "pred_x", "true_x", "pred_y", "true_y"]


@dataclass(frozen=True)
class PlotSpec:
    """Geometry and axis limits of the rendered SVG."""

    y_min: float = -2.0
    y_max: float = 2.0
    width: int = 880
    panel_height: int = 190
    margin_left: int = 58
    margin_right: int = 16
    margin_top: int = 28
    margin_bottom: int = 34
    gap: int = 26


def series_csv(frames: np.ndarray, pred: np.ndarray, truth: np.ndarray) -> str:
    """CSV with one row per frame, full (unclamped) precision."""
    frames = np.asarray(frames)
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if not (len(frames) == len(pred) == len(truth)):
        raise ValueError(f"series lengths differ: {len(frames)}, {len(pred)}, "
                         f"{len(truth)}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for i in range(len(frames)):
        writer.writerow([int(frames[i]), repr(float(pred[i, 0])),
                         repr(float(truth[i, 0])), repr(float(pred[i, 1])),
                         repr(float(truth[i, 1]))])
    return buf.getvalue()


def parse_series_csv(text: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of series_csv; returns (frames, pred, truth)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError("unrecognized plot CSV header")
    frames, pred, truth = [], [], []
    for row in rows[1:]:
        frames.append(int(row[0]))
        pred.append((float(row[1]), float(row[3])))
        truth.append((float(row[2]), float(row[4])))
    return np.array(frames), np.array(pred), np.array(truth)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Panel:
    def __init__(self, spec: PlotSpec, top: int, frames: np.ndarray):
        self.spec = spec
        self.top = top
        self.left = spec.margin_left
        self.w = spec.width - spec.margin_left - spec.margin_right
        self.h = spec.panel_height
        f0, f1 = float(frames.min()), float(frames.max())
        self.f0 = f0
        self.span = (f1 - f0) if f1 > f0 else 1.0

    def x(self, frame: float) -> float:
        return self.left + (frame - self.f0) / self.span * self.w

    def y(self, value: float) -> float:
        s = self.spec
        frac = (s.y_max - value) / (s.y_max - s.y_min)
        return self.top + frac * self.h

    def polyline(self, frames, values, color: str, dash: str = "") -> str:
        s = self.spec
        pts = []
        for f, v in zip(frames, values):
            clamped = min(max(v, s.y_min), s.y_max)
            pts.append(f"{_fmt(self.x(f))},{_fmt(self.y(clamped))}")
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        return (f'<polyline fill="none" stroke="{color}" stroke-width="1.3"'
                f'{dash_attr} points="{" ".join(pts)}"/>')

    def overflow_markers(self, frames, values, color: str) -> list[str]:
        s = self.spec
        out = []
        for f, v in zip(frames, values):
            if s.y_min <= v <= s.y_max:
                continue
            x = self.x(f)
            y = self.y(s.y_max if v > s.y_max else s.y_min)
            d = 3.5 if v > s.y_max else -3.5
            out.append(f'<path d="M {_fmt(x - 3)} {_fmt(y)} L {_fmt(x + 3)} {_fmt(y)} '
                       f'L {_fmt(x)} {_fmt(y - d)} Z" fill="{color}"/>')
        return out

    def frame_elements(self, label: str) -> list[str]:
        s = self.spec
        parts = [f'<rect x="{self.left}" y="{self.top}" width="{self.w}" '
                 f'height="{self.h}" fill="none" stroke="#999"/>']
        for tick in (-2.0, -1.0, 0.0, 1.0, 2.0):
            y = self.y(tick)
            style = "#ccc" if tick != 0.0 else "#888"
            parts.append(f'<line x1="{self.left}" y1="{_fmt(y)}" '
                         f'x2="{self.left + self.w}" y2="{_fmt(y)}" stroke="{style}" '
                         f'stroke-width="0.6"/>')
            parts.append(f'<text x="{self.left - 8}" y="{_fmt(y + 3)}" '
                         f'text-anchor="end" font-size="10">{tick:g}</text>')
        parts.append(f'<text x="{self.left - 44}" y="{_fmt(self.top + self.h / 2)}" '
                     f'font-size="11" transform="rotate(-90 {self.left - 44} '
                     f'{_fmt(self.top + self.h / 2)})" text-anchor="middle">{label}</text>')
        return parts


def render_svg(frames: np.ndarray, pred: np.ndarray, truth: np.ndarray,
               spec: PlotSpec = PlotSpec()) -> str:
    """Two-panel SVG of predicted vs ground-truth accelerations."""
    frames = np.asarray(frames)
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if not (len(frames) == len(pred) == len(truth)):
        raise ValueError(f"series lengths differ: {len(frames)}, {len(pred)}, "
                         f"{len(truth)}")
    if len(frames) == 0:
        raise ValueError("nothing to plot")

    total_h = (spec.margin_top + 2 * spec.panel_height + spec.gap
               + spec.margin_bottom)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" '
        f'height="{total_h}" viewBox="0 0 {spec.width} {total_h}">',
        f'<rect width="{spec.width}" height="{total_h}" fill="white"/>',
        f'<text x="{spec.margin_left}" y="16" font-size="11">'
        f'<tspan fill="#222">ground truth</tspan>'
        f'<tspan fill="#1f77b4" dx="12">prediction</tspan>'
        f'<tspan fill="#d62728" dx="12">&#9650; clipped</tspan></text>',
    ]
    labels = ("a_x (m/s&#178;)", "a_y (m/s&#178;)")
    for axis in (0, 1):
        top = spec.margin_top + axis * (spec.panel_height + spec.gap)
        panel = _Panel(spec, top, frames)
        parts.extend(panel.frame_elements(labels[axis]))
        parts.append(panel.polyline(frames, truth[:, axis], "#222222"))
        parts.append(panel.polyline(frames, pred[:, axis], "#1f77b4", dash="4 3"))
        parts.extend(panel.overflow_markers(frames, truth[:, axis], "#d62728"))
        parts.extend(panel.overflow_markers(frames, pred[:, axis], "#d62728"))
    x_label_y = total_h - 10
    parts.append(f'<text x="{spec.width / 2:g}" y="{x_label_y}" font-size="11" '
                 f'text-anchor="middle">frame index</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_plot(frames: np.ndarray, pred: np.ndarray, truth: np.ndarray,
                spec: PlotSpec = PlotSpec()) -> tuple[str, str]:
    """(SVG text, CSV text) for one segment's prediction series."""
    return render_svg(frames, pred, truth, spec), series_csv(frames, pred, truth)
