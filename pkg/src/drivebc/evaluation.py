"""MAE evaluation protocol and results tables.

Errors are aggregated per clip (segment) first: within one clip the MAE is
the mean absolute error over all of its windows and horizon steps, per axis.
The headline numbers are the unweighted means of the per-clip values, so
clips with more windows do not dominate. A raw-target MAE (against the
unsmoothed accelerations) is reported alongside as a diagnostic.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .archive import WindowBatch


@dataclass(frozen=True)
class EvalReport:
    """Per-clip and aggregate MAE for one model on one dataset."""

    model_id: str
    dataset_id: str
    clip_count: int
    per_clip: dict[str, tuple[float, float]]      # segment -> (mae_x, mae_y)
    mae_x: float
    mae_y: float
    raw_mae_x: float = float("nan")
    raw_mae_y: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "dataset_id": self.dataset_id,
            "clip_count": self.clip_count,
            "mae_x": self.mae_x,
            "mae_y": self.mae_y,
            "raw_mae_x": self.raw_mae_x,
            "raw_mae_y": self.raw_mae_y,
            "per_clip": {k: {"mae_x": v[0], "mae_y": v[1]}
                         for k, v in self.per_clip.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _per_clip_mae(preds: np.ndarray, targets: np.ndarray,
                  batch: WindowBatch) -> dict[str, tuple[float, float]]:
    err = np.abs(preds - targets)  # (N, K, 2)
    out: dict[str, tuple[float, float]] = {}
    for seg_idx in np.unique(batch.segment_index):
        mask = batch.segment_index == seg_idx
        seg_err = err[mask]
        out[batch.segment_ids[seg_idx]] = (float(seg_err[:, :, 0].mean()),
                                           float(seg_err[:, :, 1].mean()))
    return out


def evaluate_predictions(preds: np.ndarray, batch: WindowBatch,
                         model_id: str = "model",
                         dataset_id: str = "validation") -> EvalReport:
    """Score predictions against the batch's (smoothed) targets."""
    if len(batch) == 0:
        raise ValueError("validation set is empty")
    if preds.shape != batch.target.shape:
        raise ValueError(f"prediction shape {preds.shape} does not match "
                         f"targets {batch.target.shape}")
    per_clip = _per_clip_mae(preds, batch.target, batch)
    per_raw = _per_clip_mae(preds, batch.raw_target, batch)
    xs = [v[0] for v in per_clip.values()]
    ys = [v[1] for v in per_clip.values()]
    return EvalReport(
        model_id=model_id, dataset_id=dataset_id, clip_count=len(per_clip),
        per_clip=per_clip,
        mae_x=float(np.mean(xs)), mae_y=float(np.mean(ys)),
        raw_mae_x=float(np.mean([v[0] for v in per_raw.values()])),
        raw_mae_y=float(np.mean([v[1] for v in per_raw.values()])))


def results_table(reports: list[EvalReport]) -> tuple[str, str]:
    """Aligned text table plus a CSV twin; column minima are marked with '*'.

    Ties all get the mark. Returns (text, csv_text).
    """
    if not reports:
        raise ValueError("no reports to tabulate")
    min_x = min(r.mae_x for r in reports)
    min_y = min(r.mae_y for r in reports)

    rows = []
    for r in reports:
        mark_x = "*" if r.mae_x == min_x else ""
        mark_y = "*" if r.mae_y == min_y else ""
        rows.append((r.model_id, f"{r.mae_x:.4f}{mark_x}", f"{r.mae_y:.4f}{mark_y}"))

    headers = ("model", "MAE X", "MAE Y")
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
             "  ".join("-" * w for w in widths)]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    text = "\n".join(lines) + "\n"

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", "mae_x", "mae_y", "min_x", "min_y"])
    for r in reports:
        writer.writerow([r.model_id, repr(r.mae_x), repr(r.mae_y),
                         int(r.mae_x == min_x), int(r.mae_y == min_y)])
    return text, buf.getvalue()
