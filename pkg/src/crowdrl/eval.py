"""Dataset-level AP/AR at fixed IoU thresholds and reward-curve summaries.

There are no confidence scores on the predictions, so "AP" and "AR" here are
set precision and recall after greedy one-to-one matching at a fixed IoU
threshold, not areas under a ranked precision-recall curve.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .geometry import LabeledBox, match_boxes, precision_recall_from_counts

DEFAULT_THRESHOLDS = (0.3, 0.5)
DEFINITION = (
    "AP/AR are set precision/recall at a fixed IoU threshold after greedy one-to-one matching "
    "(no confidence ranking). Micro = pooled counts over scenes; macro = mean of per-scene values."
)


def metric_names(threshold: float) -> tuple[str, str]:
    tag = f"{int(round(threshold * 100))}"
    return f"AP{tag}", f"AR{tag}"


@dataclass
class MetricsReport:
    thresholds: tuple[float, ...]
    micro: dict[str, float]
    macro: dict[str, float]
    per_scene: list[dict]
    counts: dict[str, int]
    errors: list[str] = field(default_factory=list)
    definition: str = DEFINITION

    def to_dict(self) -> dict:
        return {
            "thresholds": list(self.thresholds),
            "micro": self.micro,
            "macro": self.macro,
            "counts": self.counts,
            "per_scene": self.per_scene,
            "errors": self.errors,
            "definition": self.definition,
        }

    def table(self) -> str:
        """Aligned text table, values in percent with one decimal."""
        names = []
        for t in self.thresholds:
            names.extend(metric_names(t))
        header = f"{'':<6}" + "".join(f"{n:>8}" for n in names)
        lines = [header]
        for agg, values in (("micro", self.micro), ("macro", self.macro)):
            lines.append(f"{agg:<6}" + "".join(f"{100 * values[n]:>8.1f}" for n in names))
        c = self.counts
        lines.append(f"scenes={c['scenes']} predictions={c['predictions']} ground_truth={c['ground_truth']}")
        for e in self.errors:
            lines.append(f"error: {e}")
        return "\n".join(lines)


def evaluate(
    predictions: Mapping[str, Sequence[LabeledBox]],
    ground_truth: Mapping[str, Sequence[LabeledBox]],
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    require_label_match: bool = True,
) -> MetricsReport:
    """Match every scene at each threshold independently and aggregate.

    Scenes present in ``ground_truth`` but missing from ``predictions`` count
    as empty predictions. Predictions for unknown scenes are reported as
    errors and left out of all aggregates.
    """
    thresholds = tuple(thresholds)
    errors = [f"unknown scene_id {sid!r}" for sid in predictions if sid not in ground_truth]
    rows = []
    tp_total = {t: 0 for t in thresholds}
    n_pred = n_gt = 0
    macro_p = {t: [] for t in thresholds}
    macro_r = {t: [] for t in thresholds}
    for sid in sorted(ground_truth):
        preds = list(predictions.get(sid, []))
        gts = list(ground_truth[sid])
        row = {"scene_id": sid, "predictions": len(preds), "ground_truth": len(gts)}
        for t in thresholds:
            tp = match_boxes(preds, gts, t, require_label_match).num_matches
            p, r = precision_recall_from_counts(tp, len(preds), len(gts))
            ap, ar = metric_names(t)
            row[f"TP{ap[2:]}"] = tp
            row[ap] = p
            row[ar] = r
            tp_total[t] += tp
            macro_p[t].append(p)
            macro_r[t].append(r)
        n_pred += len(preds)
        n_gt += len(gts)
        rows.append(row)

    micro, macro = {}, {}
    for t in thresholds:
        ap, ar = metric_names(t)
        micro[ap], micro[ar] = precision_recall_from_counts(tp_total[t], n_pred, n_gt)
        macro[ap] = float(np.mean(macro_p[t])) if rows else math.nan
        macro[ar] = float(np.mean(macro_r[t])) if rows else math.nan
    counts = {"scenes": len(rows), "predictions": n_pred, "ground_truth": n_gt}
    for t in thresholds:
        counts[f"TP{metric_names(t)[0][2:]}"] = tp_total[t]
    return MetricsReport(thresholds, micro, macro, rows, counts, errors)


class EmptyLogError(ValueError):
    pass


def moving_average(values: Sequence[float], window: int) -> list[float]:
    """Trailing mean over up to ``window`` most recent values."""
    out = []
    acc = 0.0
    for i, v in enumerate(values):
        acc += v
        if i >= window:
            acc -= values[i - window]
        out.append(acc / min(i + 1, window))
    return out


def reward_curve_report(log: Sequence[Mapping], window: int = 20, key: str = "mean_reward") -> tuple[dict, str]:
    """Summary of a training metrics log plus a plot-ready CSV string."""
    if not log:
        raise EmptyLogError("metrics log is empty")
    if window < 1:
        raise ValueError("window must be >= 1")
    values = [float(row[key]) for row in log]
    w = min(window, len(values))
    initial = float(np.mean(values[:w]))
    final = float(np.mean(values[-w:]))
    summary = {
        "key": key,
        "steps": len(values),
        "window": w,
        "initial_window_mean": initial,
        "final_window_mean": final,
        "delta": final - initial,
        "relative_change": (final - initial) / abs(initial) if initial != 0 else None,
        "min": min(values),
        "max": max(values),
        "first": values[0],
        "last": values[-1],
    }
    ma = moving_average(values, w)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", key, "moving_average"])
    for i, (row, v, m) in enumerate(zip(log, values, ma)):
        writer.writerow([row.get("step", i), repr(v), repr(m)])
    return summary, buf.getvalue()
