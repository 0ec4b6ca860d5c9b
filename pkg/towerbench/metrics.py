"""Classification metrics and result formatting."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import MetricError


def _as_label_sets(items) -> list[frozenset[int]]:
    """Accept class ids, iterables of class ids, or a 0/1 indicator matrix."""
    if isinstance(items, np.ndarray) and items.ndim == 2:
        return [frozenset(int(i) for i in np.flatnonzero(row)) for row in items]
    out = []
    for item in items:
        if isinstance(item, (int, np.integer)):
            out.append(frozenset((int(item),)))
        else:
            out.append(frozenset(int(i) for i in item))
    return out


def per_class_f1(preds, golds, num_classes: int) -> np.ndarray:
    """F1 of every class; classes with ``precision + recall == 0`` score 0."""
    pred_sets, gold_sets = _as_label_sets(preds), _as_label_sets(golds)
    if not gold_sets:
        raise MetricError("cannot score an empty evaluation set")
    if len(pred_sets) != len(gold_sets):
        raise MetricError(f"{len(pred_sets)} predictions for {len(gold_sets)} gold examples")
    tp = np.zeros(num_classes)
    fp = np.zeros(num_classes)
    fn = np.zeros(num_classes)
    for pred, gold in zip(pred_sets, gold_sets):
        for label in pred | gold:
            if not 0 <= label < num_classes:
                raise MetricError(f"label {label} outside [0, {num_classes})")
            if label in pred and label in gold:
                tp[label] += 1
            elif label in pred:
                fp[label] += 1
            else:
                fn[label] += 1
    denominator = 2 * tp + fp + fn
    return np.divide(2 * tp, denominator, out=np.zeros(num_classes), where=denominator > 0)


def macro_f1(preds, golds, num_classes: int) -> float:
    """Unweighted mean of per-class F1 over all ``num_classes`` classes."""
    return float(per_class_f1(preds, golds, num_classes).mean())


def accuracy(preds: Sequence[int], golds: Sequence[int]) -> float:
    preds, golds = np.asarray(preds), np.asarray(golds)
    if golds.size == 0:
        raise MetricError("cannot score an empty evaluation set")
    if preds.shape != golds.shape:
        raise MetricError(f"{preds.shape} predictions for {golds.shape} gold labels")
    return float((preds == golds).mean())


def predict_labels(logits: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """0/1 multi-label decisions: label on iff ``sigmoid(logit) > threshold``."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    cut = np.log(threshold / (1.0 - threshold))
    return (np.asarray(logits) > cut).astype(np.int64)


def format_mean_sd(values: Iterable[float]) -> str:
    """Fractions as ``"55.8 (±1.9)"``: percent, one decimal, sample standard deviation."""
    values = np.asarray(list(values), dtype=np.float64) * 100.0
    if values.size == 0:
        raise MetricError("no values to summarise")
    sd = values.std(ddof=1) if values.size > 1 else 0.0
    return f"{values.mean():.1f} (±{sd:.1f})"
