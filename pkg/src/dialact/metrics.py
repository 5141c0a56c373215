"""Accuracy, macro-F1 and the result table layouts."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import DataError

ARCHITECTURES = ("cnn1", "cnn2", "bilstm")
HISTORY_MODES = (True, False)


def confusion_matrix(gold, pred, tag_set) -> np.ndarray:
    """K x K counts; rows are gold classes, columns predicted classes."""
    if len(gold) != len(pred):
        raise DataError("gold and pred lengths differ")
    idx = {t: i for i, t in enumerate(tag_set)}
    mat = np.zeros((len(tag_set), len(tag_set)), dtype=np.int64)
    for g, p in zip(gold, pred):
        mat[idx[g], idx[p]] += 1
    return mat


def accuracy(gold, pred) -> float:
    if len(gold) != len(pred):
        raise DataError("gold and pred lengths differ")
    if not gold:
        raise DataError("empty sequences")
    return sum(g == p for g, p in zip(gold, pred)) / len(gold)


def macro_f1(gold, pred, tag_set, average: str = "gold") -> float:
    """Unweighted mean of per-class F1 scores.

    average="gold" (default) averages over classes that appear in the gold
    sequence; average="all" averages over the whole tag set. Precision or
    recall with a zero denominator counts as 0, and F1 is 0 when P+R = 0.
    """
    if average not in ("gold", "all"):
        raise ValueError("average must be 'gold' or 'all'")
    mat = confusion_matrix(gold, pred, tag_set)
    f1s = []
    for i, tag in enumerate(tag_set):
        gold_n = mat[i, :].sum()
        if average == "gold" and gold_n == 0:
            continue
        tp = mat[i, i]
        pred_n = mat[:, i].sum()
        p = tp / pred_n if pred_n else 0.0
        r = tp / gold_n if gold_n else 0.0
        f1s.append(2 * p * r / (p + r) if p + r else 0.0)
    if not f1s:
        raise DataError("no classes to average over")
    return float(np.mean(f1s))


def _metric_columns():
    cols = []
    for arch in ARCHITECTURES:
        for hist in HISTORY_MODES:
            h = "hist" if hist else "nohist"
            cols.append((arch, hist, f"{arch}_{h}_acc"))
            cols.append((arch, hist, f"{arch}_{h}_f1"))
    return cols


def write_report(rows, path: str | Path) -> None:
    """Write a result table mirroring the paper-style layout.

    `rows` is a list of dicts with keys "train", "test" and "metrics",
    where metrics maps (architecture, use_history) -> (accuracy, f1) in
    [0, 1]. The main CSV carries percentages at 1 decimal place; a
    sidecar `<path>.full.csv` keeps full precision.
    """
    path = Path(path)
    cols = _metric_columns()
    header = ["train", "test"] + [name for _, _, name in cols]

    def cells(row, fmt):
        out = [row["train"], row["test"]]
        i = 0
        while i < len(cols):
            arch, hist, _ = cols[i]
            acc, f1 = row["metrics"].get((arch, hist), (None, None))
            out.append(fmt(acc))
            out.append(fmt(f1))
            i += 2
        return out

    def pct(v):
        return "" if v is None else f"{100.0 * v:.1f}"

    def full(v):
        return "" if v is None else repr(float(v))

    for target, fmt in ((path, pct),
                        (path.with_suffix(path.suffix + ".full.csv"), full)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow(cells(row, fmt))


def write_per_class(gold, pred, tag_set, path: str | Path) -> None:
    """Raw per-class precision/recall/F1 CSV."""
    mat = confusion_matrix(gold, pred, tag_set)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tag", "gold_count", "pred_count", "tp",
                         "precision", "recall", "f1"])
        for i, tag in enumerate(tag_set):
            tp = mat[i, i]
            gold_n = mat[i, :].sum()
            pred_n = mat[:, i].sum()
            p = tp / pred_n if pred_n else 0.0
            r = tp / gold_n if gold_n else 0.0
            f1 = 2 * p * r / (p + r) if p + r else 0.0
            writer.writerow([tag, gold_n, pred_n, tp,
                             repr(float(p)), repr(float(r)),
                             repr(float(f1))])
