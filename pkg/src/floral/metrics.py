"""Evaluation metrics and the per-round metrics CSV.

Accuracy is always measured against clean test labels; "robust" accuracy in
the experiment tables is this same number for models trained on poisoned
labels. The recovery rate measures how much of an initial poisoning the
adversarial training undid in its final label set.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datasets import Dataset, MulticlassDataset
from .svm import MulticlassModel, SvmModel, decision_values

CSV_COLUMNS = ("round", "test_accuracy", "mean_hinge", "recovery_rate")


@dataclass(frozen=True)
class MetricsRecord:
    round: int
    test_accuracy: float
    mean_hinge: float
    recovery_rate: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.test_accuracy <= 1.0:
            raise ValueError(f"accuracy out of range: {self.test_accuracy}")
        if self.mean_hinge < 0.0:
            raise ValueError(f"hinge loss must be nonnegative: {self.mean_hinge}")
        if self.recovery_rate is not None and not 0.0 <= self.recovery_rate <= 1.0:
            raise ValueError(f"recovery rate out of range: {self.recovery_rate}")


def scores_accuracy(scores: np.ndarray, labels: np.ndarray) -> float:
    """Accuracy of sign(scores) against labels, zero scores counting as +1."""
    if scores.shape[0] == 0:
        raise ValueError("empty test set")
    pred = np.where(scores >= 0.0, 1, -1)
    return int((pred == labels).sum()) / scores.shape[0]


def scores_mean_hinge(scores: np.ndarray, labels: np.ndarray) -> float:
    """Mean of max(0, 1 - y * score)."""
    if scores.shape[0] == 0:
        raise ValueError("empty test set")
    return float(np.maximum(0.0, 1.0 - labels * scores).mean())


def accuracy(model: SvmModel, test: Dataset) -> float:
    """Fraction of test points whose predicted sign matches the label."""
    return scores_accuracy(decision_values(model, test.features), test.labels)


def mean_hinge(model: SvmModel, test: Dataset) -> float:
    """Mean of max(0, 1 - y * f(x)) over the test set."""
    return scores_mean_hinge(decision_values(model, test.features), test.labels)


def multiclass_accuracy(model: MulticlassModel, test: MulticlassDataset) -> float:
    if test.n == 0:
        raise ValueError("empty test set")
    pred = model.predict(test.features)
    return int((pred == test.class_labels).sum()) / test.n


def multiclass_mean_hinge(model: MulticlassModel, test: MulticlassDataset) -> float:
    """Margin hinge: max(0, 1 - (f_true - best other f)) averaged over points."""
    if test.n == 0:
        raise ValueError("empty test set")
    scores = model.decision_matrix(test.features)
    idx = np.arange(test.n)
    true_col = test.class_labels - 1
    own = scores[idx, true_col]
    masked = scores.copy()
    masked[idx, true_col] = -np.inf
    margin = own - masked.max(axis=1)
    return float(np.maximum(0.0, 1.0 - margin).mean())


def recovery_rate(initial_poisoned: frozenset[int] | set[int], clean_labels: np.ndarray,
                  final_adversarial_labels: np.ndarray) -> float:
    """Fraction of initially poisoned rows whose final label equals the clean one."""
    if not initial_poisoned:
        raise ValueError("recovery rate is undefined for an empty poisoned set")
    idx = sorted(initial_poisoned)
    restored = int((np.asarray(final_adversarial_labels)[idx]
                    == np.asarray(clean_labels)[idx]).sum())
    return restored / len(idx)


def write_metrics_csv(records: list[MetricsRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            rec = "" if r.recovery_rate is None else repr(r.recovery_rate)
            writer.writerow([r.round, repr(r.test_accuracy), repr(r.mean_hinge), rec])


def read_metrics_csv(path: str | Path) -> list[MetricsRecord]:
    out = []
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ValueError(f"unexpected metrics columns: {reader.fieldnames}")
        for row in reader:
            out.append(MetricsRecord(
                round=int(row["round"]),
                test_accuracy=float(row["test_accuracy"]),
                mean_hinge=float(row["mean_hinge"]),
                recovery_rate=float(row["recovery_rate"]) if row["recovery_rate"] else None,
            ))
    return out


def best_and_last(records: list[MetricsRecord]) -> tuple[float, float]:
    """Peak accuracy over eval rounds and accuracy at the final one."""
    if not records:
        raise ValueError("no metric records")
    return max(r.test_accuracy for r in records), records[-1].test_accuracy
