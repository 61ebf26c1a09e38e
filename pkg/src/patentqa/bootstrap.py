"""Seeded percentile-bootstrap confidence intervals over labeled items."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from patentqa.errors import DomainError, EvaluationError


@dataclass(frozen=True)
class BootstrapResult:
    mean: float
    half_width: float
    lower: float
    upper: float
    level: float
    iterations: int
    skipped: int  # degenerate resamples (metric undefined) that were dropped

    def covers(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "half_width": self.half_width,
            "lower": self.lower,
            "upper": self.upper,
            "level": self.level,
            "iterations": self.iterations,
            "skipped": self.skipped,
        }


def bootstrap_ci(
    gold: Sequence,
    pred: Sequence,
    metric: Callable[[np.ndarray, np.ndarray], float],
    iterations: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> BootstrapResult:
    """Resample items with replacement; report the percentile interval of ``metric``.

    The index matrix is drawn in one deterministic pass from the seed, so the
    result is bit-reproducible and independent of evaluation order.
    """
    if len(gold) != len(pred):
        raise EvaluationError(f"length mismatch: {len(gold)} gold vs {len(pred)} predicted")
    n = len(gold)
    if n == 0:
        raise DomainError("cannot bootstrap an empty item set")
    if not (0.0 < level < 1.0):
        raise DomainError(f"confidence level must be in (0, 1), got {level}")

    gold_arr = np.asarray(gold)
    pred_arr = np.asarray(pred)
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, n, size=(iterations, n))

    stats: list[float] = []
    skipped = 0
    for it in range(iterations):
        idx = indices[it]
        try:
            stats.append(float(metric(gold_arr[idx], pred_arr[idx])))
        except DomainError:
            skipped += 1
    if not stats:
        raise EvaluationError("every bootstrap resample was degenerate for this metric")

    values = np.asarray(stats)
    alpha = (1.0 - level) / 2.0
    lower, upper = np.quantile(values, [alpha, 1.0 - alpha])
    return BootstrapResult(
        mean=float(values.mean()),
        half_width=float((upper - lower) / 2.0),
        lower=float(lower),
        upper=float(upper),
        level=level,
        iterations=iterations,
        skipped=skipped,
    )


def accuracy_metric(gold: np.ndarray, pred: np.ndarray) -> float:
    return float(np.mean(gold == pred))


def balanced_accuracy_metric(classes: Sequence) -> Callable[[np.ndarray, np.ndarray], float]:
    """Metric factory; raises DomainError when a resample loses a class entirely."""

    def metric(gold: np.ndarray, pred: np.ndarray) -> float:
        recalls = []
        for cls in classes:
            mask = gold == cls
            count = int(mask.sum())
            if count == 0:
                raise DomainError(f"class {cls!r} absent from resample")
            recalls.append(float(np.sum(pred[mask] == cls)) / count)
        return sum(recalls) / len(recalls)

    return metric


def precision_metric(positive) -> Callable[[np.ndarray, np.ndarray], float]:
    def metric(gold: np.ndarray, pred: np.ndarray) -> float:
        predicted = pred == positive
        denom = int(predicted.sum())
        if denom == 0:
            raise DomainError(f"no {positive!r} predictions in resample")
        return float(np.sum(gold[predicted] == positive)) / denom

    return metric


def recall_metric(positive) -> Callable[[np.ndarray, np.ndarray], float]:
    def metric(gold: np.ndarray, pred: np.ndarray) -> float:
        actual = gold == positive
        denom = int(actual.sum())
        if denom == 0:
            raise DomainError(f"no {positive!r} gold items in resample")
        return float(np.sum(pred[actual] == positive)) / denom

    return metric
