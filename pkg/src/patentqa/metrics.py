"""Classification metrics: confusion matrices, balanced accuracy, per-class P/R/F1."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

from patentqa.errors import DomainError, EvaluationError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true labels, columns are predicted labels, in ``classes`` order."""

    classes: tuple[Hashable, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        k = len(self.classes)
        if len(self.counts) != k or any(len(row) != k for row in self.counts):
            raise DomainError("confusion matrix shape must match the class list")
        if any(c < 0 for row in self.counts for c in row):
            raise DomainError("confusion matrix counts must be non-negative")

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def row_total(self, i: int) -> int:
        return sum(self.counts[i])

    def col_total(self, j: int) -> int:
        return sum(row[j] for row in self.counts)

    def diagonal(self, i: int) -> int:
        return self.counts[i][i]

    def cell_percent(self, i: int, j: int, digits: int = 1) -> float:
        """Cell as percent of its row total, rounded (the in-table convention)."""
        row = self.row_total(i)
        if row == 0:
            return 0.0
        return round(100.0 * self.counts[i][j] / row, digits)

    def to_dict(self) -> dict:
        return {"classes": list(self.classes), "counts": [list(r) for r in self.counts]}

    @classmethod
    def from_dict(cls, data: dict) -> "ConfusionMatrix":
        return cls(
            classes=tuple(data["classes"]),
            counts=tuple(tuple(int(c) for c in row) for row in data["counts"]),
        )


def confusion_matrix(
    gold: dict[Hashable, Hashable] | Sequence[Hashable],
    pred: dict[Hashable, Hashable] | Sequence[Hashable],
    classes: Sequence[Hashable],
) -> ConfusionMatrix:
    """Exact counts over shared item ids; any id mismatch is an evaluation error."""
    if isinstance(gold, dict) != isinstance(pred, dict):
        raise EvaluationError("gold and predictions must both be mappings or both sequences")
    if isinstance(gold, dict):
        missing = sorted(str(k) for k in gold.keys() - pred.keys())
        extra = sorted(str(k) for k in pred.keys() - gold.keys())
        if missing or extra:
            raise EvaluationError(
                "item ids do not line up: "
                f"{len(missing)} without predictions ({', '.join(missing[:5])}...), "
                f"{len(extra)} without gold labels ({', '.join(extra[:5])}...)"
            )
        items = [(gold[k], pred[k]) for k in sorted(gold, key=str)]
    else:
        if len(gold) != len(pred):
            raise EvaluationError(f"length mismatch: {len(gold)} gold vs {len(pred)} predicted")
        items = list(zip(gold, pred))

    index = {c: i for i, c in enumerate(classes)}
    counts = [[0] * len(classes) for _ in classes]
    for g, p in items:
        if g not in index:
            raise EvaluationError(f"gold label {g!r} is not in the class list")
        if p not in index:
            raise EvaluationError(f"predicted label {p!r} is not in the class list")
        counts[index[g]][index[p]] += 1
    return ConfusionMatrix(classes=tuple(classes), counts=tuple(tuple(r) for r in counts))


def balanced_accuracy(cm: ConfusionMatrix) -> float:
    """Mean of per-class recalls; every class must have at least one true item."""
    recalls = []
    for i, cls in enumerate(cm.classes):
        row = cm.row_total(i)
        if row == 0:
            raise DomainError(f"class {cls!r} has no true instances")
        recalls.append(cm.diagonal(i) / row)
    return sum(recalls) / len(recalls)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    zero_division: tuple[str, ...] = ()  # which of precision/recall hit a 0 denominator


def per_class_metrics(cm: ConfusionMatrix) -> dict[Hashable, ClassMetrics]:
    out: dict[Hashable, ClassMetrics] = {}
    for i, cls in enumerate(cm.classes):
        flags: list[str] = []
        col = cm.col_total(i)
        row = cm.row_total(i)
        diag = cm.diagonal(i)
        if col == 0:
            precision = 0.0
            flags.append("precision")
        else:
            precision = diag / col
        if row == 0:
            recall = 0.0
            flags.append("recall")
        else:
            recall = diag / row
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        out[cls] = ClassMetrics(
            precision=precision, recall=recall, f1=f1, zero_division=tuple(flags)
        )
    return out


@dataclass(frozen=True)
class DerivedRates:
    overall_accuracy: float
    risk_detection_rate: float


def derived_rates(cm: ConfusionMatrix, safe_class: Hashable = "safe") -> DerivedRates:
    """Overall = trace/total; detection rate = exact-class hits among non-safe items."""
    total = cm.total
    if total == 0:
        raise DomainError("empty confusion matrix")
    trace = sum(cm.diagonal(i) for i in range(len(cm.classes)))
    risk_diag = 0
    risk_total = 0
    for i, cls in enumerate(cm.classes):
        if cls == safe_class:
            continue
        risk_diag += cm.diagonal(i)
        risk_total += cm.row_total(i)
    if risk_total == 0:
        raise DomainError("no non-safe items: risk detection rate undefined")
    return DerivedRates(
        overall_accuracy=trace / total,
        risk_detection_rate=risk_diag / risk_total,
    )


def expand_matrix_to_items(cm: ConfusionMatrix) -> tuple[list, list]:
    """Materialize (gold, pred) label lists whose tally is exactly ``cm``."""
    gold: list = []
    pred: list = []
    for i, true_cls in enumerate(cm.classes):
        for j, pred_cls in enumerate(cm.classes):
            n = cm.counts[i][j]
            gold.extend([true_cls] * n)
            pred.extend([pred_cls] * n)
    return gold, pred
