"""Confusion matrices and precision / recall / F-beta reports.

Undefined ratios (zero denominators) score 0.  Displayed scores use four
decimals with round-half-even.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Any, Hashable, Sequence

from secretsift.catalog import TaxonomyClass
from secretsift.errors import DomainError, EmptyMatrix, LengthMismatch, UnknownCategory
from secretsift.prompting import Label


def category_name(value: Any) -> str:
    if isinstance(value, TaxonomyClass):
        return value.display_name
    if isinstance(value, enum.Enum):
        return str(value.value)
    return str(value)


def _default_labels(values: Sequence[Hashable]) -> list[str]:
    types = {type(v) for v in values}
    if len(types) == 1:
        (only,) = types
        if issubclass(only, enum.Enum):
            return [category_name(m) for m in only]
    return sorted({category_name(v) for v in values})


@dataclass(frozen=True)
class ConfusionMatrix:
    labels: tuple[str, ...]
    # counts[gold][pred]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.labels)
        if len(set(self.labels)) != n:
            raise ValueError("labels must be distinct")
        if len(self.counts) != n or any(len(row) != n for row in self.counts):
            raise ValueError("counts must be a square table matching labels")
        if any((not isinstance(c, int)) or c < 0 for row in self.counts for c in row):
            raise ValueError("counts must be non-negative integers")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.counts)

    @property
    def predicted(self) -> tuple[int, ...]:
        n = len(self.labels)
        return tuple(sum(self.counts[g][p] for g in range(n)) for p in range(n))

    @property
    def total(self) -> int:
        return sum(self.support)

    def count(self, gold: str, pred: str) -> int:
        return self.counts[self.labels.index(gold)][self.labels.index(pred)]

    @classmethod
    def from_binary_counts(cls, tp: int, fp: int, fn: int, tn: int) -> ConfusionMatrix:
        """Binary matrix in Label order (Secret first)."""
        return cls(
            (Label.SECRET.value, Label.NON_SENSITIVE.value),
            ((tp, fn), (fp, tn)),
        )

    def to_dict(self) -> dict[str, Any]:
        return {"labels": list(self.labels), "counts": [list(r) for r in self.counts]}


def confusion_matrix(
    golds: Sequence[Hashable], preds: Sequence[Hashable], labels: Sequence[Any] | None = None
) -> ConfusionMatrix:
    """``counts[g][p]`` = number of positions with gold ``g`` and prediction ``p``."""
    if len(golds) != len(preds):
        raise LengthMismatch(f"{len(golds)} golds vs {len(preds)} predictions")
    names = [category_name(v) for v in labels] if labels is not None else _default_labels([*golds, *preds])
    index = {name: i for i, name in enumerate(names)}
    counts = [[0] * len(names) for _ in names]
    for g, p in zip(golds, preds):
        gn, pn = category_name(g), category_name(p)
        if gn not in index or pn not in index:
            raise UnknownCategory(f"{gn if gn not in index else pn!r} is not one of {names}")
        counts[index[gn]][index[pn]] += 1
    return ConfusionMatrix(tuple(names), tuple(tuple(r) for r in counts))


def fbeta(p: float, r: float, beta: float) -> float:
    """(1 + b^2) P R / (b^2 P + R); 0 when the denominator is 0."""
    if not (0.0 <= p <= 1.0 and 0.0 <= r <= 1.0):
        raise DomainError(f"precision and recall must be in [0, 1], got {p}, {r}")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    b2 = beta * beta
    denom = b2 * p + r
    if denom == 0:
        return 0.0
    return (1 + b2) * p * r / denom


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    f2: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    per_class: dict[str, ClassScores]
    macro: dict[str, float]
    weighted: dict[str, float]
    accuracy: float
    matrix: ConfusionMatrix

    @property
    def positive(self) -> ClassScores | None:
        return self.per_class.get(Label.SECRET.value)

    def to_dict(self, digits: int | None = 4) -> dict[str, Any]:
        rnd = (lambda x: round4(x, digits)) if digits is not None else (lambda x: x)
        out: dict[str, Any] = {
            "accuracy": rnd(self.accuracy),
            "per_class": {
                name: {
                    "precision": rnd(s.precision),
                    "recall": rnd(s.recall),
                    "f1": rnd(s.f1),
                    "f2": rnd(s.f2),
                    "support": s.support,
                }
                for name, s in self.per_class.items()
            },
            "macro": {k: rnd(v) for k, v in self.macro.items()},
            "weighted": {k: rnd(v) for k, v in self.weighted.items()},
            "confusion_matrix": self.matrix.to_dict(),
        }
        pos = self.positive
        if pos is not None:
            out["positive"] = {
                "precision": rnd(pos.precision),
                "recall": rnd(pos.recall),
                "f1": rnd(pos.f1),
                "f2": rnd(pos.f2),
            }
        return out


def class_report(cm: ConfusionMatrix) -> MetricsReport:
    n = len(cm.labels)
    total = cm.total
    if n == 0 or total == 0:
        raise EmptyMatrix("confusion matrix has no observations")
    support = cm.support
    predicted = cm.predicted
    per_class: dict[str, ClassScores] = {}
    for i, name in enumerate(cm.labels):
        tp = cm.counts[i][i]
        p = _ratio(tp, predicted[i])
        r = _ratio(tp, support[i])
        per_class[name] = ClassScores(p, r, fbeta(p, r, 1.0), fbeta(p, r, 2.0), support[i])

    scores = list(per_class.values())
    macro = {
        "precision": sum(s.precision for s in scores) / n,
        "recall": sum(s.recall for s in scores) / n,
        "f1": sum(s.f1 for s in scores) / n,
        "f2": sum(s.f2 for s in scores) / n,
    }
    weighted = {
        "precision": sum(s.precision * s.support for s in scores) / total,
        "recall": sum(s.recall * s.support for s in scores) / total,
        "f1": sum(s.f1 * s.support for s in scores) / total,
        "f2": sum(s.f2 * s.support for s in scores) / total,
    }
    accuracy = sum(cm.counts[i][i] for i in range(n)) / total
    return MetricsReport(per_class, macro, weighted, accuracy, cm)


def round4(x: float, digits: int = 4) -> float:
    q = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_EVEN))


def fmt4(x: float) -> str:
    return f"{Decimal(repr(x)).quantize(Decimal('0.0001'), rounding=ROUND_HALF_EVEN)}"


def render_table(report: MetricsReport) -> str:
    """Aligned plain-text classification report."""
    names = list(report.per_class)
    width = max([len(n) for n in names] + [len("weighted avg")])
    head = f"{'':<{width}}  {'precision':>9}  {'recall':>9}  {'f1':>9}  {'f2':>9}  {'support':>7}"
    lines = [head]
    for name, s in report.per_class.items():
        lines.append(
            f"{name:<{width}}  {fmt4(s.precision):>9}  {fmt4(s.recall):>9}  "
            f"{fmt4(s.f1):>9}  {fmt4(s.f2):>9}  {s.support:>7}"
        )
    total = report.matrix.total
    lines.append("")
    for label, agg in (("macro avg", report.macro), ("weighted avg", report.weighted)):
        lines.append(
            f"{label:<{width}}  {fmt4(agg['precision']):>9}  {fmt4(agg['recall']):>9}  "
            f"{fmt4(agg['f1']):>9}  {fmt4(agg['f2']):>9}  {total:>7}"
        )
    lines.append(f"{'accuracy':<{width}}  {fmt4(report.accuracy):>9}")
    return "\n".join(lines) + "\n"
