"""Labeled candidate datasets and reproducible train/validation/test splits.

Dataset CSV (UTF-8, header required)::

    id,candidate,context,file_path,start_offset,end_offset,label,secret_type

``label`` is ``secret`` or ``non_sensitive``; ``secret_type`` is a taxonomy
slug or empty.  Offsets are either both present or both empty.

Every split sorts its input by id before the seeded shuffle, so membership
depends only on the set of ids and the seed, never on file row order.  Test
and validation sets are drawn before the training set, which makes them
identical between the balanced and imbalanced strategies for one seed.
"""

from __future__ import annotations

import csv
import enum
import io
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from secretsift.catalog import TaxonomyClass
from secretsift.errors import (
    InsufficientPool,
    MalformedRow,
    MissingTypeLabel,
    UnknownLabel,
    UnknownType,
)
from secretsift.prompting import Label
from secretsift.rng import Xoshiro256

COLUMNS = ["id", "candidate", "context", "file_path", "start_offset", "end_offset", "label", "secret_type"]

BALANCED_TRAIN = 12_000
IMBALANCED_TRAIN_POS = 3_750
IMBALANCED_TRAIN_NEG = 20_250
HOLDOUT_PER_CLASS = 1_500
MULTICLASS_POOL = 15_000
MULTICLASS_TRAIN = 9_000
MULTICLASS_EVAL = 3_000
MULTICLASS_TEST = 3_000


@dataclass(frozen=True)
class LabeledExample:
    id: str
    candidate: str
    context: str
    label: Label
    secret_type: TaxonomyClass | None = None
    file_path: str | None = None
    span: tuple[int, int] | None = None

    def problems(self) -> list[str]:
        out = []
        if not self.id:
            out.append("empty id")
        if self.context and self.candidate not in self.context:
            out.append("context does not contain candidate")
        if self.label is Label.NON_SENSITIVE and self.secret_type is not None:
            out.append("non_sensitive row carries a secret_type")
        if self.span is not None and not (0 <= self.span[0] <= self.span[1]):
            out.append("bad span")
        return out


class Strategy(enum.Enum):
    BALANCED = "balanced"
    IMBALANCED = "imbalanced"
    MULTICLASS = "multiclass"


@dataclass
class SplitSet:
    train: list[LabeledExample]
    validation: list[LabeledExample]
    test: list[LabeledExample]
    strategy: Strategy
    seed: int

    def parts(self) -> dict[str, list[LabeledExample]]:
        return {"train": self.train, "validation": self.validation, "test": self.test}


# -- CSV I/O


def _parse_offset(value: str, row: int, column: str) -> int | None:
    if value == "":
        return None
    try:
        return int(value)
    except ValueError:
        raise MalformedRow(row, f"{column} is not an integer: {value!r}") from None


def _row_to_example(rec: dict[str, str], row: int) -> LabeledExample:
    try:
        label = Label.from_slug(rec["label"])
    except UnknownLabel as exc:
        raise UnknownLabel(exc.value, row) from None
    secret_type = None
    if rec["secret_type"]:
        try:
            secret_type = TaxonomyClass.from_slug(rec["secret_type"])
        except UnknownType as exc:
            raise UnknownType(exc.value, row) from None
    start = _parse_offset(rec["start_offset"], row, "start_offset")
    end = _parse_offset(rec["end_offset"], row, "end_offset")
    if (start is None) != (end is None):
        raise MalformedRow(row, "start_offset and end_offset must both be set or both empty")
    ex = LabeledExample(
        id=rec["id"],
        candidate=rec["candidate"],
        context=rec["context"],
        label=label,
        secret_type=secret_type,
        file_path=rec["file_path"] or None,
        span=(start, end) if start is not None and end is not None else None,
    )
    problems = ex.problems()
    if problems:
        raise MalformedRow(row, "; ".join(problems))
    return ex


def read_dataset(stream: Iterable[str]) -> list[LabeledExample]:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "missing header") from None
    if header != COLUMNS:
        raise MalformedRow(1, f"header must be {','.join(COLUMNS)}")
    examples: list[LabeledExample] = []
    seen: set[str] = set()
    for row, values in enumerate(reader, start=2):
        if len(values) != len(COLUMNS):
            raise MalformedRow(row, f"expected {len(COLUMNS)} fields, got {len(values)}")
        ex = _row_to_example(dict(zip(COLUMNS, values)), row)
        if ex.id in seen:
            raise MalformedRow(row, f"duplicate id {ex.id!r}")
        seen.add(ex.id)
        examples.append(ex)
    return examples


def load_dataset(path: str | Path) -> list[LabeledExample]:
    """Load and validate a dataset CSV; row order is preserved.

    Row numbers in errors count the header as row 1.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        return read_dataset(fh)


def _example_to_row(ex: LabeledExample) -> list[str]:
    start, end = ex.span if ex.span is not None else ("", "")
    return [
        ex.id,
        ex.candidate,
        ex.context,
        ex.file_path or "",
        str(start),
        str(end),
        ex.label.slug,
        ex.secret_type.slug if ex.secret_type else "",
    ]


def dataset_to_csv(examples: Sequence[LabeledExample]) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf)
    writer.writerow(COLUMNS)
    writer.writerows(_example_to_row(ex) for ex in examples)
    return buf.getvalue()


def write_dataset(examples: Sequence[LabeledExample], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(dataset_to_csv(examples))


# -- splitting


def _by_id(examples: Iterable[LabeledExample]) -> list[LabeledExample]:
    out = sorted(examples, key=lambda e: e.id)
    for a, b in zip(out, out[1:]):
        if a.id == b.id:
            raise ValueError(f"duplicate id in pool: {a.id!r}")
    return out


def _partition(pool: Sequence[LabeledExample]) -> tuple[list[LabeledExample], list[LabeledExample]]:
    pos = _by_id(e for e in pool if e.label is Label.SECRET)
    neg = _by_id(e for e in pool if e.label is Label.NON_SENSITIVE)
    return pos, neg


def _two_class_split(
    pool: Sequence[LabeledExample], seed: int, train_pos: int, train_neg: int, strategy: Strategy
) -> SplitSet:
    pos, neg = _partition(pool)
    need_pos = train_pos + 2 * HOLDOUT_PER_CLASS
    need_neg = train_neg + 2 * HOLDOUT_PER_CLASS
    if len(pos) < need_pos:
        raise InsufficientPool("secrets", len(pos), need_pos)
    if len(neg) < need_neg:
        raise InsufficientPool("non-secrets", len(neg), need_neg)

    rng = Xoshiro256(seed)
    rng.shuffle(pos)
    rng.shuffle(neg)
    h = HOLDOUT_PER_CLASS
    test = pos[:h] + neg[:h]
    validation = pos[h : 2 * h] + neg[h : 2 * h]
    train = pos[2 * h : 2 * h + train_pos] + neg[2 * h : 2 * h + train_neg]
    for part in (test, validation, train):
        rng.shuffle(part)
    return SplitSet(train, validation, test, strategy, seed)


def make_balanced_split(pool: Sequence[LabeledExample], seed: int) -> SplitSet:
    """12,000 + 12,000 train, 1,500 + 1,500 validation, 1,500 + 1,500 test."""
    return _two_class_split(pool, seed, BALANCED_TRAIN, BALANCED_TRAIN, Strategy.BALANCED)


def make_imbalanced_split(pool: Sequence[LabeledExample], seed: int) -> SplitSet:
    """3,750 + 20,250 train; validation and test balanced as above."""
    return _two_class_split(pool, seed, IMBALANCED_TRAIN_POS, IMBALANCED_TRAIN_NEG, Strategy.IMBALANCED)


def _largest_remainder(total: int, weights: list[int]) -> list[int]:
    denom = sum(weights)
    raw = [total * w / denom for w in weights]
    alloc = [int(r) for r in raw]
    order = sorted(range(len(weights)), key=lambda i: (-(raw[i] - alloc[i]), i))
    for i in order[: total - sum(alloc)]:
        alloc[i] += 1
    return alloc


def make_multiclass_split(pool: Sequence[LabeledExample], seed: int, stratify: bool = False) -> SplitSet:
    """9,000 / 3,000 / 3,000 split over typed secrets.

    Non-sensitive rows in ``pool`` are ignored.  Positives beyond the first
    15,000 by id are dropped.  With ``stratify`` each category contributes to
    validation and test in proportion to its size (largest remainder).
    """
    positives = [e for e in pool if e.label is Label.SECRET]
    untyped = [e.id for e in positives if e.secret_type is None]
    if untyped:
        raise MissingTypeLabel(f"{len(untyped)} secret rows lack secret_type (first: {min(untyped)!r})")
    positives = _by_id(positives)
    if len(positives) < MULTICLASS_POOL:
        raise InsufficientPool("typed secrets", len(positives), MULTICLASS_POOL)
    positives = positives[:MULTICLASS_POOL]

    rng = Xoshiro256(seed)
    if not stratify:
        rng.shuffle(positives)
        test = positives[:MULTICLASS_TEST]
        validation = positives[MULTICLASS_TEST : MULTICLASS_TEST + MULTICLASS_EVAL]
        train = positives[MULTICLASS_TEST + MULTICLASS_EVAL :]
    else:
        groups = {t: [e for e in positives if e.secret_type is t] for t in TaxonomyClass}
        classes = [t for t in TaxonomyClass if groups[t]]
        sizes = [len(groups[t]) for t in classes]
        test_q = _largest_remainder(MULTICLASS_TEST, sizes)
        val_q = _largest_remainder(MULTICLASS_EVAL, sizes)
        test, validation, train = [], [], []
        for t, nt, nv in zip(classes, test_q, val_q):
            members = groups[t]
            rng.shuffle(members)
            test += members[:nt]
            validation += members[nt : nt + nv]
            train += members[nt + nv :]
    for part in (test, validation, train):
        rng.shuffle(part)
    return SplitSet(train, validation, test, Strategy.MULTICLASS, seed)


def make_split(pool: Sequence[LabeledExample], strategy: Strategy, seed: int, stratify: bool = False) -> SplitSet:
    if strategy is Strategy.BALANCED:
        return make_balanced_split(pool, seed)
    if strategy is Strategy.IMBALANCED:
        return make_imbalanced_split(pool, seed)
    return make_multiclass_split(pool, seed, stratify=stratify)


def summarize(examples: Sequence[LabeledExample]) -> dict[str, int]:
    counts = Counter(e.label.slug for e in examples)
    return {"total": len(examples), "secret": counts["secret"], "non_sensitive": counts["non_sensitive"]}
