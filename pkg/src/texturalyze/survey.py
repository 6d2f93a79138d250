"""Aggregation of survey records into contingency tables, Likert summaries and rating matrices."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyTable, UnknownQuestion, ZeroVariance
from .ingest import LIKING_QUESTIONS, StudyConfig, SurveyRecord


class PrunedLabelsWarning(UserWarning):
    """Rows or columns without any selection were dropped from a contingency table."""


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    rows: tuple[str, ...]
    columns: tuple[str, ...]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def column(self, name: str) -> np.ndarray:
        return self.counts[:, self.columns.index(name)]


def tally_cata(records: Sequence[SurveyRecord], config: StudyConfig) -> ContingencyTable:
    """Unpruned burgers x vocabulary selection counts (rows sorted by burger id)."""
    burgers = sorted({r.burger_id for r in records})
    row_of = {b: i for i, b in enumerate(burgers)}
    col_of = {a: j for j, a in enumerate(config.cata_vocabulary)}
    counts = np.zeros((len(burgers), len(col_of)), dtype=np.int64)
    for rec in records:
        for attr in rec.cata_selections:
            counts[row_of[rec.burger_id], col_of[attr]] += 1
    return ContingencyTable(tuple(burgers), tuple(config.cata_vocabulary), counts)


def build_contingency(records: Sequence[SurveyRecord], config: StudyConfig) -> ContingencyTable:
    """Count CATA selections per burger, pruning all-zero rows and columns."""
    if not records:
        raise EmptyTable("no survey records")
    table = tally_cata(records, config)
    counts = table.counts
    if counts.sum() == 0:
        raise EmptyTable("no CATA attribute was selected for any burger")
    keep_r = counts.sum(axis=1) > 0
    keep_c = counts.sum(axis=0) > 0
    dropped = [r for r, k in zip(table.rows, keep_r) if not k] + [c for c, k in zip(table.columns, keep_c) if not k]
    if dropped:
        warnings.warn(f"dropping never-selected rows/columns: {', '.join(dropped)}", PrunedLabelsWarning, stacklevel=2)
    return ContingencyTable(
        tuple(r for r, k in zip(table.rows, keep_r) if k),
        tuple(c for c, k in zip(table.columns, keep_c) if k),
        counts[np.ix_(keep_r, keep_c)],
    )


@dataclass(frozen=True, eq=False)
class LikertSummary:
    question: str
    burgers: tuple[str, ...]
    mean: np.ndarray
    sd: np.ndarray
    count: np.ndarray

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.burgers, self.mean.tolist()))


def _check_question(records, question):
    if not records:
        raise UnknownQuestion(f"no records to summarise for {question!r}")
    first = records[0]
    if question not in LIKING_QUESTIONS and question not in first.attribute_ratings:
        raise UnknownQuestion(f"unknown question {question!r}")


def likert_summary(records: Sequence[SurveyRecord], question: str) -> LikertSummary:
    """Per-burger mean and sample standard deviation of one Likert question."""
    _check_question(records, question)
    by_burger: dict[str, list[int]] = {}
    for rec in records:
        by_burger.setdefault(rec.burger_id, []).append(rec.rating(question))
    burgers = tuple(sorted(by_burger))
    mean, sd, count = [], [], []
    for b in burgers:
        values = np.array(by_burger[b], dtype=float)
        mean.append(values.mean())
        sd.append(values.std(ddof=1) if values.size > 1 else math.nan)
        count.append(values.size)
    return LikertSummary(question, burgers, np.array(mean), np.array(sd), np.array(count))


@dataclass(frozen=True, eq=False)
class RatingsMatrix:
    """Long-form ratings of one question, optionally standardised.

    ``center`` and ``scale`` hold the pooled mean and sample standard
    deviation used for standardisation; both are ``None`` for raw values.
    """

    question: str
    participant_ids: tuple[str, ...]
    burger_ids: tuple[str, ...]
    values: np.ndarray
    center: float | None = None
    scale: float | None = None

    @property
    def standardized(self) -> bool:
        return self.scale is not None

    def inverse(self) -> "RatingsMatrix":
        if not self.standardized:
            return self
        return RatingsMatrix(
            self.question, self.participant_ids, self.burger_ids, self.values * self.scale + self.center
        )

    def to_raw(self, z):
        z = np.asarray(z, dtype=float)
        return z if not self.standardized else z * self.scale + self.center

    def to_standard(self, x):
        x = np.asarray(x, dtype=float)
        return x if not self.standardized else (x - self.center) / self.scale


def ratings_matrix(records: Sequence[SurveyRecord], question: str) -> RatingsMatrix:
    _check_question(records, question)
    ordered = sorted(records, key=lambda r: (r.participant_id, r.burger_id))
    return RatingsMatrix(
        question,
        tuple(r.participant_id for r in ordered),
        tuple(r.burger_id for r in ordered),
        np.array([r.rating(question) for r in ordered], dtype=float),
    )


def zscore(matrix: RatingsMatrix) -> RatingsMatrix:
    """Standardise with one pooled mean and sample (n - 1) standard deviation."""
    raw = matrix.inverse()
    values = raw.values
    if values.size < 2 or np.ptp(values) == 0:
        raise ZeroVariance(f"{matrix.question!r} has no variance to standardise")
    center = float(values.mean())
    scale = float(values.std(ddof=1))
    return RatingsMatrix(
        matrix.question, matrix.participant_ids, matrix.burger_ids, (values - center) / scale, center, scale
    )
