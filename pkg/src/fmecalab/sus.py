"""System Usability Scale scoring, grading, and aggregation.

The 10-item questionnaire alternates positively and negatively worded
statements; odd items contribute ``response - 1``, even items ``5 -
response``, and the contribution sum is rescaled by 2.5 to land on 0-100.
Grade bands are configuration data anchored at the published thresholds
(>= 80.3 excellent, 68 average, < 51 poor).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ValidationError

N_ITEMS = 10


@dataclass(frozen=True)
class SusResponse:
    evaluator_id: str
    items: tuple[int, ...]  # exactly 10, each 1..5, fixed form order


@dataclass(frozen=True)
class SusResult:
    evaluator_id: str
    score: float
    grade: str
    label: str


@dataclass(frozen=True)
class GradeBand:
    """Ordered band: a score falls here when score < limit (or == with inclusive)."""

    limit: float
    inclusive: bool
    grade: str
    label: str


# Default bands, evaluated in order. Published anchors: below 51 is poor (F),
# 68 itself still grades average (C), 80.3 and above is excellent (A). The
# good band is split at 74 so its upper half carries the B+ sub-grade.
DEFAULT_GRADE_BANDS: tuple[GradeBand, ...] = (
    GradeBand(51.0, False, "F", "Poor"),
    GradeBand(68.0, True, "C", "Average"),
    GradeBand(74.0, False, "B", "Good"),
    GradeBand(80.3, False, "B+", "Good"),
    GradeBand(100.0, True, "A", "Excellent"),
)


def validate_response(r: SusResponse) -> None:
    if len(r.items) != N_ITEMS:
        raise ValidationError(
            f"SUS response must have exactly {N_ITEMS} items, got {len(r.items)}",
            field="items", evaluator=r.evaluator_id)
    for i, v in enumerate(r.items, start=1):
        if not isinstance(v, int) or isinstance(v, bool) or not 1 <= v <= 5:
            raise ValidationError(
                f"SUS item {i} must be an integer in 1..5, got {v!r}",
                field=f"items[{i}]", evaluator=r.evaluator_id)


def sus_score(r: SusResponse) -> SusResult:
    """Score one completed questionnaire on the 0-100 scale."""
    validate_response(r)
    total = 0
    for i, v in enumerate(r.items, start=1):
        total += (v - 1) if i % 2 == 1 else (5 - v)
    score = total * 2.5
    grade, label = sus_grade(score)
    return SusResult(r.evaluator_id, score, grade, label)


def sus_grade(score: float, bands: tuple[GradeBand, ...] = DEFAULT_GRADE_BANDS) -> tuple[str, str]:
    """Map a 0-100 score to (grade, label) using the ordered band table."""
    if not 0 <= score <= 100:
        raise DomainError(f"SUS score must lie in [0, 100], got {score}", value=score)
    for band in bands:
        if score < band.limit or (band.inclusive and score == band.limit):
            return band.grade, band.label
    raise DomainError(f"no grade band covers score {score}", value=score)


@dataclass(frozen=True)
class SusAggregate:
    mean: float
    sd: float
    n: int
    grade: str
    label: str
    grade_counts: dict[str, int]


def sus_aggregate(results: list[SusResult], sample_sd: bool = False) -> SusAggregate:
    """Mean, standard deviation (population by default), and grade histogram.

    ``sample_sd=True`` switches to the n-1 denominator.
    """
    if not results:
        raise DomainError("cannot aggregate an empty list of SUS results")
    n = len(results)
    mean = sum(r.score for r in results) / n
    ss = sum((r.score - mean) ** 2 for r in results)
    if sample_sd:
        sd = math.sqrt(ss / (n - 1)) if n > 1 else 0.0
    else:
        sd = math.sqrt(ss / n)
    counts: dict[str, int] = {}
    for r in results:
        counts[r.grade] = counts.get(r.grade, 0) + 1
    grade, label = sus_grade(mean)
    return SusAggregate(mean=mean, sd=sd, n=n, grade=grade, label=label, grade_counts=counts)
