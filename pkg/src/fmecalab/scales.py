"""Five-point ordinal rating scales: severity, detectability, occurrence.

Scores are plain ints in 1..5, validated at the boundaries. Occurrence is
derived from a ratio (fraction of summaries exhibiting a failure mode) via
half-open-left buckets; ratios are compared as exact rationals so counts
like 9/36 never flicker across a threshold.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .errors import DomainError

SEVERITY = "severity"
DETECTABILITY = "detectability"
OCCURRENCE = "occurrence"
DIMENSIONS = (SEVERITY, DETECTABILITY, OCCURRENCE)

SCORE_MIN = 1
SCORE_MAX = 5


@dataclass(frozen=True)
class ScaleAnchor:
    """One row of a rating scale: score, short label, full definition."""

    dimension: str
    score: int
    label: str
    definition: str


ANCHORS: tuple[ScaleAnchor, ...] = (
    ScaleAnchor(SEVERITY, 1, "None",
                "The failure mode has no plausible clinical impact on the patient "
                "or the care process, even if used in practice."),
    ScaleAnchor(SEVERITY, 2, "Minor",
                "The failure mode could affect the patient but would not cause "
                "physical or psychological harm and would not require any medical "
                "intervention."),
    ScaleAnchor(SEVERITY, 3, "Considerable",
                "The failure mode could cause reversible physical or psychological "
                "harm, requiring additional care or treatment, without major "
                "medical intervention."),
    ScaleAnchor(SEVERITY, 4, "Major",
                "The failure mode could cause irreversible harm (permanent injury) "
                "or reversible harm requiring a major medical intervention (e.g., "
                "surgery, transfer to intensive care), without being immediately "
                "life-threatening."),
    ScaleAnchor(SEVERITY, 5, "Catastrophic",
                "The failure mode could directly or indirectly contribute to the "
                "patient's death, whether immediate or delayed."),
    ScaleAnchor(DETECTABILITY, 1, "Very easily detectable",
                "The error is immediately and universally obvious upon reading the "
                "summary (<10 seconds), without requiring clinical expertise."),
    ScaleAnchor(DETECTABILITY, 2, "Easily detectable",
                "The error is detectable from the summary alone after brief "
                "attention or reflection (≤ 1 minute), without consulting the "
                "source document or performing in-depth analysis."),
    ScaleAnchor(DETECTABILITY, 3, "Detectable but not immediate",
                "The error is detectable from the summary alone, but only after "
                "careful reading, contextual reasoning, or prolonged examination "
                "(>1 minute); detection is not systematic and does not require "
                "consulting the source document."),
    ScaleAnchor(DETECTABILITY, 4, "Poorly detectable",
                "The error is unlikely to be detected from the summary alone and "
                "can only be identified through a systematic review of the source "
                "document(s)."),
    ScaleAnchor(DETECTABILITY, 5, "Very poorly detectable",
                "The error is very unlikely to be detected before influencing "
                "clinical reasoning or patient care, even if the source document "
                "is available."),
    ScaleAnchor(OCCURRENCE, 1, "Very low", "< 1%"),
    ScaleAnchor(OCCURRENCE, 2, "Low", "1-10 %"),
    ScaleAnchor(OCCURRENCE, 3, "Medium", "10 - 60 %"),
    ScaleAnchor(OCCURRENCE, 4, "High", "60 - 90 %"),
    ScaleAnchor(OCCURRENCE, 5, "Very high", "> 90 %"),
)

_ANCHOR_INDEX = {(a.dimension, a.score): a for a in ANCHORS}

# Half-open-left occurrence buckets: a ratio equal to a threshold falls in
# the upper bucket ("< 1%" keeps exactly 1% out of score 1).
_OCCURRENCE_THRESHOLDS = (
    (Fraction(1, 100), 1),
    (Fraction(1, 10), 2),
    (Fraction(6, 10), 3),
    (Fraction(9, 10), 4),
)


def validate_score(dimension: str, raw: int) -> int:
    """Accept an integer 1..5 for the given dimension, reject everything else."""
    if dimension not in DIMENSIONS:
        raise DomainError(f"unknown scale dimension {dimension!r}",
                          dimension=dimension)
    if not isinstance(raw, int) or isinstance(raw, bool) or not SCORE_MIN <= raw <= SCORE_MAX:
        raise DomainError(
            f"{dimension} score must be an integer in {SCORE_MIN}..{SCORE_MAX}, got {raw!r}",
            dimension=dimension, value=raw)
    return raw


def scale_anchor(dimension: str, score: int) -> ScaleAnchor:
    """Return the verbatim anchor for (dimension, score)."""
    validate_score(dimension, score)
    return _ANCHOR_INDEX[(dimension, score)]


def occurrence_score(ratio) -> int:
    """Map a ratio in [0, 1] to an occurrence score 1..5.

    ``ratio`` may be a ``Fraction`` (exact, preferred), an int, or a float;
    floats are used with their exact binary value. Buckets are
    half-open-left: [0, 1%) -> 1, [1%, 10%) -> 2, [10%, 60%) -> 3,
    [60%, 90%) -> 4, [90%, 1] -> 5.
    """
    if isinstance(ratio, Rational):
        r = Fraction(ratio)
    elif isinstance(ratio, float):
        r = Fraction(ratio)
    else:
        raise DomainError(f"occurrence ratio must be a number, got {type(ratio).__name__}",
                          value=ratio)
    if r < 0 or r > 1:
        raise DomainError(f"occurrence ratio must lie in [0, 1], got {ratio}", value=str(ratio))
    score = 5
    for threshold, below_score in _OCCURRENCE_THRESHOLDS:
        if r < threshold:
            score = below_score
            break
    return score


def render_anchor_table() -> str:
    """Plain-text reference table of all 15 anchors, for reviewer handouts."""
    lines = []
    for dim in DIMENSIONS:
        lines.append(dim.capitalize())
        lines.append("=" * len(dim))
        for score in range(SCORE_MIN, SCORE_MAX + 1):
            a = _ANCHOR_INDEX[(dim, score)]
            lines.append(f"  {a.score}  {a.label}")
            lines.append(f"     {a.definition}")
        lines.append("")
    return "\n".join(lines)
