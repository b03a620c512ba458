"""Rating-scale anchors, score validation, and the occurrence bucketing."""
from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fmecalab import (
    ANCHORS,
    DETECTABILITY,
    DIMENSIONS,
    OCCURRENCE,
    SEVERITY,
    DomainError,
    occurrence_score,
    render_anchor_table,
    scale_anchor,
    validate_score,
)


class TestAnchors:
    def test_every_dimension_has_five_anchors(self):
        for dim in DIMENSIONS:
            scores = [a.score for a in ANCHORS if a.dimension == dim]
            assert scores == [1, 2, 3, 4, 5]

    def test_severity_labels(self):
        labels = [a.label for a in ANCHORS if a.dimension == SEVERITY]
        assert labels == ["None", "Minor", "Considerable", "Major",
                          "Catastrophic"]

    def test_detectability_labels(self):
        labels = [a.label for a in ANCHORS if a.dimension == DETECTABILITY]
        assert labels == [
            "Very easily detectable",
            "Easily detectable",
            "Detectable but not immediate",
            "Poorly detectable",
            "Very poorly detectable",
        ]

    def test_occurrence_labels(self):
        labels = [a.label for a in ANCHORS if a.dimension == OCCURRENCE]
        assert labels == ["Very low", "Low", "Medium", "High", "Very high"]

    def test_anchor_definitions_pin_key_phrases(self):
        assert "death" in scale_anchor(SEVERITY, 5).definition
        assert "no plausible clinical impact" in scale_anchor(SEVERITY, 1).definition
        assert "major medical intervention" in scale_anchor(SEVERITY, 4).definition
        assert "<10 seconds" in scale_anchor(DETECTABILITY, 1).definition
        assert "systematic review of the source" in scale_anchor(DETECTABILITY, 4).definition

    def test_render_anchor_table_lists_everything(self):
        text = render_anchor_table()
        for a in ANCHORS:
            assert a.label in text
        for dim in DIMENSIONS:
            assert dim.capitalize() in text


class TestValidateScore:
    @pytest.mark.parametrize("dim", DIMENSIONS)
    @pytest.mark.parametrize("score", [1, 2, 3, 4, 5])
    def test_accepts_valid(self, dim, score):
        assert validate_score(dim, score) == score

    @pytest.mark.parametrize("bad", [0, 6, -1, 100])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(DomainError):
            validate_score(SEVERITY, bad)

    @pytest.mark.parametrize("bad", [2.0, "3", None, True, False])
    def test_rejects_non_integers(self, bad):
        with pytest.raises(DomainError):
            validate_score(SEVERITY, bad)

    def test_rejects_unknown_dimension(self):
        with pytest.raises(DomainError):
            validate_score("likelihood", 3)


class TestOccurrenceScore:
    def test_anchor_points(self):
        assert occurrence_score(Fraction(0)) == 1
        assert occurrence_score(Fraction(1, 200)) == 1
        assert occurrence_score(Fraction(1, 100)) == 2    # boundary enters upper bucket
        assert occurrence_score(Fraction(5, 100)) == 2
        assert occurrence_score(Fraction(1, 10)) == 3
        assert occurrence_score(Fraction(9, 36)) == 3
        assert occurrence_score(Fraction(59, 100)) == 3
        assert occurrence_score(Fraction(6, 10)) == 4
        assert occurrence_score(Fraction(89, 100)) == 4
        assert occurrence_score(Fraction(9, 10)) == 5
        assert occurrence_score(Fraction(1)) == 5

    def test_just_below_each_boundary(self):
        eps = Fraction(1, 10**9)
        assert occurrence_score(Fraction(1, 100) - eps) == 1
        assert occurrence_score(Fraction(1, 10) - eps) == 2
        assert occurrence_score(Fraction(6, 10) - eps) == 3
        assert occurrence_score(Fraction(9, 10) - eps) == 4

    def test_accepts_floats_and_ints(self):
        assert occurrence_score(0.25) == 3
        assert occurrence_score(0) == 1
        assert occurrence_score(1) == 5

    @pytest.mark.parametrize("bad", [Fraction(-1, 10), Fraction(11, 10), -0.5, 1.5])
    def test_rejects_out_of_unit_interval(self, bad):
        with pytest.raises(DomainError):
            occurrence_score(bad)

    def test_rejects_non_numbers(self):
        with pytest.raises(DomainError):
            occurrence_score("0.5")

    @given(st.fractions(min_value=0, max_value=1))
    def test_every_ratio_lands_in_exactly_one_bucket(self, ratio):
        score = occurrence_score(ratio)
        assert score in (1, 2, 3, 4, 5)
        bounds = {
            1: (Fraction(0), Fraction(1, 100)),
            2: (Fraction(1, 100), Fraction(1, 10)),
            3: (Fraction(1, 10), Fraction(6, 10)),
            4: (Fraction(6, 10), Fraction(9, 10)),
            5: (Fraction(9, 10), Fraction(2)),
        }
        lo, hi = bounds[score]
        assert lo <= ratio < hi or (score == 5 and ratio == 1)

    @given(st.fractions(min_value=0, max_value=1),
           st.fractions(min_value=0, max_value=1))
    def test_monotone_in_ratio(self, a, b):
        if a > b:
            a, b = b, a
        assert occurrence_score(a) <= occurrence_score(b)

    def test_count_based_ratios_are_exact(self):
        # 1% of a 100-summary round is exactly the bucket edge
        assert occurrence_score(Fraction(1, 100)) == 2
        # and floats that would round badly do not shift the bucket
        assert occurrence_score(Fraction(3, 5)) == 4
        assert occurrence_score(Fraction(3, 5) - Fraction(1, 10**12)) == 3
