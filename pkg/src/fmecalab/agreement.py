"""Chance-corrected inter-rater agreement statistics and report assembly.

Covers pairwise Cohen's kappa and Gwet's AC1, multi-rater Fleiss' kappa,
Gwet's AC1 and Krippendorff's alpha (nominal), score-level Pearson/Spearman
correlations, ICC(2,1), tolerance agreement, and unanimity. Degenerate
inputs (constant raters, no category variation, empty matrices) yield
first-class "undefined" estimates carrying a reason, never exceptions and
never sentinel numbers.

Rating matrices are sequences of unit rows, one cell per rater; ``None``
marks a missing rating where a statistic tolerates it.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DomainError

COHEN_KAPPA = "cohen_kappa"
GWET_AC1 = "gwet_ac1"
FLEISS_KAPPA = "fleiss_kappa"
KRIPPENDORFF_ALPHA = "krippendorff_alpha"
PEARSON_R = "pearson_r"
SPEARMAN_RHO = "spearman_rho"
ICC_2_1 = "icc_2_1"
TOLERANCE = "tolerance"
UNANIMITY = "unanimity"


@dataclass(frozen=True)
class AgreementEstimate:
    """One coefficient: value is None when the statistic is undefined."""

    metric: str
    value: float | None
    n_units: int
    rater_ids: tuple[str, ...] = ()
    diagnostics: dict = field(default_factory=dict)
    reason: str | None = None

    @property
    def defined(self) -> bool:
        return self.value is not None


def _undefined(metric, n_units, reason, rater_ids=(), **diagnostics) -> AgreementEstimate:
    return AgreementEstimate(metric, None, n_units, tuple(rater_ids),
                             dict(diagnostics), reason)


def _category_index(values) -> dict:
    """Stable category -> column index map (first-appearance order)."""
    index: dict = {}
    for v in values:
        if v is not None and v not in index:
            index[v] = len(index)
    return index


def _count_matrix(ratings, index) -> tuple[np.ndarray, np.ndarray]:
    """Per-unit category counts and per-unit rating counts."""
    counts = np.zeros((len(ratings), len(index)), dtype=float)
    for i, row in enumerate(ratings):
        for v in row:
            if v is not None:
                counts[i, index[v]] += 1
    return counts, counts.sum(axis=1)


def cohen_kappa(a, b, rater_ids=()) -> AgreementEstimate:
    """Cohen's kappa for two raters over parallel category sequences."""
    a, b = list(a), list(b)
    if len(a) != len(b):
        raise DomainError(f"sequences differ in length ({len(a)} vs {len(b)})")
    if not a:
        raise DomainError("cannot compute kappa on empty sequences")
    n = len(a)
    index = _category_index(a + b)
    ka = np.zeros(len(index))
    kb = np.zeros(len(index))
    for v in a:
        ka[index[v]] += 1
    for v in b:
        kb[index[v]] += 1
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    p_e = float(np.dot(ka / n, kb / n))
    prevalence = {str(c): float((ka[i] + kb[i]) / (2 * n)) for c, i in index.items()}
    diagnostics = {"p_o": p_o, "p_e": p_e, "prevalence": prevalence}
    if len(set(a)) == 1 and len(set(b)) == 1 and a[0] == b[0]:
        # both raters constant on the same category: p_e = 1
        return _undefined(COHEN_KAPPA, n, "expected agreement p_e = 1", rater_ids,
                          **diagnostics)
    value = (p_o - p_e) / (1.0 - p_e)
    return AgreementEstimate(COHEN_KAPPA, value, n, tuple(rater_ids), diagnostics)


def gwet_ac1(ratings, categories=None, rater_ids=()) -> AgreementEstimate:
    """Gwet's AC1 over a units x raters matrix (two raters included).

    ``categories`` fixes the category universe; by default it is the set of
    observed values. Every unit must carry at least two ratings.
    """
    ratings = [list(row) for row in ratings]
    if not ratings:
        raise DomainError("AC1 requires at least one unit")
    observed = [v for row in ratings for v in row if v is not None]
    index = _category_index(categories if categories is not None else observed)
    for v in observed:
        if v not in index:
            raise DomainError(f"rating {v!r} outside the declared categories", value=str(v))
    counts, m = _count_matrix(ratings, index)
    if (m < 2).any():
        bad = int(np.argmax(m < 2))
        raise DomainError(f"unit {bad} has fewer than 2 ratings", unit=bad)
    n_units = len(ratings)
    p_o = float(np.mean((counts * (counts - 1)).sum(axis=1) / (m * (m - 1))))
    pi = (counts / m[:, None]).mean(axis=0)
    q = len(index)
    prevalence = {str(c): float(pi[i]) for c, i in index.items()}
    if q <= 1:
        # single-category universe: every pair matches and chance carries no mass
        return AgreementEstimate(GWET_AC1, 1.0, n_units, tuple(rater_ids),
                                 {"p_o": p_o, "p_e": 0.0, "prevalence": prevalence})
    p_e = float((pi * (1.0 - pi)).sum() / (q - 1))
    value = (p_o - p_e) / (1.0 - p_e)
    return AgreementEstimate(GWET_AC1, value, n_units, tuple(rater_ids),
                             {"p_o": p_o, "p_e": p_e, "prevalence": prevalence})


def fleiss_kappa(ratings, rater_ids=()) -> AgreementEstimate:
    """Fleiss' kappa: every unit rated by the same number of raters."""
    ratings = [list(row) for row in ratings]
    if not ratings:
        raise DomainError("Fleiss' kappa requires at least one unit")
    n = len(ratings[0])
    for i, row in enumerate(ratings):
        if len(row) != n or any(v is None for v in row):
            raise DomainError(
                f"unit {i} does not carry exactly {n} ratings; Fleiss' kappa "
                "requires a fixed rater count per unit", unit=i)
    if n < 2:
        raise DomainError("Fleiss' kappa requires at least 2 raters")
    index = _category_index(v for row in ratings for v in row)
    counts, _ = _count_matrix(ratings, index)
    n_units = len(ratings)
    p_bar = float(np.mean((counts * (counts - 1)).sum(axis=1) / (n * (n - 1))))
    p_k = counts.sum(axis=0) / (n_units * n)
    p_e = float((p_k ** 2).sum())
    prevalence = {str(c): float(p_k[i]) for c, i in index.items()}
    diagnostics = {"p_o": p_bar, "p_e": p_e, "prevalence": prevalence}
    if len(index) <= 1:
        return _undefined(FLEISS_KAPPA, n_units, "expected agreement p_e = 1",
                          rater_ids, **diagnostics)
    value = (p_bar - p_e) / (1.0 - p_e)
    return AgreementEstimate(FLEISS_KAPPA, value, n_units, tuple(rater_ids), diagnostics)


def krippendorff_alpha(ratings, rater_ids=()) -> AgreementEstimate:
    """Krippendorff's alpha, nominal metric, tolerating missing ratings.

    Units with fewer than two ratings are excluded from the coincidence
    matrix; it is a domain error if no unit remains.
    """
    ratings = [list(row) for row in ratings]
    index = _category_index(v for row in ratings for v in row)
    counts, m = _count_matrix(ratings, index)
    pairable = m >= 2
    if not pairable.any():
        raise DomainError("alpha needs at least one unit with two or more ratings")
    counts = counts[pairable]
    m = m[pairable]
    n_units = int(pairable.sum())
    # coincidence matrix: ordered value pairs within units (self-pairs removed),
    # each unit scaled by 1/(m_u - 1)
    scaled = counts / (m - 1)[:, None]
    o = np.einsum("uc,uk->ck", scaled, counts) - np.diag(scaled.sum(axis=0))
    n_c = o.sum(axis=1)
    n_total = n_c.sum()
    d_o = float((o.sum() - np.trace(o)) / n_total)
    d_e = float((np.outer(n_c, n_c).sum() - (n_c * n_c).sum()) / (n_total * (n_total - 1)))
    prevalence = {str(c): float(n_c[i] / n_total) for c, i in index.items()}
    diagnostics = {"d_o": d_o, "d_e": d_e, "prevalence": prevalence}
    # single category among pairable values: dropping unpairable units can
    # degenerate a multi-category input, so test the coincidences, not index
    if int((n_c > 0).sum()) <= 1:
        return _undefined(KRIPPENDORFF_ALPHA, n_units,
                          "expected disagreement is zero (single category)",
                          rater_ids, **diagnostics)
    value = 1.0 - d_o / d_e
    return AgreementEstimate(KRIPPENDORFF_ALPHA, value, n_units, tuple(rater_ids),
                             diagnostics)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties replaced by the mean of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    sorted_values = values[order]
    i = 0
    while i < len(sorted_values):
        j = i
        while j + 1 < len(sorted_values) and sorted_values[j + 1] == sorted_values[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j + 2) / 2.0
        i = j + 1
    return ranks


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - x.mean()
    dy = y - y.mean()
    r = float(np.dot(dx, dy) / math.sqrt(np.dot(dx, dx) * np.dot(dy, dy)))
    return max(-1.0, min(1.0, r))


def pearson_r(x, y, rater_ids=()) -> AgreementEstimate:
    """Product-moment correlation; undefined when either input is constant."""
    x = np.asarray(list(x), dtype=float)
    y = np.asarray(list(y), dtype=float)
    if len(x) != len(y):
        raise DomainError(f"sequences differ in length ({len(x)} vs {len(y)})")
    if len(x) < 2:
        raise DomainError("correlation requires at least 2 paired values")
    n = len(x)
    if len(set(x.tolist())) == 1 or len(set(y.tolist())) == 1:
        return _undefined(PEARSON_R, n, "zero variance", rater_ids)
    return AgreementEstimate(PEARSON_R, _pearson(x, y), n, tuple(rater_ids))


def spearman_rho(x, y, rater_ids=()) -> AgreementEstimate:
    """Spearman's rho as Pearson over average ranks (tie-safe)."""
    x = np.asarray(list(x), dtype=float)
    y = np.asarray(list(y), dtype=float)
    if len(x) != len(y):
        raise DomainError(f"sequences differ in length ({len(x)} vs {len(y)})")
    if len(x) < 2:
        raise DomainError("correlation requires at least 2 paired values")
    n = len(x)
    if len(set(x.tolist())) == 1 or len(set(y.tolist())) == 1:
        return _undefined(SPEARMAN_RHO, n, "zero variance", rater_ids)
    value = _pearson(_average_ranks(x), _average_ranks(y))
    return AgreementEstimate(SPEARMAN_RHO, value, n, tuple(rater_ids))


# Denominators smaller than this are treated as degenerate; with ratings on
# small ordinal scales any true nonzero denominator is far larger.
_ICC_DENOMINATOR_FLOOR = 1e-9


def icc_2_1(ratings, rater_ids=()) -> AgreementEstimate:
    """ICC(2,1): two-way random effects, absolute agreement, single measure."""
    rows = [list(row) for row in ratings]
    if any(v is None for row in rows for v in row):
        raise DomainError(
            "ICC requires a complete matrix; filter to complete cases upstream")
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise DomainError(
            f"ICC requires at least 2 subjects and 2 raters, got shape {x.shape}")
    n, k = x.shape
    grand = x.mean()
    row_means = x.mean(axis=1)
    col_means = x.mean(axis=0)
    ss_rows = k * float(((row_means - grand) ** 2).sum())
    ss_cols = n * float(((col_means - grand) ** 2).sum())
    ss_total = float(((x - grand) ** 2).sum())
    ms_rows = ss_rows / (n - 1)
    ms_cols = ss_cols / (k - 1)
    ms_error = (ss_total - ss_rows - ss_cols) / ((n - 1) * (k - 1))
    diagnostics = {"ms_rows": ms_rows, "ms_cols": ms_cols, "ms_error": ms_error,
                   "n_subjects": n, "n_raters": k}
    denominator = ms_rows + (k - 1) * ms_error + k * (ms_cols - ms_error) / n
    if abs(denominator) < _ICC_DENOMINATOR_FLOOR:
        return _undefined(ICC_2_1, n, "zero variance (degenerate mean squares)",
                          rater_ids, **diagnostics)
    value = (ms_rows - ms_error) / denominator
    return AgreementEstimate(ICC_2_1, value, n, tuple(rater_ids), diagnostics)


def tolerance_agreement(x, y, t: int, rater_ids=()) -> AgreementEstimate:
    """Fraction of positions where two ordinal ratings differ by at most t."""
    x, y = list(x), list(y)
    if len(x) != len(y):
        raise DomainError(f"sequences differ in length ({len(x)} vs {len(y)})")
    if not x:
        raise DomainError("tolerance agreement requires at least one pair")
    if not isinstance(t, int) or t < 0:
        raise DomainError(f"tolerance must be a non-negative integer, got {t!r}")
    for v in list(x) + list(y):
        if not isinstance(v, int) or not 1 <= v <= 5:
            raise DomainError(f"ordinal ratings must be integers in 1..5, got {v!r}")
    hits = sum(1 for a, b in zip(x, y) if abs(a - b) <= t)
    value = hits / len(x)
    return AgreementEstimate(TOLERANCE, value, len(x), tuple(rater_ids),
                             {"tolerance": t})


def tolerance_agreement_multi(ratings, t: int, rater_ids=()) -> AgreementEstimate:
    """Mean pairwise tolerance agreement over all unordered rater pairs."""
    rows = [list(row) for row in ratings]
    if not rows:
        raise DomainError("tolerance agreement requires at least one unit")
    k = len(rows[0])
    if any(len(row) != k or any(v is None for v in row) for row in rows):
        raise DomainError("tolerance agreement requires a complete matrix")
    if k < 2:
        raise DomainError("tolerance agreement requires at least 2 raters")
    pair_values = []
    for i, j in combinations(range(k), 2):
        est = tolerance_agreement([r[i] for r in rows], [r[j] for r in rows], t)
        pair_values.append(est.value)
    value = sum(pair_values) / len(pair_values)
    return AgreementEstimate(TOLERANCE, value, len(rows), tuple(rater_ids),
                             {"tolerance": t, "n_pairs": len(pair_values)})


def unanimity_rate(ratings, rater_ids=()) -> AgreementEstimate:
    """Fraction of units on which every rater gave the identical value."""
    rows = [list(row) for row in ratings]
    if not rows:
        raise DomainError("unanimity requires at least one unit")
    for i, row in enumerate(rows):
        if any(v is None for v in row):
            raise DomainError(f"unit {i} has missing ratings", unit=i)
    value = sum(1 for row in rows if len(set(row)) == 1) / len(rows)
    return AgreementEstimate(UNANIMITY, value, len(rows), tuple(rater_ids))


# -- report assembly ---------------------------------------------------------

BINARY_CATEGORIES = (False, True)
TOLERANCE_STEPS = (0, 1, 2)


@dataclass(frozen=True)
class PairwiseBinary:
    rater_a: str
    rater_b: str
    kappa: AgreementEstimate
    ac1: AgreementEstimate


@dataclass(frozen=True)
class BinaryPanel:
    """Stage 1 or 2: pairwise kappa/AC1 plus the multi-rater coefficients."""

    stage: int
    n_units: int
    n_complete_units: int
    pairwise: tuple[PairwiseBinary, ...]
    fleiss: AgreementEstimate
    ac1: AgreementEstimate
    alpha: AgreementEstimate
    unanimity: AgreementEstimate
    complete_case_only: bool


@dataclass(frozen=True)
class PairwiseScores:
    rater_a: str
    rater_b: str
    pearson: AgreementEstimate
    spearman: AgreementEstimate


@dataclass(frozen=True)
class RaterScoreSummary:
    rater_id: str
    n: int
    mean: float | None
    sd: float | None


@dataclass(frozen=True)
class ScorePanel:
    """Stage 3 for one dimension: correlations, ICC, tolerance, per-rater."""

    dimension: str
    n_units: int
    n_complete_units: int
    inclusion: str
    pairwise: tuple[PairwiseScores, ...]
    icc: AgreementEstimate
    tolerances: tuple[AgreementEstimate, ...]
    per_rater: tuple[RaterScoreSummary, ...]


@dataclass(frozen=True)
class AgreementReport:
    round_id: str
    rater_ids: tuple[str, ...]
    stage1: BinaryPanel
    stage2: BinaryPanel
    stage3: dict[str, ScorePanel]


def _common_units(rows, i, j):
    return [(row[i], row[j]) for row in rows
            if row[i] is not None and row[j] is not None]


def _binary_panel(matrix) -> BinaryPanel:
    raters = matrix.rater_axis
    rows = matrix.rows()
    complete = [row for row in rows if all(v is not None for v in row)]
    gaps = len(complete) != len(rows)
    pairable = [row for row in rows
                if sum(1 for v in row if v is not None) >= 2]

    pairwise = []
    for i, j in combinations(range(len(raters)), 2):
        ids = (raters[i], raters[j])
        common = _common_units(rows, i, j)
        if not common:
            kappa = _undefined(COHEN_KAPPA, 0, "no commonly rated units", ids)
            ac1 = _undefined(GWET_AC1, 0, "no commonly rated units", ids)
        else:
            a = [p[0] for p in common]
            b = [p[1] for p in common]
            kappa = cohen_kappa(a, b, rater_ids=ids)
            ac1 = gwet_ac1([[x, y] for x, y in common],
                           categories=BINARY_CATEGORIES, rater_ids=ids)
        pairwise.append(PairwiseBinary(ids[0], ids[1], kappa, ac1))

    if complete:
        fleiss = fleiss_kappa(complete, rater_ids=raters)
        ac1_multi = gwet_ac1(complete, categories=BINARY_CATEGORIES,
                             rater_ids=raters)
        unanimity = unanimity_rate(complete, rater_ids=raters)
    else:
        reason = "no units rated by every reviewer"
        fleiss = _undefined(FLEISS_KAPPA, 0, reason, raters)
        ac1_multi = _undefined(GWET_AC1, 0, reason, raters)
        unanimity = _undefined(UNANIMITY, 0, reason, raters)
    if pairable:
        alpha = krippendorff_alpha(rows, rater_ids=raters)
    else:
        alpha = _undefined(KRIPPENDORFF_ALPHA, 0,
                           "no unit with two or more ratings", raters)
    return BinaryPanel(matrix.stage, matrix.n_units, len(complete),
                       tuple(pairwise), fleiss, ac1_multi, alpha, unanimity,
                       complete_case_only=gaps)


def _population_sd(values) -> float:
    mean = sum(values) / len(values)
    return math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))


def _score_panel(matrix, inclusion: str) -> ScorePanel:
    raters = matrix.rater_axis
    rows = matrix.rows()
    complete = [row for row in rows if all(v is not None for v in row)]

    pairwise = []
    for i, j in combinations(range(len(raters)), 2):
        ids = (raters[i], raters[j])
        common = _common_units(rows, i, j)
        if len(common) < 2:
            reason = "fewer than 2 commonly scored units"
            pairwise.append(PairwiseScores(
                ids[0], ids[1],
                _undefined(PEARSON_R, len(common), reason, ids),
                _undefined(SPEARMAN_RHO, len(common), reason, ids)))
            continue
        a = [p[0] for p in common]
        b = [p[1] for p in common]
        pairwise.append(PairwiseScores(ids[0], ids[1],
                                       pearson_r(a, b, rater_ids=ids),
                                       spearman_rho(a, b, rater_ids=ids)))

    if len(complete) >= 2:
        icc = icc_2_1(complete, rater_ids=raters)
    else:
        icc = _undefined(ICC_2_1, len(complete),
                         "fewer than 2 units scored by every reviewer", raters)
    if complete:
        tolerances = tuple(tolerance_agreement_multi(complete, t, rater_ids=raters)
                           for t in TOLERANCE_STEPS)
    else:
        tolerances = tuple(_undefined(TOLERANCE, 0,
                                      "no units scored by every reviewer",
                                      raters, tolerance=t)
                           for t in TOLERANCE_STEPS)

    per_rater = []
    for j, rid in enumerate(raters):
        values = [row[j] for row in rows if row[j] is not None]
        if values:
            per_rater.append(RaterScoreSummary(rid, len(values),
                                               sum(values) / len(values),
                                               _population_sd(values)))
        else:
            per_rater.append(RaterScoreSummary(rid, 0, None, None))

    return ScorePanel(matrix.dimension, matrix.n_units, len(complete),
                      inclusion, tuple(pairwise), icc, tolerances,
                      tuple(per_rater))


def agreement_report(campaign, round_id: str, cell_policy=None) -> AgreementReport:
    """Assemble the three-stage report for a closed round.

    Undefined statistics are carried with their reasons; degenerate rounds
    (gaps from forced closure, empty Stage-3 matrices) still render.
    """
    from .campaign import CellPolicy

    policy = cell_policy if cell_policy is not None else CellPolicy()
    stage1 = _binary_panel(campaign.stage1_matrix(round_id))
    stage2 = _binary_panel(campaign.stage2_matrix(round_id))
    rnd = campaign.round(round_id)
    threshold = policy.min_raters if policy.min_raters is not None \
        else len(rnd.reviewer_ids)
    label = "complete-case" if threshold == len(rnd.reviewer_ids) \
        else f"min {threshold} raters"
    inclusion = (f"{label}, aggregation={policy.aggregation} over instances")
    stage3 = {}
    for dimension in ("severity", "detectability"):
        matrix = campaign.stage3_matrix(round_id, dimension, policy)
        stage3[dimension] = _score_panel(matrix, inclusion)
    return AgreementReport(round_id, tuple(sorted(rnd.reviewer_ids)),
                           stage1, stage2, stage3)


# -- rendering ---------------------------------------------------------------

def format_number(value: float | None, places: int = 3) -> str:
    """Fixed-point decimal, round-half-even; empty string for undefined."""
    if value is None:
        return ""
    return format(value, f".{places}f")


def describe(estimate: AgreementEstimate) -> str:
    if estimate.defined:
        return format_number(estimate.value)
    return f"undefined ({estimate.reason})"


def _csv(rows) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerows(rows)
    return out.getvalue()


def _binary_table(panel: BinaryPanel) -> str:
    rows = [["stage", "scope", "rater_a", "rater_b", "metric", "value",
             "n_units", "p_o", "p_e", "reason"]]

    def emit(scope, ra, rb, est):
        rows.append([panel.stage, scope, ra, rb, est.metric,
                     format_number(est.value), est.n_units,
                     format_number(est.diagnostics.get("p_o")),
                     format_number(est.diagnostics.get("p_e")),
                     est.reason or ""])

    for pair in panel.pairwise:
        emit("pairwise", pair.rater_a, pair.rater_b, pair.kappa)
        emit("pairwise", pair.rater_a, pair.rater_b, pair.ac1)
    for est in (panel.fleiss, panel.ac1, panel.alpha, panel.unanimity):
        emit("multi", "", "", est)
    return _csv(rows)


def _score_table(report: AgreementReport) -> str:
    rows = [["dimension", "scope", "rater_a", "rater_b", "metric", "value",
             "n_units", "reason"]]
    for dimension in sorted(report.stage3):
        panel = report.stage3[dimension]

        def emit(scope, ra, rb, metric, est):
            rows.append([dimension, scope, ra, rb, metric,
                         format_number(est.value), est.n_units,
                         est.reason or ""])

        for pair in panel.pairwise:
            emit("pairwise", pair.rater_a, pair.rater_b, PEARSON_R, pair.pearson)
            emit("pairwise", pair.rater_a, pair.rater_b, SPEARMAN_RHO,
                 pair.spearman)
        emit("multi", "", "", ICC_2_1, panel.icc)
        for t, est in zip(TOLERANCE_STEPS, panel.tolerances):
            emit("multi", "", "", f"tolerance_{t}", est)
        for summary in panel.per_rater:
            rows.append([dimension, "rater", summary.rater_id, "", "mean",
                         format_number(summary.mean), summary.n, ""])
            rows.append([dimension, "rater", summary.rater_id, "", "sd",
                         format_number(summary.sd), summary.n, ""])
    return _csv(rows)


def report_tables(report: AgreementReport) -> dict[str, str]:
    """Delimiter-separated tables, one file per stage, byte-stable."""
    return {
        "agreement_stage1.csv": _binary_table(report.stage1),
        "agreement_stage2.csv": _binary_table(report.stage2),
        "agreement_stage3.csv": _score_table(report),
    }


def render_report_text(report: AgreementReport) -> str:
    """Single plain-text document with one panel per stage."""
    lines = [f"Agreement report for round {report.round_id}",
             f"Raters: {', '.join(report.rater_ids)}",
             "Values are shown to 3 decimal places (round-half-even).",
             ""]
    stage_titles = {1: "Stage 1: subcategory presence",
                    2: "Stage 2: failure-mode presence"}
    for panel in (report.stage1, report.stage2):
        suffix = " [complete-case statistics only]" if panel.complete_case_only else ""
        lines.append(f"{stage_titles[panel.stage]} ({panel.n_units} units){suffix}")
        lines.append("  Pairwise:")
        for pair in panel.pairwise:
            lines.append(f"    {pair.rater_a} vs {pair.rater_b}: "
                         f"kappa {describe(pair.kappa)}, AC1 {describe(pair.ac1)}")
        lines.append(f"  Multi-rater ({panel.n_complete_units} complete units): "
                     f"Fleiss kappa {describe(panel.fleiss)}, "
                     f"AC1 {describe(panel.ac1)}, "
                     f"alpha {describe(panel.alpha)}, "
                     f"unanimity {describe(panel.unanimity)}")
        lines.append("")
    for dimension in sorted(report.stage3):
        panel = report.stage3[dimension]
        lines.append(f"Stage 3: {dimension} scores ({panel.n_units} units; "
                     f"{panel.inclusion})")
        lines.append("  Pairwise:")
        for pair in panel.pairwise:
            lines.append(f"    {pair.rater_a} vs {pair.rater_b}: "
                         f"r {describe(pair.pearson)}, rho {describe(pair.spearman)}")
        lines.append(f"  ICC(2,1): {describe(panel.icc)}")
        tolerance_bits = ", ".join(
            f"within +/-{t}: {describe(est)}" if t else f"exact: {describe(est)}"
            for t, est in zip(TOLERANCE_STEPS, panel.tolerances))
        lines.append(f"  Tolerance: {tolerance_bits}")
        for summary in panel.per_rater:
            if summary.mean is None:
                lines.append(f"  {summary.rater_id}: no scored units")
            else:
                lines.append(f"  {summary.rater_id}: mean "
                             f"{format_number(summary.mean)} "
                             f"+/- {format_number(summary.sd)} "
                             f"(n={summary.n})")
        lines.append("")
    return "\n".join(lines)
