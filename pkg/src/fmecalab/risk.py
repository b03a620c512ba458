"""Criticality analysis: occurrence ratios, RPN, and the ranked risk register.

Occurrence is the proportion of a round's summaries in which a failure mode
was flagged by at least a consensus number of reviewers (default: strict
majority). Severity and detectability pool every instance score recorded on
consensus-flagged summaries and aggregate by median (default) or maximum.
Modes with no consensus-flagged summary keep occurrence score 1 and report
their RPN as not assessable rather than a fabricated number.
"""
from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass
from fractions import Fraction

from . import scales
from .agreement import format_number
from .errors import WorkflowError

NOT_ASSESSABLE = "not assessable"

# Exports repeat this caution because a single product hides its factors.
RPN_CAVEAT = (
    "Caution: the risk priority number multiplies occurrence, severity, and "
    "detectability as if they were equally weighted and independent, which "
    "they are not guaranteed to be. Use the ranking as a screening aid; "
    "'not assessable' marks modes without enough consensus-flagged data to "
    "score.")


@dataclass(frozen=True)
class Support:
    """Evidence counts behind one register entry."""

    summaries_flagged: int
    instances: int
    reviewers: int


@dataclass(frozen=True)
class RiskEntry:
    failure_mode_id: str
    occurrence_ratio: Fraction
    occurrence: int
    severity: int | None
    detectability: int | None
    rpn: int | None
    support: Support

    @property
    def assessable(self) -> bool:
        return self.rpn is not None


@dataclass(frozen=True)
class RiskRegister:
    """One entry per failure mode, ranked by descending criticality."""

    round_id: str
    aggregation: str
    consensus: int
    entries: tuple[RiskEntry, ...]


def rpn(o: int, s: int, d: int) -> int:
    """Risk priority number: the plain product of the three scores."""
    scales.validate_score(scales.OCCURRENCE, o)
    scales.validate_score(scales.SEVERITY, s)
    scales.validate_score(scales.DETECTABILITY, d)
    return o * s * d


def default_consensus(n_reviewers: int) -> int:
    """Strict majority of the round's reviewers."""
    return n_reviewers // 2 + 1


def _closed_round(campaign, round_id: str):
    rnd = campaign.round(round_id)
    if rnd.is_open:
        raise WorkflowError(
            f"round {round_id!r} is open; risk derives from closed rounds",
            round=round_id)
    return rnd


def _flagging_reviewers(campaign, round_id, rnd, summary_id, mode_id):
    flagging = []
    for rid in sorted(rnd.reviewer_ids):
        rec = campaign.peek_record(round_id, rid, summary_id)
        if rec is not None and rec.submitted and rec.flags[mode_id]:
            flagging.append(rid)
    return flagging


def occurrence_ratio(campaign, round_id: str, failure_mode_id: str,
                     consensus: int | None = None) -> Fraction:
    """Fraction of the round's summaries consensus-flagged for the mode."""
    rnd = _closed_round(campaign, round_id)
    tax = campaign.taxonomy(rnd.taxonomy_version)
    tax.failure_mode(failure_mode_id)
    threshold = consensus if consensus is not None \
        else default_consensus(len(rnd.reviewer_ids))
    hits = 0
    for sid in sorted(rnd.summary_ids):
        flagging = _flagging_reviewers(campaign, round_id, rnd, sid,
                                       failure_mode_id)
        if len(flagging) >= threshold:
            hits += 1
    return Fraction(hits, len(rnd.summary_ids))


def _aggregate(values: list[int], aggregation: str) -> int:
    if aggregation == "max":
        return max(values)
    if aggregation == "median":
        return int(math.floor(statistics.median(values) + 0.5))
    raise WorkflowError(f"unknown aggregation {aggregation!r}")


def risk_register(campaign, round_id: str, aggregation: str = "median",
                  consensus: int | None = None) -> RiskRegister:
    """Build the ranked register over every failure mode of the round."""
    if aggregation not in ("median", "max"):
        raise WorkflowError(f"unknown aggregation {aggregation!r}")
    rnd = _closed_round(campaign, round_id)
    tax = campaign.taxonomy(rnd.taxonomy_version)
    threshold = consensus if consensus is not None \
        else default_consensus(len(rnd.reviewer_ids))
    n_summaries = len(rnd.summary_ids)

    entries = []
    for mode_id in tax.failure_mode_ids():
        hits = 0
        severities: list[int] = []
        detectabilities: list[int] = []
        all_reviewers: set[str] = set()
        total_instances = 0
        for sid in sorted(rnd.summary_ids):
            flagging = _flagging_reviewers(campaign, round_id, rnd, sid, mode_id)
            all_reviewers.update(flagging)
            mode_instances = []
            for rid in flagging:
                rec = campaign.peek_record(round_id, rid, sid)
                mode_instances.extend(i for i in rec.instances
                                      if i.failure_mode_id == mode_id)
            total_instances += len(mode_instances)
            if len(flagging) >= threshold:
                hits += 1
                severities.extend(i.severity for i in mode_instances)
                detectabilities.extend(i.detectability for i in mode_instances)
        ratio = Fraction(hits, n_summaries)
        occurrence = scales.occurrence_score(ratio)
        if severities:
            severity = _aggregate(severities, aggregation)
            detectability = _aggregate(detectabilities, aggregation)
            value = rpn(occurrence, severity, detectability)
        else:
            severity = detectability = value = None
        entries.append(RiskEntry(mode_id, ratio, occurrence, severity,
                                 detectability, value,
                                 Support(hits, total_instances,
                                         len(all_reviewers))))

    entries.sort(key=lambda e: (-(e.rpn or 0), -(e.severity or 0),
                                -(e.detectability or 0), -e.occurrence,
                                e.failure_mode_id))
    return RiskRegister(round_id, aggregation, threshold, tuple(entries))


# -- rendering ---------------------------------------------------------------

def register_table(register: RiskRegister) -> str:
    """Delimiter-separated register, fixed column order, byte-stable."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["failure_mode_id", "occurrence_ratio", "occurrence",
                     "severity", "detectability", "rpn",
                     "summaries_flagged", "instances", "reviewers"])
    for e in register.entries:
        writer.writerow([
            e.failure_mode_id,
            format_number(float(e.occurrence_ratio)),
            e.occurrence,
            "" if e.severity is None else e.severity,
            "" if e.detectability is None else e.detectability,
            NOT_ASSESSABLE if e.rpn is None else e.rpn,
            e.support.summaries_flagged,
            e.support.instances,
            e.support.reviewers,
        ])
    out.write(f"# {RPN_CAVEAT}\n")
    return out.getvalue()


def risk_grid(register: RiskRegister) -> str:
    """Plain-text 5x5 occurrence x severity grid with a cell legend.

    Rows run severity 5 down to 1, columns occurrence 1 to 5; cells count
    assessable modes, and the legend lists which modes sit in each cell.
    """
    cells: dict[tuple[int, int], list[str]] = {}
    skipped = []
    for e in register.entries:
        if e.severity is None:
            skipped.append(e.failure_mode_id)
            continue
        cells.setdefault((e.occurrence, e.severity), []).append(e.failure_mode_id)

    lines = [f"Occurrence x severity grid for round {register.round_id}",
             "(cells count failure modes; higher severity at the top)",
             "",
             "          O=1   O=2   O=3   O=4   O=5"]
    for s in range(5, 0, -1):
        row = [f"S={s}    "]
        for o in range(1, 6):
            n = len(cells.get((o, s), ()))
            row.append(f"{n:>4}  " if n else "   .  ")
        lines.append("".join(row))
    lines.append("")
    for (o, s) in sorted(cells):
        lines.append(f"O={o}, S={s}: " + ", ".join(sorted(cells[(o, s)])))
    if skipped:
        lines.append("not assessable: " + ", ".join(sorted(skipped)))
    lines.append("")
    lines.append(RPN_CAVEAT)
    return "\n".join(lines) + "\n"
