"""Reviewers, rounds, summaries, annotation records, and matrix derivation.

The :class:`Campaign` engine is the in-memory source of truth for one
evaluation campaign. Records are written with compare-and-swap on
``record_version`` (last-writer-wins is forbidden), rounds are immutable
once closed, and the Stage 1/2/3 rating matrices that feed the agreement
statistics are pure derivations over closed rounds.
"""
from __future__ import annotations

import math
import statistics
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from . import scales, sus
from .errors import (CompletenessError, ConflictError, NotFoundError,
                     ReferentialError, ValidationError, WorkflowError)
from .taxonomy import Taxonomy, default_taxonomy

OPEN = "open"
CLOSED = "closed"

STAGE_SUBCATEGORY = 1
STAGE_FAILURE_MODE = 2
STAGE_SCORES = 3


@dataclass(frozen=True)
class SummaryDocument:
    """A source document paired with the generated summary under review."""

    id: str
    source_text: str
    generated_summary: str
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Reviewer:
    id: str
    display_name: str
    role: str = ""


@dataclass(frozen=True)
class Round:
    id: str
    taxonomy_version: int
    reviewer_ids: frozenset[str]
    summary_ids: frozenset[str]
    status: str = OPEN

    @property
    def is_open(self) -> bool:
        return self.status == OPEN


@dataclass(frozen=True)
class FailureInstance:
    """One concrete occurrence of a failure mode inside one summary."""

    failure_mode_id: str
    comment: str
    severity: int
    detectability: int


@dataclass(frozen=True)
class AnnotationRecord:
    """One reviewer's complete judgment of one summary in one round.

    ``flags`` carries exactly one boolean per failure mode of the round's
    taxonomy; every instance must belong to a flagged mode and every
    flagged mode must carry at least one instance.
    """

    round_id: str
    reviewer_id: str
    summary_id: str
    flags: dict[str, bool]
    instances: tuple[FailureInstance, ...] = ()
    record_version: int = 0
    submitted: bool = True


@dataclass(frozen=True)
class CellPolicy:
    """Stage-3 unit inclusion and per-reviewer instance aggregation.

    ``min_raters`` is the number of reviewers that must have flagged a
    (summary, failure mode) cell for it to enter the matrix; ``None`` means
    all raters (complete case). Aggregation over a reviewer's multiple
    instances is ``"max"`` (worst case) or ``"median"`` (rounded half up).
    """

    min_raters: int | None = None
    aggregation: str = "max"


@dataclass(frozen=True)
class AnnotationMatrix:
    """Rectangular units x raters view of a closed round, one row per unit."""

    stage: int
    unit_axis: tuple[tuple[str, str], ...]
    rater_axis: tuple[str, ...]
    cells: tuple[tuple[object, ...], ...]
    dimension: str | None = None

    @property
    def n_units(self) -> int:
        return len(self.unit_axis)

    def rows(self) -> list[list]:
        """Cells as mutable row lists for the agreement statistics."""
        return [list(row) for row in self.cells]

    def column(self, rater_id: str) -> list:
        j = self.rater_axis.index(rater_id)
        return [row[j] for row in self.cells]


@dataclass(frozen=True)
class CompletenessReport:
    round_id: str
    missing: tuple[tuple[str, str], ...]
    progress: dict[str, float]
    expected: int
    submitted: int

    @property
    def complete(self) -> bool:
        return not self.missing


def validate_record(record: AnnotationRecord, taxonomy: Taxonomy) -> None:
    """Enforce the record invariants against the round's taxonomy."""
    mode_ids = set(taxonomy.failure_mode_ids())
    declared = set(record.flags)
    for missing in sorted(mode_ids - declared):
        raise ValidationError(f"flags is missing failure mode {missing!r}",
                              field=f"flags[{missing}]")
    for extra in sorted(declared - mode_ids):
        raise ValidationError(f"flags references unknown failure mode {extra!r}",
                              field=f"flags[{extra}]")
    for mode_id, value in record.flags.items():
        if not isinstance(value, bool):
            raise ValidationError(
                f"flag for {mode_id!r} must be boolean, got {value!r}",
                field=f"flags[{mode_id}]")
    flagged_with_instance = set()
    for i, instance in enumerate(record.instances):
        if instance.failure_mode_id not in mode_ids:
            raise ValidationError(
                f"instance references unknown failure mode {instance.failure_mode_id!r}",
                field=f"instances[{i}].failure_mode_id")
        if not record.flags[instance.failure_mode_id]:
            raise ValidationError(
                f"instance without flag: {instance.failure_mode_id!r} is not flagged",
                field=f"instances[{i}].failure_mode_id")
        for dimension in (scales.SEVERITY, scales.DETECTABILITY):
            try:
                scales.validate_score(dimension, getattr(instance, dimension))
            except Exception as exc:
                raise ValidationError(str(exc),
                                      field=f"instances[{i}].{dimension}") from None
        flagged_with_instance.add(instance.failure_mode_id)
    for mode_id, value in record.flags.items():
        if value and mode_id not in flagged_with_instance:
            raise ValidationError(
                f"flagged mode {mode_id!r} has no instance",
                field=f"flags[{mode_id}]")


def _aggregate_scores(values: list[int], aggregation: str) -> int:
    if aggregation == "max":
        return max(values)
    if aggregation == "median":
        # keep the cell ordinal: median of an even count rounds half up
        return int(math.floor(statistics.median(values) + 0.5))
    raise ValidationError(f"unknown aggregation {aggregation!r}", field="aggregation")


class Campaign:
    """Mutable campaign state with compare-and-swap record writes.

    All mutation goes through a re-entrant lock so the engine can sit
    behind a concurrent service; matrix derivations only touch closed
    (immutable) rounds.
    """

    def __init__(self, campaign_id: str, created_at: str | None = None):
        if not campaign_id:
            raise ValidationError("campaign id must be non-empty", field="id")
        self.id = campaign_id
        self.created_at = created_at or datetime.now(timezone.utc).isoformat()
        self._lock = threading.RLock()
        self._summaries: dict[str, SummaryDocument] = {}
        self._reviewers: dict[str, Reviewer] = {}
        self._rounds: dict[str, Round] = {}
        self._records: dict[tuple[str, str, str], AnnotationRecord] = {}
        self._taxonomies: dict[int, Taxonomy] = {}
        self._sus_responses: list[sus.SusResponse] = []

    # -- registry -----------------------------------------------------------

    def taxonomy(self, version: int) -> Taxonomy:
        with self._lock:
            if version not in self._taxonomies:
                self._taxonomies[version] = default_taxonomy(version)
            return self._taxonomies[version]

    def register_taxonomy(self, taxonomy: Taxonomy) -> None:
        """Pin a taxonomy version to an explicit document (bundle loading)."""
        with self._lock:
            self._taxonomies[taxonomy.version] = taxonomy

    def add_sus_response(self, response: sus.SusResponse) -> sus.SusResult:
        """Validate, score, and retain one usability questionnaire response."""
        result = sus.sus_score(response)
        with self._lock:
            self._sus_responses.append(response)
        return result

    def sus_responses(self) -> tuple[sus.SusResponse, ...]:
        with self._lock:
            return tuple(self._sus_responses)

    def add_summary(self, doc: SummaryDocument) -> SummaryDocument:
        if not doc.id:
            raise ValidationError("summary id must be non-empty", field="id")
        if not doc.source_text or not doc.generated_summary:
            raise ValidationError(
                f"summary {doc.id!r} must carry non-empty source and summary texts",
                field="source_text" if not doc.source_text else "generated_summary")
        with self._lock:
            if doc.id in self._summaries:
                raise ValidationError(f"duplicate summary id {doc.id!r}", field="id")
            self._summaries[doc.id] = doc
            return doc

    def add_reviewer(self, reviewer: Reviewer) -> Reviewer:
        if not reviewer.id:
            raise ValidationError("reviewer id must be non-empty", field="id")
        with self._lock:
            if reviewer.id in self._reviewers:
                raise ValidationError(f"duplicate reviewer id {reviewer.id!r}",
                                      field="id")
            self._reviewers[reviewer.id] = reviewer
            return reviewer

    def summary(self, summary_id: str) -> SummaryDocument:
        try:
            return self._summaries[summary_id]
        except KeyError:
            raise NotFoundError(f"unknown summary {summary_id!r}",
                                id=summary_id) from None

    def reviewer(self, reviewer_id: str) -> Reviewer:
        try:
            return self._reviewers[reviewer_id]
        except KeyError:
            raise NotFoundError(f"unknown reviewer {reviewer_id!r}",
                                id=reviewer_id) from None

    def round(self, round_id: str) -> Round:
        try:
            return self._rounds[round_id]
        except KeyError:
            raise NotFoundError(f"unknown round {round_id!r}", id=round_id) from None

    def summary_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._summaries))

    def reviewer_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._reviewers))

    def round_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._rounds))

    # -- rounds -------------------------------------------------------------

    def open_round(self, round_id: str, taxonomy_version: int,
                   reviewer_ids=None, summary_ids=None) -> Round:
        with self._lock:
            if round_id in self._rounds:
                raise ValidationError(f"duplicate round id {round_id!r}", field="id")
            self.taxonomy(taxonomy_version)
            reviewers = tuple(reviewer_ids) if reviewer_ids is not None \
                else self.reviewer_ids()
            summaries = tuple(summary_ids) if summary_ids is not None \
                else self.summary_ids()
            for rid in reviewers:
                if rid not in self._reviewers:
                    raise ReferentialError(f"round references unknown reviewer {rid!r}",
                                           id=rid)
            for sid in summaries:
                if sid not in self._summaries:
                    raise ReferentialError(f"round references unknown summary {sid!r}",
                                           id=sid)
            if len(set(reviewers)) < 2:
                raise ValidationError(
                    "a round needs at least 2 reviewers (pairwise statistics)",
                    field="reviewer_ids")
            if not summaries:
                raise ValidationError("a round needs at least 1 summary",
                                      field="summary_ids")
            rnd = Round(round_id, taxonomy_version, frozenset(reviewers),
                        frozenset(summaries))
            self._rounds[round_id] = rnd
            return rnd

    def completeness(self, round_id: str) -> CompletenessReport:
        with self._lock:
            rnd = self.round(round_id)
            reviewers = sorted(rnd.reviewer_ids)
            summaries = sorted(rnd.summary_ids)
            missing = []
            per_reviewer = {}
            for rid in reviewers:
                done = 0
                for sid in summaries:
                    rec = self._records.get((round_id, rid, sid))
                    if rec is not None and rec.submitted:
                        done += 1
                    else:
                        missing.append((rid, sid))
                per_reviewer[rid] = done / len(summaries)
            expected = len(reviewers) * len(summaries)
            return CompletenessReport(round_id, tuple(missing), per_reviewer,
                                      expected, expected - len(missing))

    def close_round(self, round_id: str, force: bool = False) -> Round:
        with self._lock:
            rnd = self.round(round_id)
            if not rnd.is_open:
                raise WorkflowError(f"round {round_id!r} is already closed",
                                    round=round_id)
            report = self.completeness(round_id)
            if report.missing and not force:
                raise CompletenessError(
                    f"round {round_id!r} is missing {len(report.missing)} "
                    "submitted record(s); close with force to proceed",
                    missing=[list(pair) for pair in report.missing])
            closed = replace(rnd, status=CLOSED)
            self._rounds[round_id] = closed
            return closed

    # -- records ------------------------------------------------------------

    def record_annotation(self, record: AnnotationRecord,
                          expected_version: int) -> AnnotationRecord:
        """Compare-and-swap write; returns the stored record (version set)."""
        with self._lock:
            rnd = self.round(record.round_id)
            if not rnd.is_open:
                raise WorkflowError(f"round {record.round_id!r} is closed",
                                    round=record.round_id)
            if record.reviewer_id not in rnd.reviewer_ids:
                raise ReferentialError(
                    f"reviewer {record.reviewer_id!r} is not assigned to round "
                    f"{record.round_id!r}", id=record.reviewer_id)
            if record.summary_id not in rnd.summary_ids:
                raise ReferentialError(
                    f"summary {record.summary_id!r} is not part of round "
                    f"{record.round_id!r}", id=record.summary_id)
            validate_record(record, self.taxonomy(rnd.taxonomy_version))
            key = (record.round_id, record.reviewer_id, record.summary_id)
            current = self._records.get(key)
            actual = current.record_version if current is not None else 0
            if expected_version != actual:
                raise ConflictError(
                    f"expected version {expected_version} but stored version is "
                    f"{actual}", expected=expected_version, actual=actual)
            stored = replace(record, record_version=actual + 1,
                             flags=dict(record.flags),
                             instances=tuple(record.instances))
            self._records[key] = stored
            return stored

    def peek_record(self, round_id: str, reviewer_id: str,
                    summary_id: str) -> AnnotationRecord | None:
        return self._records.get((round_id, reviewer_id, summary_id))

    def get_record(self, round_id: str, reviewer_id: str,
                   summary_id: str) -> AnnotationRecord:
        rec = self.peek_record(round_id, reviewer_id, summary_id)
        if rec is None:
            raise NotFoundError(
                f"no record for reviewer {reviewer_id!r} on summary "
                f"{summary_id!r} in round {round_id!r}")
        return rec

    def restore_record(self, round_id: str, reviewer_id: str, summary_id: str,
                       record: AnnotationRecord | None) -> None:
        """Reinstate a prior record state (crash-recovery plumbing only)."""
        with self._lock:
            key = (round_id, reviewer_id, summary_id)
            if record is None:
                self._records.pop(key, None)
            else:
                self._records[key] = record

    def records_of_round(self, round_id: str) -> dict[tuple[str, str], AnnotationRecord]:
        with self._lock:
            self.round(round_id)
            return {(rid, sid): rec
                    for (rnd, rid, sid), rec in sorted(self._records.items())
                    if rnd == round_id}

    def iter_records(self):
        """All records in deterministic (round, reviewer, summary) order."""
        with self._lock:
            return [self._records[k] for k in sorted(self._records)]

    # -- matrices -----------------------------------------------------------

    def _closed_round(self, round_id: str) -> Round:
        rnd = self.round(round_id)
        if rnd.is_open:
            raise WorkflowError(
                f"round {round_id!r} is open; matrices derive from closed rounds",
                round=round_id)
        return rnd

    def _submitted(self, round_id, reviewer_id, summary_id) -> AnnotationRecord | None:
        rec = self._records.get((round_id, reviewer_id, summary_id))
        return rec if rec is not None and rec.submitted else None

    def stage1_matrix(self, round_id: str) -> AnnotationMatrix:
        """Binary subcategory cells: OR over the member failure-mode flags."""
        with self._lock:
            rnd = self._closed_round(round_id)
            tax = self.taxonomy(rnd.taxonomy_version)
            raters = tuple(sorted(rnd.reviewer_ids))
            members = {sub_id: tuple(m.id for m in tax.modes_of_subcategory(sub_id))
                       for sub_id in tax.subcategory_ids()}
            unit_axis = []
            cells = []
            for sid in sorted(rnd.summary_ids):
                for sub_id in tax.subcategory_ids():
                    unit_axis.append((sid, sub_id))
                    row = []
                    for rid in raters:
                        rec = self._submitted(round_id, rid, sid)
                        row.append(None if rec is None else
                                   any(rec.flags[m] for m in members[sub_id]))
                    cells.append(tuple(row))
            return AnnotationMatrix(STAGE_SUBCATEGORY, tuple(unit_axis), raters,
                                    tuple(cells))

    def stage2_matrix(self, round_id: str) -> AnnotationMatrix:
        """Binary failure-mode cells: each reviewer's flag verbatim."""
        with self._lock:
            rnd = self._closed_round(round_id)
            tax = self.taxonomy(rnd.taxonomy_version)
            raters = tuple(sorted(rnd.reviewer_ids))
            unit_axis = []
            cells = []
            for sid in sorted(rnd.summary_ids):
                for mode_id in tax.failure_mode_ids():
                    unit_axis.append((sid, mode_id))
                    row = []
                    for rid in raters:
                        rec = self._submitted(round_id, rid, sid)
                        row.append(None if rec is None else rec.flags[mode_id])
                    cells.append(tuple(row))
            return AnnotationMatrix(STAGE_FAILURE_MODE, tuple(unit_axis), raters,
                                    tuple(cells))

    def stage3_matrix(self, round_id: str, dimension: str,
                      cell_policy: CellPolicy = CellPolicy()) -> AnnotationMatrix:
        """Ordinal score cells for flagged (summary, failure mode) units.

        A unit enters the matrix when at least ``cell_policy.min_raters``
        reviewers flagged it (default: all). Each entering reviewer's cell
        aggregates their instance scores; reviewers who did not flag the
        unit contribute a missing cell.
        """
        if dimension not in (scales.SEVERITY, scales.DETECTABILITY):
            raise ValidationError(f"unknown score dimension {dimension!r}",
                                  field="dimension")
        with self._lock:
            rnd = self._closed_round(round_id)
            tax = self.taxonomy(rnd.taxonomy_version)
            raters = tuple(sorted(rnd.reviewer_ids))
            threshold = cell_policy.min_raters
            if threshold is None:
                threshold = len(raters)
            if not 1 <= threshold <= len(raters):
                raise ValidationError(
                    f"min_raters must lie in 1..{len(raters)}, got {threshold}",
                    field="min_raters")
            unit_axis = []
            cells = []
            for sid in sorted(rnd.summary_ids):
                for mode_id in tax.failure_mode_ids():
                    row = []
                    for rid in raters:
                        rec = self._submitted(round_id, rid, sid)
                        if rec is None or not rec.flags[mode_id]:
                            row.append(None)
                            continue
                        values = [getattr(inst, dimension) for inst in rec.instances
                                  if inst.failure_mode_id == mode_id]
                        row.append(_aggregate_scores(values, cell_policy.aggregation))
                    if sum(1 for v in row if v is not None) >= threshold:
                        unit_axis.append((sid, mode_id))
                        cells.append(tuple(row))
            return AnnotationMatrix(STAGE_SCORES, tuple(unit_axis), raters,
                                    tuple(cells), dimension=dimension)
