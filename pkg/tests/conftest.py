"""Shared fixtures: small deterministic campaigns used across the suite."""
from __future__ import annotations

import random

import pytest

from fmecalab import (
    AnnotationRecord,
    Campaign,
    CampaignStore,
    FailureInstance,
    Reviewer,
    SummaryDocument,
)
from fmecalab.sus import SusResponse


def make_record(round_id, reviewer_id, summary_id, taxonomy, flagged=None,
                submitted=True):
    """Build a record with the full flag map and one instance per flag.

    ``flagged`` maps failure mode id to an (severity, detectability) pair.
    """
    flagged = flagged or {}
    flags = {mode_id: mode_id in flagged
             for mode_id in taxonomy.failure_mode_ids()}
    instances = [
        FailureInstance(failure_mode_id=mode_id, comment=f"seen {mode_id}",
                        severity=sev, detectability=det)
        for mode_id, (sev, det) in sorted(flagged.items())
    ]
    return AnnotationRecord(
        round_id=round_id,
        reviewer_id=reviewer_id,
        summary_id=summary_id,
        flags=flags,
        instances=instances,
        record_version=0,
        submitted=submitted,
    )


def build_campaign(n_summaries=3, reviewer_ids=("ann", "ben")):
    campaign = Campaign("camp-test")
    for i in range(n_summaries):
        campaign.add_summary(SummaryDocument(
            id=f"s{i:03d}",
            source_text=f"note {i}: patient seen for follow up.",
            generated_summary=f"summary {i}: follow up visit.",
            metadata={"index": i},
        ))
    for rid in reviewer_ids:
        campaign.add_reviewer(Reviewer(id=rid, display_name=rid.title(),
                                       role="reviewer"))
    return campaign


def fill_round(campaign, round_id, seed=7, flag_rate=0.4):
    """Submit one pseudo-random record per (reviewer, summary) cell."""
    rng = random.Random(seed)
    rnd = campaign.round(round_id)
    taxonomy = campaign.taxonomy(rnd.taxonomy_version)
    mode_ids = taxonomy.failure_mode_ids()
    for reviewer_id in rnd.reviewer_ids:
        for summary_id in rnd.summary_ids:
            flagged = {
                mode_id: (rng.randint(1, 5), rng.randint(1, 5))
                for mode_id in mode_ids if rng.random() < flag_rate
            }
            record = make_record(round_id, reviewer_id, summary_id,
                                 taxonomy, flagged)
            campaign.record_annotation(record, expected_version=0)
    return campaign


def seeded_store(path):
    """New bundle: 2 reviewers, 2 summaries, closed round r1, open round r2."""
    store = CampaignStore.create(path, "camp-01")
    for i in range(2):
        store.add_summary(SummaryDocument(
            id=f"s{i:03d}",
            source_text=f"long clinical note {i}\nwith lines\n",
            generated_summary=f"short summary {i}\n",
            metadata={"index": i}))
    store.add_reviewer(Reviewer("ann", "Ann", "senior"))
    store.add_reviewer(Reviewer("ben", "Ben", "junior"))
    store.issue_token("tok-op", "operator", True)
    store.issue_token("tok-ann", "ann", False)
    store.issue_token("tok-ben", "ben", False)
    store.open_round("r1", 3)
    taxonomy = store.campaign.taxonomy(3)
    flag_plans = {
        ("ann", "s000"): {"omission": (4, 3)},
        ("ben", "s000"): {"omission": (3, 3), "lexical_redundancy": (1, 1)},
        ("ann", "s001"): {},
        ("ben", "s001"): {"wrong_language": (2, 2)},
    }
    for (rid, sid), flagged in flag_plans.items():
        store.record_annotation(make_record("r1", rid, sid, taxonomy, flagged),
                                expected_version=0)
    store.close_round("r1")
    store.open_round("r2", 3, summary_ids=["s000"])
    store.record_annotation(
        make_record("r2", "ann", "s000", taxonomy, {"omission": (5, 5)}),
        expected_version=0)
    store.add_sus_response(SusResponse("eva", (4, 2, 4, 2, 4, 2, 4, 2, 4, 2)))
    return store


@pytest.fixture
def campaign():
    return build_campaign()


@pytest.fixture
def closed_round_campaign():
    campaign = build_campaign()
    campaign.open_round("r1", taxonomy_version=3)
    fill_round(campaign, "r1")
    campaign.close_round("r1")
    return campaign


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    results = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" in report.nodeid and \
                    getattr(report, "when", "call") == "call":
                name = report.nodeid.split("::")[-1]
                results.append((name, outcome == "passed"))
    if results:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, ok in results:
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}")
