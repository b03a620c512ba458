#!/usr/bin/env python3
"""End-to-end demo: synthetic campaign -> agreement report -> risk register.

Builds a bundle with N summaries and R reviewers, fills one annotation round
with seeded random flags and scores, closes it, and prints every report the
package produces. Run from the repository root:

    python3 scripts/demo_campaign.py --bundle /tmp/demo-bundle
"""
from __future__ import annotations

import argparse
import random
import shutil
import sys
import tempfile
from pathlib import Path

from fmecalab import (
    AnnotationRecord,
    CampaignStore,
    CellPolicy,
    FailureInstance,
    Reviewer,
    SummaryDocument,
    SusResponse,
    agreement_report,
    register_table,
    render_report_text,
    risk_grid,
    risk_register,
    sus_aggregate,
    sus_score,
)

ROUND_ID = "round-1"


def parse_args(argv):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--summaries", type=int, default=36)
    parser.add_argument("--reviewers", type=int, default=3)
    parser.add_argument("--flag-rate", type=float, default=0.3,
                        help="Chance a reviewer flags any given failure mode.")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--bundle", type=Path, default=None,
                        help="Bundle directory (default: fresh temp dir).")
    return parser.parse_args(argv)


def seed_campaign(store: CampaignStore, args) -> None:
    for i in range(args.summaries):
        store.add_summary(SummaryDocument(
            id=f"s{i:03d}",
            source_text=f"synthetic source document {i}\n",
            generated_summary=f"synthetic generated summary {i}\n",
            metadata={"patient": i % 4}))
    for j in range(args.reviewers):
        store.add_reviewer(Reviewer(f"rev{j}", f"Reviewer {j}", "clinician"))
    store.issue_token("demo-operator-token", "operator", operator=True)


def random_record(rng, round_id, reviewer_id, summary_id, taxonomy,
                  flag_rate) -> AnnotationRecord:
    mode_ids = taxonomy.failure_mode_ids()
    flagged = [m for m in mode_ids if rng.random() < flag_rate]
    instances = [
        FailureInstance(failure_mode_id=m, comment="synthetic finding",
                        severity=rng.randint(1, 5),
                        detectability=rng.randint(1, 5))
        for m in flagged
    ]
    return AnnotationRecord(
        round_id=round_id, reviewer_id=reviewer_id, summary_id=summary_id,
        flags={m: m in flagged for m in mode_ids},
        instances=instances, record_version=0, submitted=True)


def fill_round(store: CampaignStore, args) -> None:
    rng = random.Random(args.seed)
    taxonomy = store.campaign.taxonomy(3)
    rnd = store.campaign.round(ROUND_ID)
    for reviewer_id in sorted(rnd.reviewer_ids):
        for summary_id in sorted(rnd.summary_ids):
            store.record_annotation(
                random_record(rng, ROUND_ID, reviewer_id, summary_id,
                              taxonomy, args.flag_rate),
                expected_version=0)


def main(argv=None) -> int:
    args = parse_args(argv)
    workdir = None
    if args.bundle is None:
        workdir = tempfile.mkdtemp(prefix="fmecalab-demo-")
        bundle = Path(workdir) / "bundle"
    else:
        bundle = args.bundle

    print(f"bundle: {bundle}")
    with CampaignStore.create(bundle, "demo-campaign") as store:
        seed_campaign(store, args)
        store.open_round(ROUND_ID, taxonomy_version=3)
        fill_round(store, args)
        report = store.campaign.completeness(ROUND_ID)
        print(f"round {ROUND_ID}: {report.submitted}/{report.expected} "
              f"submissions, complete={report.complete}")
        store.close_round(ROUND_ID)

        print()
        print(render_report_text(agreement_report(
            store.campaign, ROUND_ID,
            CellPolicy(min_raters=2, aggregation="median"))))

        register = risk_register(store.campaign, ROUND_ID)
        print(register_table(register))
        print()
        print(risk_grid(register))

        print()
        rng = random.Random(args.seed + 1)
        responses = [SusResponse(f"rev{j}", tuple(
            rng.randint(1, 5) for _ in range(10)))
            for j in range(args.reviewers)]
        results = [sus_score(r) for r in responses]
        for r in results:
            print(f"usability {r.evaluator_id}: {r.score:.1f} "
                  f"({r.grade}, {r.label})")
        agg = sus_aggregate(results)
        print(f"usability mean {agg.mean:.1f} ({agg.grade}, {agg.label})")

    if workdir is not None:
        shutil.rmtree(workdir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
