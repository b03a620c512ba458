"""Operator command line: bundle management, reports, scoring, serving.

Commands exit 0 on success; failures print a single machine-readable JSON
error object ({"error": <class>, "message": ...}) on stderr and exit 1.
"""
from __future__ import annotations

import json
import secrets
import sys
from pathlib import Path

import click

from . import agreement, persistence, risk, scales, sus, taxonomy
from .campaign import CellPolicy, Reviewer, SummaryDocument
from .errors import FmecalabError, ParseError, ValidationError


@click.group()
def cli():
    """Annotation campaigns, agreement statistics, and risk registers."""


# -- bundle management --------------------------------------------------------

@cli.command()
@click.argument("bundle", type=click.Path())
@click.option("--campaign-id", required=True, help="Identifier for the campaign.")
@click.option("--operator-token", default=None,
              help="Operator bearer token (generated when omitted).")
def init(bundle, campaign_id, operator_token):
    """Create an empty campaign bundle at BUNDLE."""
    token = operator_token or secrets.token_hex(16)
    with persistence.CampaignStore.create(bundle, campaign_id) as store:
        store.issue_token(token, "operator", operator=True)
    click.echo(f"created campaign {campaign_id!r} at {bundle}")
    click.echo(f"operator token: {token}")


@cli.command("import-summaries")
@click.argument("bundle", type=click.Path(exists=True))
@click.argument("source", type=click.File("r"))
def import_summaries(bundle, source):
    """Import summaries from a JSON-lines SOURCE (one object per line).

    Each line: {"id": ..., "source_text": ..., "generated_summary": ...,
    "metadata": {...}}. Duplicate ids abort the command.
    """
    with persistence.CampaignStore.open_bundle(bundle) as store:
        count = 0
        for line_no, line in enumerate(source, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"line {line_no}: not valid JSON: {exc}",
                                 line=line_no) from None
            unknown = sorted(set(doc) - {"id", "source_text",
                                         "generated_summary", "metadata"})
            if unknown:
                raise ParseError(f"line {line_no}: unknown field(s) {unknown}",
                                 line=line_no)
            store.add_summary(SummaryDocument(
                id=doc.get("id", ""),
                source_text=doc.get("source_text", ""),
                generated_summary=doc.get("generated_summary", ""),
                metadata=doc.get("metadata", {})))
            count += 1
    click.echo(f"imported {count} summaries")


@cli.command("add-reviewer")
@click.argument("bundle", type=click.Path(exists=True))
@click.option("--id", "reviewer_id", required=True)
@click.option("--name", "display_name", default="")
@click.option("--role", default="")
@click.option("--token", default=None,
              help="Reviewer bearer token (generated when omitted).")
def add_reviewer(bundle, reviewer_id, display_name, role, token):
    """Register a reviewer and issue their access token."""
    secret = token or secrets.token_hex(16)
    with persistence.CampaignStore.open_bundle(bundle) as store:
        store.add_reviewer(Reviewer(reviewer_id, display_name, role))
        store.issue_token(secret, reviewer_id, operator=False)
    click.echo(f"added reviewer {reviewer_id!r}")
    click.echo(f"token for {reviewer_id!r}: {secret}")


@cli.command("open-round")
@click.argument("bundle", type=click.Path(exists=True))
@click.option("--round", "round_id", required=True)
@click.option("--taxonomy-version", type=int, default=3, show_default=True)
@click.option("--reviewers", default=None,
              help="Comma-separated reviewer ids (default: all).")
@click.option("--summaries", default=None,
              help="Comma-separated summary ids (default: all).")
def open_round(bundle, round_id, taxonomy_version, reviewers, summaries):
    """Open an annotation round."""
    with persistence.CampaignStore.open_bundle(bundle) as store:
        rnd = store.open_round(
            round_id, taxonomy_version,
            reviewers.split(",") if reviewers else None,
            summaries.split(",") if summaries else None)
    click.echo(f"opened round {rnd.id!r} (taxonomy v{rnd.taxonomy_version}, "
               f"{len(rnd.reviewer_ids)} reviewers, "
               f"{len(rnd.summary_ids)} summaries)")


@cli.command("close-round")
@click.argument("bundle", type=click.Path(exists=True))
@click.option("--round", "round_id", required=True)
@click.option("--force", is_flag=True,
              help="Close even with missing submissions.")
def close_round(bundle, round_id, force):
    """Close a round; refuses while submissions are missing unless --force."""
    with persistence.CampaignStore.open_bundle(bundle) as store:
        store.close_round(round_id, force=force)
    click.echo(f"closed round {round_id!r}")


# -- taxonomy and scales -------------------------------------------------------

@cli.group("taxonomy")
def taxonomy_group():
    """Inspect and validate failure-mode taxonomies."""


def _load_taxonomy_arg(version, file):
    if file is not None:
        return taxonomy.load_taxonomy(file)
    return taxonomy.default_taxonomy(version)


@taxonomy_group.command("validate")
@click.option("--version", type=int, default=3, show_default=True)
@click.option("--file", type=click.Path(exists=True), default=None,
              help="Validate a taxonomy JSON file instead of a shipped version.")
def taxonomy_validate(version, file):
    """Check structural integrity; violations exit nonzero."""
    tax = _load_taxonomy_arg(version, file)
    violations = taxonomy.validate_taxonomy(tax)
    if not violations:
        click.echo(f"taxonomy v{tax.version}: OK "
                   f"({len(tax.failure_modes)} failure modes, "
                   f"{len(tax.categories)} categories)")
        return
    for v in violations:
        click.echo(json.dumps({"error": v.code, "node": v.node_id,
                               "message": v.message}), err=True)
    sys.exit(1)


@taxonomy_group.command("show")
@click.option("--version", type=int, default=3, show_default=True)
@click.option("--file", type=click.Path(exists=True), default=None)
def taxonomy_show(version, file):
    """Print the category / subcategory / failure-mode tree."""
    tax = _load_taxonomy_arg(version, file)
    click.echo(f"Taxonomy v{tax.version}: {len(tax.failure_modes)} failure "
               f"modes, {len(tax.categories)} categories")
    for category in tax.categories:
        click.echo(f"{category.label}")
        for sub in tax.subcategories_of_category(category.id):
            click.echo(f"  {sub.label}")
            for mode in tax.modes_of_subcategory(sub.id):
                click.echo(f"    - {mode.label} [{mode.id}]")


@cli.group("scales")
def scales_group():
    """Scoring scale anchors."""


@scales_group.command("show")
def scales_show():
    """Print the severity / detectability / occurrence anchor tables."""
    click.echo(scales.render_anchor_table())


# -- reports -------------------------------------------------------------------

def _emit(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


@cli.group("report")
def report_group():
    """Agreement and risk reports over closed rounds."""


@report_group.command("agreement")
@click.argument("bundle", type=click.Path(exists=True))
@click.option("--round", "round_id", required=True)
@click.option("--stage", type=click.Choice(["1", "2", "3"]), default=None,
              help="Limit CSV output to one stage (required for --format csv).")
@click.option("--format", "fmt", type=click.Choice(["text", "csv"]),
              default="text", show_default=True)
@click.option("--min-raters", type=int, default=None,
              help="Stage-3 inclusion threshold (default: all raters).")
@click.option("--aggregation", type=click.Choice(["max", "median"]),
              default="max", show_default=True,
              help="Stage-3 instance aggregation per reviewer.")
@click.option("--out", type=click.Path(), default=None)
def report_agreement(bundle, round_id, stage, fmt, min_raters, aggregation, out):
    """Three-stage inter-rater agreement report."""
    campaign = persistence.load_campaign(bundle)
    policy = CellPolicy(min_raters=min_raters, aggregation=aggregation)
    report = agreement.agreement_report(campaign, round_id, policy)
    if fmt == "text":
        _emit(agreement.render_report_text(report), out)
        return
    if stage is None:
        raise ValidationError("--format csv needs --stage 1, 2, or 3",
                              field="stage")
    tables = agreement.report_tables(report)
    _emit(tables[f"agreement_stage{stage}.csv"], out)


@report_group.command("risk")
@click.argument("bundle", type=click.Path(exists=True))
@click.option("--round", "round_id", required=True)
@click.option("--aggregation", type=click.Choice(["median", "max"]),
              default="median", show_default=True)
@click.option("--consensus", type=int, default=None,
              help="Reviewers that must flag a mode (default: strict majority).")
@click.option("--format", "fmt", type=click.Choice(["table", "grid"]),
              default="table", show_default=True)
@click.option("--out", type=click.Path(), default=None)
def report_risk(bundle, round_id, aggregation, consensus, fmt, out):
    """Ranked risk register or the occurrence x severity grid."""
    campaign = persistence.load_campaign(bundle)
    register = risk.risk_register(campaign, round_id, aggregation=aggregation,
                                  consensus=consensus)
    text = risk.register_table(register) if fmt == "table" \
        else risk.risk_grid(register)
    _emit(text, out)


# -- SUS -----------------------------------------------------------------------

@cli.group("sus")
def sus_group():
    """System Usability Scale scoring."""


@sus_group.command("score")
@click.argument("source", type=click.File("r"))
@click.option("--sample-sd", is_flag=True,
              help="Use the n-1 denominator for the standard deviation.")
def sus_score_cmd(source, sample_sd):
    """Score responses from delimiter-separated rows: id,i1,...,i10."""
    import csv as _csv

    results = []
    for line_no, row in enumerate(_csv.reader(source), start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 11:
            raise ParseError(
                f"line {line_no}: expected 11 fields (id + 10 items), "
                f"got {len(row)}", line=line_no)
        try:
            items = tuple(int(v) for v in row[1:])
        except ValueError:
            raise ParseError(f"line {line_no}: items must be integers",
                             line=line_no) from None
        results.append(sus.sus_score(sus.SusResponse(row[0].strip(), items)))
    if not results:
        raise ValidationError("no responses found in input", field="source")
    for r in results:
        click.echo(f"{r.evaluator_id}: {r.score:.1f} "
                   f"(grade {r.grade}, {r.label})")
    aggregate = sus.sus_aggregate(results, sample_sd=sample_sd)
    sd_kind = "sample" if sample_sd else "population"
    click.echo(f"mean: {aggregate.mean:.1f} ({aggregate.grade}, "
               f"{aggregate.label}); {sd_kind} SD {aggregate.sd:.1f}; "
               f"n={aggregate.n}")
    counts = ", ".join(f"{g}={n}" for g, n in sorted(aggregate.grade_counts.items()))
    click.echo(f"grades: {counts}")


# -- matrices ------------------------------------------------------------------

@cli.group("export")
def export_group():
    """Data exports."""


@export_group.command("matrix")
@click.argument("bundle", type=click.Path(exists=True))
@click.option("--round", "round_id", required=True)
@click.option("--stage", type=click.Choice(["1", "2", "3"]), required=True)
@click.option("--dimension", type=click.Choice(["severity", "detectability"]),
              default="severity", show_default=True,
              help="Score dimension for stage 3.")
@click.option("--min-raters", type=int, default=None)
@click.option("--aggregation", type=click.Choice(["max", "median"]),
              default="max", show_default=True)
@click.option("--out", type=click.Path(), required=True)
def export_matrix_cmd(bundle, round_id, stage, dimension, min_raters,
                      aggregation, out):
    """Write one annotation matrix as delimiter-separated text."""
    campaign = persistence.load_campaign(bundle)
    stage = int(stage)
    if stage == 1:
        matrix = campaign.stage1_matrix(round_id)
    elif stage == 2:
        matrix = campaign.stage2_matrix(round_id)
    else:
        matrix = campaign.stage3_matrix(
            round_id, dimension,
            CellPolicy(min_raters=min_raters, aggregation=aggregation))
    persistence.export_matrix(matrix, out)
    click.echo(f"wrote {out} ({matrix.n_units} units x "
               f"{len(matrix.rater_axis)} raters)")


# -- service -------------------------------------------------------------------

@cli.command()
@click.argument("bundle", type=click.Path(exists=True))
@click.option("--bind", default="127.0.0.1:8420", show_default=True,
              help="host:port to listen on.")
def serve(bundle, bind):
    """Serve the campaign API for the annotation interface."""
    from .service import serve as run_service

    run_service(bundle, bind)


def main():
    try:
        cli(standalone_mode=True)
    except FmecalabError as exc:
        click.echo(json.dumps(exc.to_dict()), err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
