"""HTTP campaign server consumed by the annotation interface.

Bearer tokens map to principals (operator or one reviewer). While a round
is open, reviewer tokens reach only that reviewer's own records and no
reports; once closed, records and reports open up. Every mutation goes
through the durable store, so a response is only sent after the write is
fsynced.
"""
from __future__ import annotations

from dataclasses import dataclass

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from . import scales
from .agreement import AgreementEstimate, agreement_report
from .campaign import AnnotationRecord, FailureInstance
from .errors import FmecalabError, ValidationError
from .persistence import CampaignStore, record_to_doc
from .risk import RPN_CAVEAT, risk_register
from .sus import SusResponse

_HTTP_STATUS = {
    "not_found": 404,
    "conflict": 409,
    "workflow": 409,
    "completeness": 409,
    "validation": 422,
    "domain": 422,
    "schema": 422,
    "parse": 422,
    "referential": 422,
    "mapping": 422,
    "format_version": 422,
    "integrity": 500,
    "locked": 423,
}

READ_ACTIONS = frozenset({"read_taxonomy", "read_scales", "read_rounds",
                          "read_assignments", "read_summary"})


@dataclass(frozen=True)
class Decision:
    allowed: bool
    reason: str | None = None


ALLOW = Decision(True)


def deny(reason: str) -> Decision:
    return Decision(False, reason)


def authorize(store: CampaignStore, token: str | None, action: str,
              resource: dict | None = None) -> Decision:
    """Access policy for one (token, action, resource) request."""
    resource = resource or {}
    session = store.auth.lookup(token) if token else None
    if session is None:
        return deny("unauthenticated")
    if session["operator"]:
        return ALLOW
    principal = session["principal"]
    if action in READ_ACTIONS or action == "submit_sus":
        if action == "read_assignments":
            target = resource.get("reviewer_id", principal)
            if target != principal:
                return deny("assignments are visible to their reviewer only")
        return ALLOW
    if action in ("read_record", "write_record"):
        round_id = resource["round_id"]
        rnd = store.campaign.round(round_id)
        if resource["reviewer_id"] == principal:
            return ALLOW
        if action == "write_record":
            return deny("cannot write another reviewer's record")
        if rnd.is_open:
            return deny("blinded round")
        return ALLOW
    if action == "read_report":
        rnd = store.campaign.round(resource["round_id"])
        if rnd.is_open:
            return deny("round open")
        return ALLOW
    if action == "close_round":
        return deny("operator required")
    return deny(f"unknown action {action!r}")


def _bearer_token(request: Request) -> str | None:
    header = request.headers.get("authorization", "")
    if header.lower().startswith("bearer "):
        return header[7:].strip()
    return None


class _Denied(Exception):
    def __init__(self, decision: Decision):
        self.decision = decision


def _require(store, request, action, resource=None) -> dict:
    token = _bearer_token(request)
    decision = authorize(store, token, action, resource)
    if not decision.allowed:
        raise _Denied(decision)
    session = store.auth.lookup(token)
    return session


def _estimate_doc(estimate: AgreementEstimate) -> dict:
    return {
        "metric": estimate.metric,
        "value": estimate.value,
        "n_units": estimate.n_units,
        "rater_ids": list(estimate.rater_ids),
        "diagnostics": estimate.diagnostics,
        "reason": estimate.reason,
    }


def _binary_panel_doc(panel) -> dict:
    return {
        "stage": panel.stage,
        "n_units": panel.n_units,
        "n_complete_units": panel.n_complete_units,
        "complete_case_only": panel.complete_case_only,
        "pairwise": [{"rater_a": p.rater_a, "rater_b": p.rater_b,
                      "kappa": _estimate_doc(p.kappa),
                      "ac1": _estimate_doc(p.ac1)} for p in panel.pairwise],
        "fleiss": _estimate_doc(panel.fleiss),
        "ac1": _estimate_doc(panel.ac1),
        "alpha": _estimate_doc(panel.alpha),
        "unanimity": _estimate_doc(panel.unanimity),
    }


def _score_panel_doc(panel) -> dict:
    return {
        "dimension": panel.dimension,
        "n_units": panel.n_units,
        "n_complete_units": panel.n_complete_units,
        "inclusion": panel.inclusion,
        "pairwise": [{"rater_a": p.rater_a, "rater_b": p.rater_b,
                      "pearson": _estimate_doc(p.pearson),
                      "spearman": _estimate_doc(p.spearman)}
                     for p in panel.pairwise],
        "icc": _estimate_doc(panel.icc),
        "tolerances": [_estimate_doc(t) for t in panel.tolerances],
        "per_rater": [{"rater_id": r.rater_id, "n": r.n, "mean": r.mean,
                       "sd": r.sd} for r in panel.per_rater],
    }


def _round_doc(rnd) -> dict:
    return {"id": rnd.id, "taxonomy_version": rnd.taxonomy_version,
            "status": rnd.status, "reviewer_ids": sorted(rnd.reviewer_ids),
            "summary_ids": sorted(rnd.summary_ids)}


def _body_keys(body: dict, allowed: set, required: set) -> None:
    if not isinstance(body, dict):
        raise ValidationError("request body must be a JSON object", field="body")
    unknown = sorted(set(body) - allowed)
    if unknown:
        raise ValidationError(f"unknown request field(s) {unknown}",
                              field=unknown[0])
    for key in sorted(required - set(body)):
        raise ValidationError(f"missing request field {key!r}", field=key)


def create_app(store: CampaignStore) -> FastAPI:
    app = FastAPI(title="fmecalab campaign service", docs_url=None,
                  redoc_url=None, openapi_url=None)

    @app.exception_handler(FmecalabError)
    async def _fmecalab_error(request: Request, exc: FmecalabError):
        status = _HTTP_STATUS.get(exc.code, 400)
        return JSONResponse(status_code=status, content=exc.to_dict())

    @app.exception_handler(_Denied)
    async def _denied(request: Request, exc: _Denied):
        reason = exc.decision.reason
        status = 401 if reason == "unauthenticated" else 403
        return JSONResponse(status_code=status,
                            content={"error": "denied", "message": reason})

    @app.get("/api/taxonomy/{version}")
    def get_taxonomy(version: int, request: Request):
        _require(store, request, "read_taxonomy")
        tax = store.campaign.taxonomy(version)
        return {
            "version": tax.version,
            "provenance": tax.provenance,
            "categories": [{"id": c.id, "label": c.label} for c in tax.categories],
            "subcategories": [{"id": s.id, "label": s.label,
                               "category_id": s.category_id}
                              for s in tax.subcategories],
            "failure_modes": [{"id": m.id, "label": m.label,
                               "subcategory_id": m.subcategory_id,
                               "description": m.description,
                               "illustrative_examples":
                                   list(m.illustrative_examples)}
                              for m in tax.failure_modes],
        }

    @app.get("/api/scales")
    def get_scales(request: Request):
        _require(store, request, "read_scales")
        return {
            "dimensions": list(scales.DIMENSIONS),
            "score_min": scales.SCORE_MIN,
            "score_max": scales.SCORE_MAX,
            "anchors": [{"dimension": a.dimension, "score": a.score,
                         "label": a.label, "definition": a.definition}
                        for a in scales.ANCHORS],
        }

    @app.get("/api/rounds")
    def list_rounds(request: Request):
        _require(store, request, "read_rounds")
        return {"rounds": [_round_doc(store.campaign.round(rid))
                           for rid in store.campaign.round_ids()]}

    @app.get("/api/rounds/{round_id}/assignments")
    def get_assignments(round_id: str, request: Request,
                        reviewer: str | None = Query(default=None)):
        session = _require(store, request, "read_assignments",
                           {"round_id": round_id, "reviewer_id": reviewer}
                           if reviewer else {"round_id": round_id})
        campaign = store.campaign
        rnd = campaign.round(round_id)
        reviewer_id = reviewer if reviewer is not None else session["principal"]
        if session["operator"] and reviewer is None:
            raise ValidationError(
                "operator tokens must name ?reviewer= for assignments",
                field="reviewer")
        if reviewer_id not in rnd.reviewer_ids:
            raise ValidationError(
                f"reviewer {reviewer_id!r} is not assigned to round {round_id!r}",
                field="reviewer")
        report = campaign.completeness(round_id)
        work = []
        for sid in sorted(rnd.summary_ids):
            rec = campaign.peek_record(round_id, reviewer_id, sid)
            work.append({
                "summary_id": sid,
                "record_version": rec.record_version if rec else 0,
                "submitted": bool(rec and rec.submitted),
            })
        return {"round_id": round_id, "reviewer_id": reviewer_id,
                "round_status": rnd.status,
                "taxonomy_version": rnd.taxonomy_version,
                "progress": report.progress[reviewer_id],
                "assignments": work}

    @app.get("/api/summaries/{summary_id}")
    def get_summary(summary_id: str, request: Request):
        _require(store, request, "read_summary", {"summary_id": summary_id})
        doc = store.campaign.summary(summary_id)
        return {"id": doc.id, "source_text": doc.source_text,
                "generated_summary": doc.generated_summary,
                "metadata": doc.metadata}

    @app.get("/api/rounds/{round_id}/annotations/{reviewer_id}/{summary_id}")
    def get_annotation(round_id: str, reviewer_id: str, summary_id: str,
                       request: Request):
        _require(store, request, "read_record",
                 {"round_id": round_id, "reviewer_id": reviewer_id})
        record = store.campaign.get_record(round_id, reviewer_id, summary_id)
        return record_to_doc(record)

    @app.put("/api/rounds/{round_id}/annotations/{reviewer_id}/{summary_id}")
    async def put_annotation(round_id: str, reviewer_id: str, summary_id: str,
                             request: Request):
        _require(store, request, "write_record",
                 {"round_id": round_id, "reviewer_id": reviewer_id})
        body = await request.json()
        _body_keys(body, {"expected_version", "flags", "instances", "submitted"},
                   {"expected_version", "flags"})
        expected = body["expected_version"]
        if not isinstance(expected, int) or isinstance(expected, bool) or expected < 0:
            raise ValidationError(
                f"expected_version must be a non-negative integer, got {expected!r}",
                field="expected_version")
        instances = []
        for i, inst in enumerate(body.get("instances", [])):
            _body_keys(inst, {"failure_mode_id", "comment", "severity",
                              "detectability"},
                       {"failure_mode_id", "severity", "detectability"})
            instances.append(FailureInstance(
                failure_mode_id=inst["failure_mode_id"],
                comment=inst.get("comment", ""),
                severity=inst["severity"],
                detectability=inst["detectability"]))
        record = AnnotationRecord(
            round_id=round_id, reviewer_id=reviewer_id, summary_id=summary_id,
            flags=dict(body["flags"]), instances=tuple(instances),
            submitted=bool(body.get("submitted", True)))
        stored = store.record_annotation(record, expected)
        return {"record_version": stored.record_version,
                "submitted": stored.submitted}

    @app.post("/api/rounds/{round_id}/close")
    async def close_round(round_id: str, request: Request):
        _require(store, request, "close_round", {"round_id": round_id})
        raw = await request.body()
        force = False
        if raw:
            body = await request.json()
            _body_keys(body, {"force"}, set())
            force = bool(body.get("force", False))
        rnd = store.close_round(round_id, force=force)
        return _round_doc(rnd)

    @app.get("/api/rounds/{round_id}/reports/agreement")
    def get_agreement(round_id: str, request: Request, stage: int = Query(...)):
        _require(store, request, "read_report", {"round_id": round_id})
        if stage not in (1, 2, 3):
            raise ValidationError(f"stage must be 1, 2, or 3, got {stage}",
                                  field="stage")
        report = agreement_report(store.campaign, round_id)
        if stage == 1:
            return {"round_id": round_id, "stage": 1,
                    "panel": _binary_panel_doc(report.stage1)}
        if stage == 2:
            return {"round_id": round_id, "stage": 2,
                    "panel": _binary_panel_doc(report.stage2)}
        return {"round_id": round_id, "stage": 3,
                "panels": {dim: _score_panel_doc(panel)
                           for dim, panel in sorted(report.stage3.items())}}

    @app.get("/api/rounds/{round_id}/reports/risk")
    def get_risk(round_id: str, request: Request,
                 aggregation: str = Query(default="median"),
                 consensus: int | None = Query(default=None)):
        _require(store, request, "read_report", {"round_id": round_id})
        register = risk_register(store.campaign, round_id,
                                 aggregation=aggregation, consensus=consensus)
        return {
            "round_id": register.round_id,
            "aggregation": register.aggregation,
            "consensus": register.consensus,
            "caveat": RPN_CAVEAT,
            "entries": [{
                "failure_mode_id": e.failure_mode_id,
                "occurrence_ratio": float(e.occurrence_ratio),
                "occurrence_ratio_exact":
                    f"{e.occurrence_ratio.numerator}/"
                    f"{e.occurrence_ratio.denominator}",
                "occurrence": e.occurrence,
                "severity": e.severity,
                "detectability": e.detectability,
                "rpn": e.rpn,
                "support": {
                    "summaries_flagged": e.support.summaries_flagged,
                    "instances": e.support.instances,
                    "reviewers": e.support.reviewers,
                },
            } for e in register.entries],
        }

    @app.post("/api/sus")
    async def post_sus(request: Request):
        _require(store, request, "submit_sus")
        body = await request.json()
        _body_keys(body, {"evaluator_id", "items"}, {"evaluator_id", "items"})
        items = body["items"]
        if not isinstance(items, list):
            raise ValidationError("items must be a list of 10 integers",
                                  field="items")
        result = store.add_sus_response(
            SusResponse(evaluator_id=body["evaluator_id"], items=tuple(items)))
        return {"evaluator_id": result.evaluator_id, "score": result.score,
                "grade": result.grade, "label": result.label}

    return app


def serve(bundle_path: str, bind: str = "127.0.0.1:8420") -> None:
    """Open the bundle as the single writer and serve it until interrupted."""
    import uvicorn

    host, _, port_text = bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise ValidationError(f"bind must look like host:port, got {bind!r}",
                              field="bind")
    store = CampaignStore.open_bundle(bundle_path)
    app = create_app(store)
    try:
        uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    finally:
        store.close()
