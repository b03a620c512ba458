"""Campaign tooling for failure-mode annotation of clinical text summaries.

Subpackages cover the failure-mode taxonomy and its version migrations,
the 1-5 scoring scales, annotation campaign workflow, inter-rater
agreement statistics, FMECA-style risk registers, usability-scale scoring,
durable file bundles, and the HTTP service behind the annotation UI.
"""
from .agreement import (AgreementEstimate, AgreementReport, agreement_report,
                        cohen_kappa, describe, fleiss_kappa, format_number,
                        gwet_ac1, icc_2_1, krippendorff_alpha, pearson_r,
                        render_report_text, report_tables, spearman_rho,
                        tolerance_agreement, tolerance_agreement_multi,
                        unanimity_rate)
from .campaign import (AnnotationMatrix, AnnotationRecord, Campaign,
                       CellPolicy, CompletenessReport, FailureInstance,
                       Reviewer, Round, SummaryDocument, validate_record)
from .errors import (CompletenessError, ConflictError, DomainError,
                     FmecalabError, FormatVersionError, IntegrityError,
                     LockError, MappingError, NotFoundError, ParseError,
                     ReferentialError, SchemaError, ValidationError,
                     WorkflowError)
from .persistence import (CampaignStore, export_matrix, import_ratings,
                          load_campaign, save_campaign)
from .risk import (NOT_ASSESSABLE, RPN_CAVEAT, RiskEntry, RiskRegister,
                   default_consensus, occurrence_ratio, register_table,
                   risk_grid, risk_register, rpn)
from .scales import (ANCHORS, DIMENSIONS, DETECTABILITY, OCCURRENCE,
                     SCORE_MAX, SCORE_MIN, SEVERITY, ScaleAnchor,
                     occurrence_score, render_anchor_table, scale_anchor,
                     validate_score)
from .sus import (DEFAULT_GRADE_BANDS, GradeBand, SusAggregate, SusResponse,
                  SusResult, sus_aggregate, sus_grade, sus_score)
from .taxonomy import (Category, FailureMode, MergeMap, Subcategory, Taxonomy,
                       Violation, compose_merge_maps, default_merge_map,
                       default_taxonomy, identity_merge_map, load_merge_map,
                       load_taxonomy, migrate_flags, subcategory_of,
                       validate_taxonomy)

__version__ = "0.1.0"

__all__ = [
    "ANCHORS", "DEFAULT_GRADE_BANDS", "DETECTABILITY", "DIMENSIONS",
    "NOT_ASSESSABLE", "OCCURRENCE", "RPN_CAVEAT", "SCORE_MAX", "SCORE_MIN",
    "SEVERITY",
    "AgreementEstimate", "AgreementReport", "AnnotationMatrix",
    "AnnotationRecord", "Campaign", "CampaignStore", "Category", "CellPolicy",
    "CompletenessError", "CompletenessReport", "ConflictError", "DomainError",
    "FailureInstance", "FailureMode", "FmecalabError", "FormatVersionError",
    "GradeBand", "IntegrityError", "LockError", "MappingError", "MergeMap",
    "NotFoundError", "ParseError", "ReferentialError", "Reviewer",
    "RiskEntry", "RiskRegister", "Round", "ScaleAnchor", "SchemaError",
    "Subcategory", "SummaryDocument", "SusAggregate", "SusResponse",
    "SusResult", "Taxonomy", "ValidationError", "Violation", "WorkflowError",
    "agreement_report", "cohen_kappa", "compose_merge_maps",
    "default_consensus", "default_merge_map", "default_taxonomy", "describe",
    "export_matrix", "fleiss_kappa", "format_number", "gwet_ac1", "icc_2_1",
    "identity_merge_map", "import_ratings", "krippendorff_alpha",
    "load_campaign", "load_merge_map", "load_taxonomy", "migrate_flags",
    "occurrence_ratio", "occurrence_score", "pearson_r", "register_table",
    "render_anchor_table", "render_report_text", "report_tables",
    "risk_grid", "risk_register", "rpn", "save_campaign", "scale_anchor",
    "spearman_rho", "subcategory_of", "sus_aggregate", "sus_grade",
    "sus_score", "tolerance_agreement", "tolerance_agreement_multi",
    "unanimity_rate", "validate_record", "validate_score",
    "validate_taxonomy",
]
