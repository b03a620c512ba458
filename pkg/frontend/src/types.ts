/**
 * Shapes of the campaign server's JSON documents.
 *
 * The client never computes statistics or risk numbers; these types mirror
 * the server responses verbatim and the dashboard renders them as served.
 */

export interface Category {
  id: string;
  label: string;
}

export interface Subcategory {
  id: string;
  label: string;
  category_id: string;
}

export interface FailureMode {
  id: string;
  label: string;
  subcategory_id: string;
  description: string;
  illustrative_examples: string[];
}

export interface TaxonomyDoc {
  version: number;
  provenance: string;
  categories: Category[];
  subcategories: Subcategory[];
  failure_modes: FailureMode[];
}

export type ScoreDimension = "severity" | "detectability" | "occurrence";

export interface ScaleAnchor {
  dimension: ScoreDimension;
  score: number;
  label: string;
  definition: string;
}

export interface ScalesDoc {
  dimensions: ScoreDimension[];
  score_min: number;
  score_max: number;
  anchors: ScaleAnchor[];
}

export interface RoundDoc {
  id: string;
  taxonomy_version: number;
  status: "open" | "closed";
  reviewer_ids: string[];
  summary_ids: string[];
}

export interface RoundsDoc {
  rounds: RoundDoc[];
}

export interface AssignmentItem {
  summary_id: string;
  record_version: number;
  submitted: boolean;
}

export interface AssignmentsDoc {
  round_id: string;
  reviewer_id: string;
  round_status: "open" | "closed";
  taxonomy_version: number;
  progress: number;
  assignments: AssignmentItem[];
}

export interface SummaryDoc {
  id: string;
  source_text: string;
  generated_summary: string;
  metadata: Record<string, unknown>;
}

export interface InstanceDoc {
  failure_mode_id: string;
  comment: string;
  severity: number;
  detectability: number;
}

export interface AnnotationDoc {
  round_id: string;
  reviewer_id: string;
  summary_id: string;
  flags: Record<string, boolean>;
  instances: InstanceDoc[];
  record_version: number;
  submitted: boolean;
}

export interface PutAnnotationBody {
  expected_version: number;
  flags: Record<string, boolean>;
  instances: InstanceDoc[];
  submitted: boolean;
}

export interface PutAck {
  record_version: number;
  submitted: boolean;
}

export interface ErrorDoc {
  error: string;
  message: string;
  context?: Record<string, unknown>;
}

/** Carried by a 409 on stale writes: what the server expected vs holds. */
export interface ConflictContext {
  expected: number;
  actual: number;
}

export interface EstimateDoc {
  metric: string;
  value: number | null;
  n_units: number;
  rater_ids: string[];
  diagnostics: Record<string, unknown>;
  reason: string | null;
}

export interface PairwiseBinaryDoc {
  rater_a: string;
  rater_b: string;
  kappa: EstimateDoc;
  ac1: EstimateDoc;
}

export interface BinaryPanelDoc {
  stage: number;
  n_units: number;
  n_complete_units: number;
  complete_case_only: boolean;
  pairwise: PairwiseBinaryDoc[];
  fleiss: EstimateDoc;
  ac1: EstimateDoc;
  alpha: EstimateDoc;
  unanimity: EstimateDoc;
}

export interface PairwiseScoresDoc {
  rater_a: string;
  rater_b: string;
  pearson: EstimateDoc;
  spearman: EstimateDoc;
}

export interface RaterScoreSummaryDoc {
  rater_id: string;
  n: number;
  mean: number | null;
  sd: number | null;
}

export interface ScorePanelDoc {
  dimension: string;
  n_units: number;
  n_complete_units: number;
  inclusion: string;
  pairwise: PairwiseScoresDoc[];
  icc: EstimateDoc;
  tolerances: EstimateDoc[];
  per_rater: RaterScoreSummaryDoc[];
}

export interface BinaryAgreementDoc {
  round_id: string;
  stage: 1 | 2;
  panel: BinaryPanelDoc;
}

export interface ScoreAgreementDoc {
  round_id: string;
  stage: 3;
  panels: Record<string, ScorePanelDoc>;
}

export type AgreementDoc = BinaryAgreementDoc | ScoreAgreementDoc;

export interface RiskSupportDoc {
  summaries_flagged: number;
  instances: number;
  reviewers: number;
}

export interface RiskEntryDoc {
  failure_mode_id: string;
  occurrence_ratio: number;
  occurrence_ratio_exact: string;
  occurrence: number | null;
  severity: number | null;
  detectability: number | null;
  rpn: number | null;
  support: RiskSupportDoc;
}

export interface RiskRegisterDoc {
  round_id: string;
  aggregation: string;
  consensus: number;
  caveat: string;
  entries: RiskEntryDoc[];
}

export interface SusAck {
  evaluator_id: string;
  score: number;
  grade: string;
  label: string;
}
