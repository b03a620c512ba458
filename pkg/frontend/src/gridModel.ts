/**
 * Annotation grid state machine (no DOM, no network).
 *
 * Holds one reviewer's record for one summary as editable state, enforces
 * the record invariants while editing, and serializes to the server's PUT
 * body. Conflict handling keeps the local edits intact alongside the server
 * record so nothing typed is ever dropped.
 */

import type {
  AnnotationDoc,
  Category,
  FailureMode,
  InstanceDoc,
  PutAnnotationBody,
  ScalesDoc,
  ScoreDimension,
  Subcategory,
  TaxonomyDoc,
} from "./types.js";

export interface InstanceDraft {
  comment: string;
  severity: number | null;
  detectability: number | null;
}

export interface ModeRow {
  mode: FailureMode;
  flagged: boolean;
  instances: InstanceDraft[];
}

export interface SubcategoryGroup {
  subcategory: Subcategory;
  modes: ModeRow[];
}

export interface CategoryGroup {
  category: Category;
  subcategories: SubcategoryGroup[];
}

export interface FieldProblem {
  modeId: string;
  instanceIndex: number | null;
  field: "instances" | "severity" | "detectability";
  message: string;
}

export type GridStatus = "clean" | "dirty" | "saving" | "saved" | "conflict";

export interface SetScoreResult {
  ok: boolean;
  message?: string;
}

export interface GridDraft {
  roundId: string;
  summaryId: string;
  reviewerId: string;
  recordVersion: number;
  flagged: string[];
  instances: Record<string, InstanceDraft[]>;
}

function blankInstance(): InstanceDraft {
  return { comment: "", severity: null, detectability: null };
}

export class AnnotationGrid {
  readonly taxonomy: TaxonomyDoc;
  readonly scales: ScalesDoc;
  readonly roundId: string;
  readonly summaryId: string;
  readonly reviewerId: string;

  private flags = new Map<string, boolean>();
  private drafts = new Map<string, InstanceDraft[]>();
  private version = 0;
  private gridStatus: GridStatus = "clean";
  private serverRecord: AnnotationDoc | null = null;
  readOnly = false;

  constructor(
    taxonomy: TaxonomyDoc,
    scales: ScalesDoc,
    roundId: string,
    reviewerId: string,
    summaryId: string,
  ) {
    this.taxonomy = taxonomy;
    this.scales = scales;
    this.roundId = roundId;
    this.reviewerId = reviewerId;
    this.summaryId = summaryId;
    for (const mode of taxonomy.failure_modes) {
      this.flags.set(mode.id, false);
    }
  }

  get recordVersion(): number {
    return this.version;
  }

  get status(): GridStatus {
    return this.gridStatus;
  }

  get dirty(): boolean {
    return this.gridStatus === "dirty" || this.gridStatus === "conflict";
  }

  /** Server record shown next to local edits while resolving a conflict. */
  get conflictRecord(): AnnotationDoc | null {
    return this.gridStatus === "conflict" ? this.serverRecord : null;
  }

  /** Rows grouped category -> subcategory -> failure mode, taxonomy order. */
  rows(): CategoryGroup[] {
    return this.taxonomy.categories.map((category) => ({
      category,
      subcategories: this.taxonomy.subcategories
        .filter((sub) => sub.category_id === category.id)
        .map((subcategory) => ({
          subcategory,
          modes: this.taxonomy.failure_modes
            .filter((mode) => mode.subcategory_id === subcategory.id)
            .map((mode) => ({
              mode,
              flagged: this.flags.get(mode.id) ?? false,
              instances: this.instancesOf(mode.id),
            })),
        })),
    }));
  }

  modeRow(modeId: string): ModeRow {
    const mode = this.taxonomy.failure_modes.find((m) => m.id === modeId);
    if (!mode) {
      throw new Error(`unknown failure mode ${modeId}`);
    }
    return {
      mode,
      flagged: this.flags.get(modeId) ?? false,
      instances: this.instancesOf(modeId),
    };
  }

  private instancesOf(modeId: string): InstanceDraft[] {
    return this.drafts.get(modeId) ?? [];
  }

  /** Anchor text for tooltips, verbatim from the scales endpoint. */
  anchor(dimension: ScoreDimension, score: number): string {
    const anchor = this.scales.anchors.find(
      (a) => a.dimension === dimension && a.score === score,
    );
    if (!anchor) {
      return "";
    }
    return `${anchor.label}: ${anchor.definition}`;
  }

  loadRecord(doc: AnnotationDoc | null): void {
    for (const mode of this.taxonomy.failure_modes) {
      this.flags.set(mode.id, false);
    }
    this.drafts.clear();
    this.version = doc?.record_version ?? 0;
    if (doc) {
      for (const [modeId, on] of Object.entries(doc.flags)) {
        if (this.flags.has(modeId)) {
          this.flags.set(modeId, on);
        }
      }
      for (const instance of doc.instances) {
        const list = this.drafts.get(instance.failure_mode_id) ?? [];
        list.push({
          comment: instance.comment,
          severity: instance.severity,
          detectability: instance.detectability,
        });
        this.drafts.set(instance.failure_mode_id, list);
      }
    }
    this.serverRecord = doc;
    this.gridStatus = "clean";
  }

  private edit(): void {
    if (this.readOnly) {
      throw new Error("round is closed; the grid is read-only");
    }
    if (this.gridStatus !== "conflict") {
      this.gridStatus = "dirty";
    }
  }

  toggleMode(modeId: string, on: boolean): void {
    if (!this.flags.has(modeId)) {
      throw new Error(`unknown failure mode ${modeId}`);
    }
    this.edit();
    this.flags.set(modeId, on);
    if (on && this.instancesOf(modeId).length === 0) {
      this.drafts.set(modeId, [blankInstance()]);
    }
    if (!on) {
      // instance rows exist only under toggled-on modes
      this.drafts.delete(modeId);
    }
  }

  addInstance(modeId: string): void {
    if (!this.flags.get(modeId)) {
      throw new Error(`mode ${modeId} is not flagged; toggle it on first`);
    }
    this.edit();
    const list = this.drafts.get(modeId) ?? [];
    list.push(blankInstance());
    this.drafts.set(modeId, list);
  }

  removeInstance(modeId: string, index: number): void {
    const list = this.drafts.get(modeId) ?? [];
    if (index < 0 || index >= list.length) {
      throw new Error(`no instance ${index} under ${modeId}`);
    }
    this.edit();
    list.splice(index, 1);
    if (list.length === 0) {
      // a flagged mode keeps at least one row to fill in
      list.push(blankInstance());
    }
  }

  setComment(modeId: string, index: number, comment: string): void {
    const instance = this.instanceAt(modeId, index);
    this.edit();
    instance.comment = comment;
  }

  /** Score selectors accept only integers within the served range. */
  setScore(
    modeId: string,
    index: number,
    dimension: "severity" | "detectability",
    value: number,
  ): SetScoreResult {
    const instance = this.instanceAt(modeId, index);
    if (!Number.isInteger(value)) {
      return { ok: false, message: `${dimension} must be a whole number` };
    }
    if (value < this.scales.score_min || value > this.scales.score_max) {
      return {
        ok: false,
        message:
          `${dimension} must be between ${this.scales.score_min} ` +
          `and ${this.scales.score_max}`,
      };
    }
    this.edit();
    instance[dimension] = value;
    return { ok: true };
  }

  private instanceAt(modeId: string, index: number): InstanceDraft {
    const list = this.instancesOf(modeId);
    const instance = list[index];
    if (!instance) {
      throw new Error(`no instance ${index} under ${modeId}`);
    }
    return instance;
  }

  /** Problems that block submission; empty means ready. */
  validate(): FieldProblem[] {
    const problems: FieldProblem[] = [];
    for (const mode of this.taxonomy.failure_modes) {
      if (!this.flags.get(mode.id)) {
        continue;
      }
      const instances = this.instancesOf(mode.id);
      if (instances.length === 0) {
        problems.push({
          modeId: mode.id,
          instanceIndex: null,
          field: "instances",
          message: "flagged modes need at least one instance",
        });
        continue;
      }
      instances.forEach((instance, i) => {
        for (const field of ["severity", "detectability"] as const) {
          if (instance[field] === null) {
            problems.push({
              modeId: mode.id,
              instanceIndex: i,
              field,
              message: `choose a ${field} score`,
            });
          }
        }
      });
    }
    return problems;
  }

  canSubmit(): boolean {
    return !this.readOnly && this.validate().length === 0;
  }

  toPutBody(submitted = true): PutAnnotationBody {
    const problems = this.validate();
    if (submitted && problems.length > 0) {
      throw new Error(`record incomplete: ${problems[0]!.message}`);
    }
    const flags: Record<string, boolean> = {};
    for (const mode of this.taxonomy.failure_modes) {
      flags[mode.id] = this.flags.get(mode.id) ?? false;
    }
    const instances: InstanceDoc[] = [];
    for (const mode of this.taxonomy.failure_modes) {
      if (!flags[mode.id]) {
        continue;
      }
      for (const draft of this.instancesOf(mode.id)) {
        instances.push({
          failure_mode_id: mode.id,
          comment: draft.comment,
          severity: draft.severity ?? 0,
          detectability: draft.detectability ?? 0,
        });
      }
    }
    return {
      expected_version: this.version,
      flags,
      instances,
      submitted,
    };
  }

  markSaving(): void {
    this.gridStatus = "saving";
  }

  applyAck(recordVersion: number): void {
    this.version = recordVersion;
    this.gridStatus = "saved";
  }

  /**
   * Stale write: hold the server's record for side-by-side review while
   * every local edit stays in place.
   */
  enterConflict(serverRecord: AnnotationDoc): void {
    this.serverRecord = serverRecord;
    this.gridStatus = "conflict";
  }

  /** Rebase local edits onto the server's version and resubmit from there. */
  resolveKeepLocal(): void {
    if (this.gridStatus !== "conflict" || !this.serverRecord) {
      throw new Error("no conflict to resolve");
    }
    this.version = this.serverRecord.record_version;
    this.gridStatus = "dirty";
  }

  /** Discard local edits in favour of the server record. */
  resolveTakeServer(): void {
    if (this.gridStatus !== "conflict" || !this.serverRecord) {
      throw new Error("no conflict to resolve");
    }
    this.loadRecord(this.serverRecord);
  }

  /** Serializable snapshot for browser-storage drafts. */
  toDraft(): GridDraft {
    const instances: Record<string, InstanceDraft[]> = {};
    for (const [modeId, list] of this.drafts) {
      instances[modeId] = list.map((d) => ({ ...d }));
    }
    return {
      roundId: this.roundId,
      summaryId: this.summaryId,
      reviewerId: this.reviewerId,
      recordVersion: this.version,
      flagged: [...this.flags.entries()]
        .filter(([, on]) => on)
        .map(([id]) => id),
      instances,
    };
  }

  restoreDraft(draft: GridDraft): void {
    if (
      draft.roundId !== this.roundId ||
      draft.summaryId !== this.summaryId ||
      draft.reviewerId !== this.reviewerId
    ) {
      throw new Error("draft belongs to a different assignment");
    }
    for (const mode of this.taxonomy.failure_modes) {
      this.flags.set(mode.id, false);
    }
    this.drafts.clear();
    for (const modeId of draft.flagged) {
      if (this.flags.has(modeId)) {
        this.flags.set(modeId, true);
      }
    }
    for (const [modeId, list] of Object.entries(draft.instances)) {
      if (this.flags.get(modeId)) {
        this.drafts.set(modeId, list.map((d) => ({ ...d })));
      }
    }
    this.version = draft.recordVersion;
    this.gridStatus = "dirty";
  }
}
