import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { beforeEach, describe, expect, it } from "vitest";

import { AnnotationGrid } from "../src/gridModel.js";
import type { AnnotationDoc, ScalesDoc, TaxonomyDoc } from "../src/types.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf8")) as T;
}

const taxonomy = fixture<TaxonomyDoc>("taxonomy_v3.json");
const scales = fixture<ScalesDoc>("scales.json");
const savedRecord = fixture<AnnotationDoc>("annotation_ann_s000.json");

function freshGrid(): AnnotationGrid {
  return new AnnotationGrid(taxonomy, scales, "r1", "ann", "s000");
}

describe("grid shape", () => {
  it("groups fourteen modes into six categories", () => {
    const groups = freshGrid().rows();
    expect(groups).toHaveLength(6);
    const modeCount = groups
      .flatMap((g) => g.subcategories)
      .reduce((n, sub) => n + sub.modes.length, 0);
    expect(modeCount).toBe(14);
  });

  it("keeps every mode under a subcategory of its own category", () => {
    for (const group of freshGrid().rows()) {
      for (const sub of group.subcategories) {
        expect(sub.subcategory.category_id).toBe(group.category.id);
        for (const row of sub.modes) {
          expect(row.mode.subcategory_id).toBe(sub.subcategory.id);
        }
      }
    }
  });

  it("starts with nothing flagged and no instances", () => {
    const rows = freshGrid()
      .rows()
      .flatMap((g) => g.subcategories)
      .flatMap((s) => s.modes);
    expect(rows.every((r) => !r.flagged && r.instances.length === 0)).toBe(true);
  });

  it("serves anchor text for tooltips verbatim from the scales", () => {
    const grid = freshGrid();
    const anchor = scales.anchors.find(
      (a) => a.dimension === "severity" && a.score === 5,
    );
    expect(grid.anchor("severity", 5)).toBe(
      `${anchor?.label}: ${anchor?.definition}`,
    );
    expect(grid.anchor("severity", 99)).toBe("");
  });
});

describe("toggles and instances", () => {
  let grid: AnnotationGrid;
  beforeEach(() => {
    grid = freshGrid();
  });

  it("toggling a mode on creates one blank instance", () => {
    grid.toggleMode("omission", true);
    const row = grid.modeRow("omission");
    expect(row.flagged).toBe(true);
    expect(row.instances).toEqual([
      { comment: "", severity: null, detectability: null },
    ]);
    expect(grid.status).toBe("dirty");
  });

  it("toggling a mode off drops its instances", () => {
    grid.toggleMode("omission", true);
    grid.setComment("omission", 0, "third paragraph");
    grid.toggleMode("omission", false);
    expect(grid.modeRow("omission").instances).toHaveLength(0);
  });

  it("rejects instances under unflagged modes", () => {
    expect(() => grid.addInstance("omission")).toThrow(/not flagged/);
  });

  it("a flagged mode always keeps at least one instance row", () => {
    grid.toggleMode("omission", true);
    grid.removeInstance("omission", 0);
    expect(grid.modeRow("omission").instances).toHaveLength(1);
  });

  it("supports several instances of the same mode", () => {
    grid.toggleMode("omission", true);
    grid.addInstance("omission");
    grid.setComment("omission", 1, "also in the conclusion");
    const row = grid.modeRow("omission");
    expect(row.instances).toHaveLength(2);
    expect(row.instances[1]?.comment).toBe("also in the conclusion");
  });

  it("refuses unknown mode ids", () => {
    expect(() => grid.toggleMode("no_such_mode", true)).toThrow(/unknown/);
  });
});

describe("score selectors", () => {
  let grid: AnnotationGrid;
  beforeEach(() => {
    grid = freshGrid();
    grid.toggleMode("omission", true);
  });

  it.each([0, 6, -1, 2.5, Number.NaN, 125])(
    "rejects %s and leaves the instance unchanged",
    (bad) => {
      const result = grid.setScore("omission", 0, "severity", bad);
      expect(result.ok).toBe(false);
      expect(result.message).toBeTruthy();
      expect(grid.modeRow("omission").instances[0]?.severity).toBeNull();
    },
  );

  it.each([1, 2, 3, 4, 5])("accepts %s", (good) => {
    expect(grid.setScore("omission", 0, "severity", good)).toEqual({ ok: true });
    expect(grid.modeRow("omission").instances[0]?.severity).toBe(good);
  });

  it("scores severity and detectability independently", () => {
    grid.setScore("omission", 0, "severity", 4);
    expect(grid.modeRow("omission").instances[0]?.detectability).toBeNull();
    grid.setScore("omission", 0, "detectability", 2);
    expect(grid.modeRow("omission").instances[0]).toEqual({
      comment: "",
      severity: 4,
      detectability: 2,
    });
  });
});

describe("submit gating", () => {
  let grid: AnnotationGrid;
  beforeEach(() => {
    grid = freshGrid();
  });

  it("permits an all-clear record with nothing flagged", () => {
    expect(grid.canSubmit()).toBe(true);
    const body = grid.toPutBody(true);
    expect(Object.values(body.flags).every((f) => !f)).toBe(true);
    expect(body.instances).toHaveLength(0);
  });

  it("blocks until every flagged mode carries both scores", () => {
    grid.toggleMode("omission", true);
    grid.toggleMode("wrong_language", true);
    expect(grid.canSubmit()).toBe(false);

    grid.setScore("omission", 0, "severity", 4);
    expect(grid.canSubmit()).toBe(false);
    grid.setScore("omission", 0, "detectability", 3);
    expect(grid.canSubmit()).toBe(false);

    grid.setScore("wrong_language", 0, "severity", 2);
    grid.setScore("wrong_language", 0, "detectability", 1);
    expect(grid.canSubmit()).toBe(true);
  });

  it("gates on every instance, not just the first", () => {
    grid.toggleMode("omission", true);
    grid.setScore("omission", 0, "severity", 4);
    grid.setScore("omission", 0, "detectability", 3);
    grid.addInstance("omission");
    expect(grid.canSubmit()).toBe(false);
    const problems = grid.validate();
    expect(problems).toHaveLength(2);
    expect(problems.map((p) => p.field).sort()).toEqual([
      "detectability",
      "severity",
    ]);
    expect(problems.every((p) => p.instanceIndex === 1)).toBe(true);
  });

  it("toPutBody refuses incomplete submitted records", () => {
    grid.toggleMode("omission", true);
    expect(() => grid.toPutBody(true)).toThrow(/incomplete/);
    // drafts may be saved half-finished
    const body = grid.toPutBody(false);
    expect(body.submitted).toBe(false);
  });

  it("read-only grids never submit and refuse edits", () => {
    grid.readOnly = true;
    expect(grid.canSubmit()).toBe(false);
    expect(() => grid.toggleMode("omission", true)).toThrow(/read-only/);
  });
});

describe("record round trip", () => {
  it("loads a server record and serializes it back unchanged", () => {
    const grid = freshGrid();
    grid.loadRecord(savedRecord);
    expect(grid.status).toBe("clean");
    expect(grid.recordVersion).toBe(savedRecord.record_version);
    expect(grid.modeRow("omission").flagged).toBe(true);
    expect(grid.modeRow("omission").instances).toEqual([
      { comment: "seen omission", severity: 4, detectability: 3 },
    ]);

    const body = grid.toPutBody(true);
    expect(body.expected_version).toBe(savedRecord.record_version);
    expect(body.flags).toEqual(savedRecord.flags);
    expect(body.instances).toEqual(savedRecord.instances);
  });

  it("lists every taxonomy mode in the flags, even untouched ones", () => {
    const grid = freshGrid();
    const body = grid.toPutBody(true);
    expect(Object.keys(body.flags).sort()).toEqual(
      taxonomy.failure_modes.map((m) => m.id).sort(),
    );
  });
});

describe("conflict handling", () => {
  function diverged(): AnnotationGrid {
    const grid = freshGrid();
    grid.loadRecord(savedRecord);
    grid.setComment("omission", 0, "my newer reading");
    grid.setScore("omission", 0, "severity", 5);
    return grid;
  }

  const serverCopy: AnnotationDoc = {
    ...savedRecord,
    record_version: 4,
    instances: [
      {
        failure_mode_id: "omission",
        comment: "their edit",
        severity: 2,
        detectability: 2,
      },
    ],
  };

  it("keeps local edits while exposing the server record", () => {
    const grid = diverged();
    grid.enterConflict(serverCopy);
    expect(grid.status).toBe("conflict");
    expect(grid.conflictRecord?.record_version).toBe(4);
    expect(grid.conflictRecord?.instances[0]?.comment).toBe("their edit");
    // nothing typed was lost
    expect(grid.modeRow("omission").instances[0]?.comment).toBe(
      "my newer reading",
    );
    expect(grid.modeRow("omission").instances[0]?.severity).toBe(5);
  });

  it("keep-local rebases expected_version onto the server's", () => {
    const grid = diverged();
    grid.enterConflict(serverCopy);
    grid.resolveKeepLocal();
    expect(grid.status).toBe("dirty");
    const body = grid.toPutBody(true);
    expect(body.expected_version).toBe(4);
    expect(body.instances[0]?.comment).toBe("my newer reading");
  });

  it("take-server swaps in the server record cleanly", () => {
    const grid = diverged();
    grid.enterConflict(serverCopy);
    grid.resolveTakeServer();
    expect(grid.status).toBe("clean");
    expect(grid.recordVersion).toBe(4);
    expect(grid.modeRow("omission").instances[0]?.comment).toBe("their edit");
  });

  it("resolving without a conflict is an error", () => {
    expect(() => freshGrid().resolveKeepLocal()).toThrow(/no conflict/);
  });

  it("edits during a conflict stay in conflict state", () => {
    const grid = diverged();
    grid.enterConflict(serverCopy);
    grid.setComment("omission", 0, "refined while comparing");
    expect(grid.status).toBe("conflict");
    expect(grid.modeRow("omission").instances[0]?.comment).toBe(
      "refined while comparing",
    );
  });
});

describe("browser drafts", () => {
  it("round-trips unsubmitted work through a serialized draft", () => {
    const grid = freshGrid();
    grid.toggleMode("omission", true);
    grid.setComment("omission", 0, "halfway done");
    grid.setScore("omission", 0, "severity", 3);

    const raw = JSON.stringify(grid.toDraft());
    const revived = freshGrid();
    revived.restoreDraft(JSON.parse(raw));

    expect(revived.status).toBe("dirty");
    expect(revived.modeRow("omission").flagged).toBe(true);
    expect(revived.modeRow("omission").instances[0]).toEqual({
      comment: "halfway done",
      severity: 3,
      detectability: null,
    });
  });

  it("refuses drafts written for another assignment", () => {
    const grid = freshGrid();
    const other = new AnnotationGrid(taxonomy, scales, "r1", "ben", "s000");
    expect(() => other.restoreDraft(grid.toDraft())).toThrow(/different/);
  });

  it("clean grids produce an empty draft", () => {
    const draft = freshGrid().toDraft();
    expect(draft.flagged).toHaveLength(0);
    expect(Object.keys(draft.instances)).toHaveLength(0);
  });
});
