/**
 * Browser wiring: login, assignment picker, side-by-side reading pane,
 * annotation grid, and report dashboards. All state lives in AnnotationGrid;
 * this module only moves it in and out of the DOM.
 */

import { ApiClient, ApiError, ConflictError } from "./apiClient.js";
import { renderAgreement, renderRiskRegister } from "./dashboard.js";
import { AnnotationGrid } from "./gridModel.js";
import type { GridDraft } from "./gridModel.js";
import type {
  AssignmentsDoc,
  RoundDoc,
  ScalesDoc,
  TaxonomyDoc,
} from "./types.js";

interface AppContext {
  client: ApiClient;
  reviewerId: string;
  taxonomy: TaxonomyDoc;
  scales: ScalesDoc;
}

function must<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id} in page shell`);
  }
  return node as T;
}

function draftKey(grid: AnnotationGrid): string {
  return `fmecalab-draft:${grid.roundId}:${grid.reviewerId}:${grid.summaryId}`;
}

function saveDraft(grid: AnnotationGrid): void {
  if (grid.dirty) {
    localStorage.setItem(draftKey(grid), JSON.stringify(grid.toDraft()));
  } else {
    localStorage.removeItem(draftKey(grid));
  }
}

function loadDraft(grid: AnnotationGrid): GridDraft | null {
  const raw = localStorage.getItem(draftKey(grid));
  if (!raw) {
    return null;
  }
  try {
    return JSON.parse(raw) as GridDraft;
  } catch {
    localStorage.removeItem(draftKey(grid));
    return null;
  }
}

function setStatus(text: string, kind: "info" | "error" = "info"): void {
  const bar = must<HTMLElement>("status-bar");
  bar.textContent = text;
  bar.className = kind;
}

/** Keep the source and summary panes scrolling together, proportionally. */
export function syncScroll(left: HTMLElement, right: HTMLElement): void {
  let active: HTMLElement | null = null;
  const follow = (from: HTMLElement, to: HTMLElement) => {
    if (active && active !== from) {
      return;
    }
    active = from;
    const range = from.scrollHeight - from.clientHeight;
    const ratio = range > 0 ? from.scrollTop / range : 0;
    to.scrollTop = ratio * (to.scrollHeight - to.clientHeight);
    requestAnimationFrame(() => {
      active = null;
    });
  };
  left.addEventListener("scroll", () => follow(left, right));
  right.addEventListener("scroll", () => follow(right, left));
}

function renderGrid(ctx: AppContext, grid: AnnotationGrid): void {
  const host = must<HTMLElement>("grid");
  host.replaceChildren();

  for (const group of grid.rows()) {
    const catBlock = document.createElement("section");
    catBlock.className = "category";
    const catHead = document.createElement("h3");
    catHead.textContent = group.category.label;
    catBlock.appendChild(catHead);

    for (const sub of group.subcategories) {
      const subBlock = document.createElement("div");
      subBlock.className = "subcategory";
      const subHead = document.createElement("h4");
      subHead.textContent = sub.subcategory.label;
      subBlock.appendChild(subHead);

      for (const row of sub.modes) {
        subBlock.appendChild(renderModeRow(ctx, grid, row.mode.id));
      }
      catBlock.appendChild(subBlock);
    }
    host.appendChild(catBlock);
  }
  refreshControls(grid);
}

function renderModeRow(
  ctx: AppContext,
  grid: AnnotationGrid,
  modeId: string,
): HTMLElement {
  const row = grid.modeRow(modeId);
  const block = document.createElement("div");
  block.className = row.flagged ? "mode flagged" : "mode";
  block.dataset["modeId"] = modeId;

  const header = document.createElement("label");
  const toggle = document.createElement("input");
  toggle.type = "checkbox";
  toggle.checked = row.flagged;
  toggle.disabled = grid.readOnly;
  toggle.addEventListener("change", () => {
    grid.toggleMode(modeId, toggle.checked);
    saveDraft(grid);
    renderGrid(ctx, grid);
  });
  header.appendChild(toggle);
  header.appendChild(document.createTextNode(` ${row.mode.label}`));
  header.title = row.mode.description;
  block.appendChild(header);

  if (!row.flagged) {
    return block;
  }

  row.instances.forEach((instance, index) => {
    const line = document.createElement("div");
    line.className = "instance";

    const comment = document.createElement("input");
    comment.type = "text";
    comment.placeholder = "where / what (optional)";
    comment.value = instance.comment;
    comment.disabled = grid.readOnly;
    comment.addEventListener("input", () => {
      grid.setComment(modeId, index, comment.value);
      saveDraft(grid);
      refreshControls(grid);
    });
    line.appendChild(comment);

    for (const dimension of ["severity", "detectability"] as const) {
      line.appendChild(
        scoreSelector(ctx, grid, modeId, index, dimension, instance[dimension]),
      );
    }

    const remove = document.createElement("button");
    remove.type = "button";
    remove.textContent = "remove";
    remove.disabled = grid.readOnly;
    remove.addEventListener("click", () => {
      grid.removeInstance(modeId, index);
      saveDraft(grid);
      renderGrid(ctx, grid);
    });
    line.appendChild(remove);
    block.appendChild(line);
  });

  const add = document.createElement("button");
  add.type = "button";
  add.className = "add-instance";
  add.textContent = "add another instance";
  add.disabled = grid.readOnly;
  add.addEventListener("click", () => {
    grid.addInstance(modeId);
    saveDraft(grid);
    renderGrid(ctx, grid);
  });
  block.appendChild(add);
  return block;
}

function scoreSelector(
  ctx: AppContext,
  grid: AnnotationGrid,
  modeId: string,
  index: number,
  dimension: "severity" | "detectability",
  current: number | null,
): HTMLSelectElement {
  const select = document.createElement("select");
  select.className = dimension;
  select.disabled = grid.readOnly;

  const placeholder = document.createElement("option");
  placeholder.value = "";
  placeholder.textContent = `${dimension}…`;
  select.appendChild(placeholder);

  const { score_min, score_max } = ctx.scales;
  for (let score = score_min; score <= score_max; score += 1) {
    const option = document.createElement("option");
    option.value = String(score);
    option.textContent = String(score);
    option.title = grid.anchor(dimension, score);
    select.appendChild(option);
  }
  select.value = current === null ? "" : String(current);

  select.addEventListener("change", () => {
    if (select.value === "") {
      return;
    }
    const result = grid.setScore(modeId, index, dimension, Number(select.value));
    if (!result.ok) {
      // out-of-range values never reach the grid state
      select.value = current === null ? "" : String(current);
      setStatus(result.message ?? "invalid score", "error");
      return;
    }
    saveDraft(grid);
    refreshControls(grid);
  });
  return select;
}

function refreshControls(grid: AnnotationGrid): void {
  const submit = must<HTMLButtonElement>("submit");
  submit.disabled = !grid.canSubmit();
  const problems = grid.validate();
  const gate = must<HTMLElement>("submit-gate");
  gate.textContent =
    problems.length === 0
      ? ""
      : `${problems.length} field(s) still needed before submit`;
  must<HTMLElement>("save-state").textContent = grid.status;
  must<HTMLElement>("record-version").textContent = `v${grid.recordVersion}`;
}

function showConflict(ctx: AppContext, grid: AnnotationGrid): void {
  const banner = must<HTMLElement>("conflict-banner");
  banner.hidden = false;
  banner.replaceChildren();
  const server = grid.conflictRecord;
  if (!server) {
    return;
  }
  const message = document.createElement("p");
  message.textContent =
    `Someone saved version ${server.record_version} of this record while ` +
    `you were editing. Your work is untouched; pick how to continue.`;
  banner.appendChild(message);

  const theirs = document.createElement("pre");
  theirs.className = "server-copy";
  theirs.textContent = JSON.stringify(
    { flags: server.flags, instances: server.instances },
    null,
    2,
  );
  banner.appendChild(theirs);

  const keep = document.createElement("button");
  keep.type = "button";
  keep.textContent = "keep my edits (overwrite theirs)";
  keep.addEventListener("click", () => {
    grid.resolveKeepLocal();
    banner.hidden = true;
    renderGrid(ctx, grid);
  });
  banner.appendChild(keep);

  const take = document.createElement("button");
  take.type = "button";
  take.textContent = "discard mine, load theirs";
  take.addEventListener("click", () => {
    grid.resolveTakeServer();
    localStorage.removeItem(draftKey(grid));
    banner.hidden = true;
    renderGrid(ctx, grid);
  });
  banner.appendChild(take);
}

async function submitRecord(ctx: AppContext, grid: AnnotationGrid): Promise<void> {
  grid.markSaving();
  refreshControls(grid);
  try {
    const ack = await ctx.client.putAnnotation(
      grid.roundId,
      grid.reviewerId,
      grid.summaryId,
      grid.toPutBody(true),
    );
    grid.applyAck(ack.record_version);
    localStorage.removeItem(draftKey(grid));
    setStatus(`submitted as version ${ack.record_version}`);
  } catch (err) {
    if (err instanceof ConflictError) {
      const server = await ctx.client.annotation(
        grid.roundId,
        grid.reviewerId,
        grid.summaryId,
      );
      if (server) {
        grid.enterConflict(server);
        showConflict(ctx, grid);
      }
      setStatus("version conflict; your edits are preserved", "error");
    } else if (err instanceof ApiError) {
      setStatus(`${err.code}: ${err.message}`, "error");
    } else {
      throw err;
    }
  }
  refreshControls(grid);
}

async function openAssignment(
  ctx: AppContext,
  round: RoundDoc,
  summaryId: string,
): Promise<void> {
  const summary = await ctx.client.summary(summaryId);
  must<HTMLElement>("source-pane").textContent = summary.source_text;
  must<HTMLElement>("summary-pane").textContent = summary.generated_summary;

  const grid = new AnnotationGrid(
    ctx.taxonomy,
    ctx.scales,
    round.id,
    ctx.reviewerId,
    summaryId,
  );
  grid.readOnly = round.status !== "open";
  must<HTMLElement>("readonly-banner").hidden = !grid.readOnly;

  const record = await ctx.client.annotation(
    round.id,
    ctx.reviewerId,
    summaryId,
  );
  grid.loadRecord(record);

  const draft = loadDraft(grid);
  if (draft && !grid.readOnly && draft.recordVersion === grid.recordVersion) {
    grid.restoreDraft(draft);
    setStatus("restored an unsubmitted draft from this browser");
  }

  renderGrid(ctx, grid);
  const submit = must<HTMLButtonElement>("submit");
  submit.onclick = () => {
    void submitRecord(ctx, grid);
  };
}

async function renderAssignments(ctx: AppContext, round: RoundDoc): Promise<void> {
  const doc: AssignmentsDoc = await ctx.client.assignments(round.id);
  const list = must<HTMLElement>("assignments");
  list.replaceChildren();
  for (const item of doc.assignments) {
    const button = document.createElement("button");
    button.type = "button";
    button.textContent = item.submitted
      ? `${item.summary_id} (submitted v${item.record_version})`
      : item.summary_id;
    button.addEventListener("click", () => {
      void openAssignment(ctx, round, item.summary_id);
    });
    list.appendChild(button);
  }
}

async function showReports(ctx: AppContext, roundId: string): Promise<void> {
  const host = must<HTMLElement>("reports");
  host.replaceChildren();
  try {
    for (const stage of [1, 2, 3] as const) {
      host.appendChild(renderAgreement(await ctx.client.agreementReport(roundId, stage)));
    }
    const labels = Object.fromEntries(
      ctx.taxonomy.failure_modes.map((mode) => [mode.id, mode.label]),
    );
    host.appendChild(renderRiskRegister(await ctx.client.riskReport(roundId), labels));
  } catch (err) {
    if (err instanceof ApiError) {
      const note = document.createElement("p");
      note.className = "report-unavailable";
      note.textContent = `reports unavailable: ${err.message}`;
      host.appendChild(note);
      return;
    }
    throw err;
  }
}

export async function start(): Promise<void> {
  const baseUrl = (document.body.dataset["apiBase"] ?? "").replace(/\/$/, "");
  const client = new ApiClient(baseUrl);

  must<HTMLButtonElement>("login").addEventListener("click", () => {
    void (async () => {
      const token = must<HTMLInputElement>("token").value.trim();
      const reviewerId = must<HTMLInputElement>("reviewer-id").value.trim();
      if (!token || !reviewerId) {
        setStatus("token and reviewer id are both required", "error");
        return;
      }
      client.setToken(token);
      try {
        const [taxonomy, scales, rounds] = await Promise.all([
          client.taxonomy(3),
          client.scales(),
          client.rounds(),
        ]);
        const ctx: AppContext = { client, reviewerId, taxonomy, scales };
        must<HTMLElement>("workbench").hidden = false;
        setStatus(`signed in as ${reviewerId}`);

        const picker = must<HTMLSelectElement>("round-picker");
        picker.replaceChildren();
        for (const round of rounds.rounds) {
          const option = document.createElement("option");
          option.value = round.id;
          option.textContent = `${round.id} (${round.status})`;
          picker.appendChild(option);
        }
        picker.onchange = () => {
          const round = rounds.rounds.find((r) => r.id === picker.value);
          if (round) {
            void renderAssignments(ctx, round);
            void showReports(ctx, round.id);
          }
        };
        picker.dispatchEvent(new Event("change"));

        syncScroll(
          must<HTMLElement>("source-pane"),
          must<HTMLElement>("summary-pane"),
        );
      } catch (err) {
        if (err instanceof ApiError) {
          setStatus(`${err.code}: ${err.message}`, "error");
          return;
        }
        throw err;
      }
    })();
  });
}
