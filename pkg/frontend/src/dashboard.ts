/**
 * Read-only dashboard rendering for agreement and risk reports.
 *
 * Every number shown comes straight out of the server documents; nothing is
 * recomputed client-side, so the dashboard can never disagree with the
 * service over a statistic.
 */

import type {
  AgreementDoc,
  BinaryPanelDoc,
  EstimateDoc,
  RiskRegisterDoc,
  ScorePanelDoc,
} from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function formatEstimate(estimate: EstimateDoc): string {
  if (estimate.value === null) {
    return `undefined (${estimate.reason ?? "no reason given"})`;
  }
  return estimate.value.toFixed(3);
}

/** Row label for a tolerance estimate, read from its own diagnostics. */
export function toleranceLabel(estimate: EstimateDoc): string {
  const step = estimate.diagnostics["tolerance"];
  if (step === 0) {
    return "exact";
  }
  return `within ±${String(step)}`;
}

function estimateCell(estimate: EstimateDoc): HTMLTableCellElement {
  const cell = el("td", estimate.value === null ? "undefined" : "value");
  cell.textContent = formatEstimate(estimate);
  return cell;
}

function headerRow(labels: string[]): HTMLTableRowElement {
  const row = el("tr");
  for (const label of labels) {
    row.appendChild(el("th", undefined, label));
  }
  return row;
}

export function renderBinaryPanel(panel: BinaryPanelDoc): HTMLElement {
  const section = el("section", "panel binary-panel");
  section.appendChild(
    el(
      "p",
      "coverage",
      `${panel.n_units} units, ${panel.n_complete_units} complete`,
    ),
  );

  const overall = el("table", "overall");
  overall.appendChild(headerRow(["statistic", "value"]));
  const metrics: [string, EstimateDoc][] = [
    ["Fleiss κ", panel.fleiss],
    ["Gwet AC1", panel.ac1],
    ["Krippendorff α", panel.alpha],
    ["unanimity", panel.unanimity],
  ];
  for (const [label, estimate] of metrics) {
    const row = el("tr");
    row.appendChild(el("td", undefined, label));
    row.appendChild(estimateCell(estimate));
    overall.appendChild(row);
  }
  section.appendChild(overall);

  const pairwise = el("table", "pairwise");
  pairwise.appendChild(headerRow(["pair", "Cohen κ", "Gwet AC1"]));
  for (const pair of panel.pairwise) {
    const row = el("tr");
    row.appendChild(el("td", undefined, `${pair.rater_a} / ${pair.rater_b}`));
    row.appendChild(estimateCell(pair.kappa));
    row.appendChild(estimateCell(pair.ac1));
    pairwise.appendChild(row);
  }
  section.appendChild(pairwise);
  return section;
}

export function renderScorePanel(panel: ScorePanelDoc): HTMLElement {
  const section = el("section", "panel score-panel");
  section.appendChild(el("h3", undefined, panel.dimension));
  section.appendChild(el("p", "coverage", panel.inclusion));

  const overall = el("table", "overall");
  overall.appendChild(headerRow(["statistic", "value"]));
  const rows: [string, EstimateDoc][] = [["ICC(2,1)", panel.icc]];
  // tolerance rows in served order, labelled from their own diagnostics
  for (const estimate of panel.tolerances) {
    rows.push([`agreement (${toleranceLabel(estimate)})`, estimate]);
  }
  for (const [label, estimate] of rows) {
    const row = el("tr");
    row.appendChild(el("td", undefined, label));
    row.appendChild(estimateCell(estimate));
    overall.appendChild(row);
  }
  section.appendChild(overall);

  const pairwise = el("table", "pairwise");
  pairwise.appendChild(headerRow(["pair", "Pearson r", "Spearman ρ"]));
  for (const pair of panel.pairwise) {
    const row = el("tr");
    row.appendChild(el("td", undefined, `${pair.rater_a} / ${pair.rater_b}`));
    row.appendChild(estimateCell(pair.pearson));
    row.appendChild(estimateCell(pair.spearman));
    pairwise.appendChild(row);
  }
  section.appendChild(pairwise);

  const perRater = el("table", "per-rater");
  perRater.appendChild(headerRow(["reviewer", "n", "mean", "sd"]));
  for (const rater of panel.per_rater) {
    const row = el("tr");
    row.appendChild(el("td", undefined, rater.rater_id));
    row.appendChild(el("td", undefined, String(rater.n)));
    row.appendChild(
      el("td", undefined, rater.mean === null ? "—" : rater.mean.toFixed(2)),
    );
    row.appendChild(
      el("td", undefined, rater.sd === null ? "—" : rater.sd.toFixed(2)),
    );
    perRater.appendChild(row);
  }
  section.appendChild(perRater);
  return section;
}

export function renderAgreement(doc: AgreementDoc): HTMLElement {
  const root = el("section", "agreement-report");
  root.appendChild(
    el("h2", undefined, `Agreement, round ${doc.round_id}, stage ${doc.stage}`),
  );
  if (doc.stage === 3) {
    for (const panel of Object.values(doc.panels)) {
      root.appendChild(renderScorePanel(panel));
    }
  } else {
    root.appendChild(renderBinaryPanel(doc.panel));
  }
  return root;
}

export function renderRiskRegister(
  doc: RiskRegisterDoc,
  labels: Record<string, string> = {},
): HTMLElement {
  const root = el("section", "risk-register");
  root.appendChild(el("h2", undefined, `Risk register, round ${doc.round_id}`));
  root.appendChild(
    el(
      "p",
      "policy",
      `aggregation: ${doc.aggregation}, consensus threshold: ${doc.consensus}`,
    ),
  );
  const table = el("table", "register");
  table.appendChild(
    headerRow(["failure mode", "O", "S", "D", "RPN", "ratio", "support"]),
  );
  for (const entry of doc.entries) {
    const row = el("tr");
    row.appendChild(
      el("td", undefined, labels[entry.failure_mode_id] ?? entry.failure_mode_id),
    );
    for (const value of [entry.occurrence, entry.severity, entry.detectability]) {
      row.appendChild(
        el("td", undefined, value === null ? "—" : String(value)),
      );
    }
    row.appendChild(
      el(
        "td",
        entry.rpn === null ? "not-assessable" : "rpn",
        entry.rpn === null ? "not assessable" : String(entry.rpn),
      ),
    );
    row.appendChild(el("td", undefined, entry.occurrence_ratio_exact));
    row.appendChild(
      el(
        "td",
        undefined,
        `${entry.support.summaries_flagged} flagged, ` +
          `${entry.support.instances} instances`,
      ),
    );
    table.appendChild(row);
  }
  root.appendChild(table);
  // the caveat travels with the register and is always shown
  root.appendChild(el("p", "caveat", doc.caveat));
  return root;
}
