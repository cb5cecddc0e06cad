// Pure HTML renderers. Everything displayed comes from server payloads;
// nothing is invented client-side, so the non-leak property carries over.

import type { SessionViewModel, Tab } from "./session_view.js";
import { TABS } from "./session_view.js";
import type { DashboardViewModel } from "./dashboard_view.js";
import type {
  CaseDocWire,
  ContributionWire,
  ExplanationWire,
  LogEntryWire,
  ReportWire,
} from "./types.js";

export function escapeHtml(value: unknown): string {
  return String(value)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

const TAB_LABELS: Record<Tab, string> = {
  patient_chat: "Patient chat",
  physical_exam: "Physical exam",
  labs: "Labs & tests",
  intervention: "Intervention",
  supervisor: "Supervisor",
  feedback: "Feedback",
};

export function renderTabs(active: Tab): string {
  const buttons = TABS.map((tab) => {
    const cls = tab === active ? "tab active" : "tab";
    return `<button class="${cls}" data-tab="${tab}">${TAB_LABELS[tab]}</button>`;
  });
  return `<nav class="tabs">${buttons.join("")}</nav>`;
}

function renderEntryRow(entry: LogEntryWire, chat: boolean): string {
  const question =
    chat && entry.action && entry.action.text !== undefined
      ? `<div class="bubble student">${escapeHtml(entry.action.text)}</div>`
      : "";
  const label = entry.action ? escapeHtml(entry.action.kind) : "system";
  return (
    `<div class="entry" data-seq="${entry.seq}">` +
    question +
    `<div class="bubble agent"><span class="agent-name">${escapeHtml(entry.response.agent_id)}</span>` +
    `<p>${escapeHtml(entry.response.content)}</p>` +
    `<button class="explain" data-seq="${entry.seq}" aria-label="explain entry ${entry.seq}">explain</button>` +
    `<span class="meta">#${entry.seq} ${label}</span></div>` +
    `</div>`
  );
}

export function renderTranscript(entries: LogEntryWire[], chat: boolean): string {
  if (entries.length === 0) return `<div class="transcript empty"></div>`;
  return `<div class="transcript">${entries.map((e) => renderEntryRow(e, chat)).join("")}</div>`;
}

/** Ordered catalog of things the active tab can do (exams, tests, treatments). */
export function renderCatalog(caseDoc: CaseDocWire, tab: Tab): string {
  let items: Array<[string, string]> = [];
  if (tab === "physical_exam") {
    items = Object.entries(caseDoc.exam_findings).map(([id, exam]) => [id, exam.label]);
  } else if (tab === "labs") {
    items = Object.entries(caseDoc.test_catalog).map(([id, test]) => [
      id,
      `${test.label} (${test.modality})`,
    ]);
  } else if (tab === "intervention") {
    items = caseDoc.intervention_protocol.map((rule) => [rule.intervention_id, rule.label]);
  } else {
    return "";
  }
  const rows = items.map(
    ([id, label]) =>
      `<li><button class="catalog-item" data-target="${escapeHtml(id)}">${escapeHtml(label)}</button></li>`,
  );
  return `<ol class="catalog">${rows.join("")}</ol>`;
}

/** Signed horizontal bars: the concrete feature-importance view. */
export function renderContributionBars(contributions: ContributionWire[]): string {
  if (contributions.length === 0) return `<p class="no-contributions">no weighted features</p>`;
  const maxAbs = Math.max(...contributions.map((c) => Math.abs(c.weight)), 1e-12);
  const bars = contributions.map((c) => {
    const width = Math.max(2, Math.round((Math.abs(c.weight) / maxAbs) * 100));
    const sign = c.weight < 0 ? "neg" : "pos";
    return (
      `<div class="bar-row"><span class="feature">${escapeHtml(c.feature)}</span>` +
      `<span class="bar ${sign}" style="width:${width}%"></span>` +
      `<span class="weight">${c.weight >= 0 ? "+" : ""}${c.weight.toFixed(3)}</span></div>`
    );
  });
  return `<div class="bars">${bars.join("")}</div>`;
}

/** The explanation drawer: every record field, verbatim. */
export function renderDrawer(explanation: ExplanationWire | null): string {
  if (explanation === null) return `<aside class="drawer closed"></aside>`;
  const codes = explanation.reason_codes.map((c) => `<li>${escapeHtml(c)}</li>`).join("");
  const rules = explanation.rule_ids.map((r) => `<li>${escapeHtml(r)}</li>`).join("");
  return (
    `<aside class="drawer open" data-decision-id="${escapeHtml(explanation.decision_id)}">` +
    `<button class="close-drawer">close</button>` +
    `<h3>${escapeHtml(explanation.agent_id)} / ${escapeHtml(explanation.kind)}</h3>` +
    `<dl>` +
    `<dt>decision_id</dt><dd>${escapeHtml(explanation.decision_id)}</dd>` +
    `<dt>reason_codes</dt><dd><ul>${codes}</ul></dd>` +
    `<dt>contributions</dt><dd>${renderContributionBars(explanation.contributions)}</dd>` +
    `<dt>rule_ids</dt><dd><ul>${rules}</ul></dd>` +
    `<dt>narrative</dt><dd>${escapeHtml(explanation.narrative)}</dd>` +
    `<dt>elapsed</dt><dd>${explanation.elapsed} ms</dd>` +
    `</dl></aside>`
  );
}

/** Feedback tab: every rubric item exactly once, with key-factor badges. */
export function renderFeedback(report: ReportWire | null, caseDoc: CaseDocWire | null): string {
  if (report === null) {
    return (
      `<div class="feedback pending"><p>No report yet. Conclude the case to be scored.</p>` +
      renderConcludeForm(caseDoc) +
      `</div>`
    );
  }
  const badge = new Map(report.key_factors.map((f) => [f.item_id, f.direction]));
  const description = new Map(
    (caseDoc?.rubric ?? []).map((item) => [item.item_id, item.description]),
  );
  const rows = report.item_scores.map((s) => {
    const mark = badge.get(s.item_id);
    const badgeHtml = mark ? `<span class="badge ${mark}">${mark}</span>` : "";
    return (
      `<tr data-item="${escapeHtml(s.item_id)}"><td>${escapeHtml(description.get(s.item_id) ?? s.item_id)}</td>` +
      `<td>${s.satisfied}/${s.required}</td><td>${(s.fraction * 100).toFixed(0)}%</td>` +
      `<td>${badgeHtml}</td></tr>`
    );
  });
  return (
    `<div class="feedback scored">` +
    `<p class="total">Total score: ${(report.total_score * 100).toFixed(1)}%</p>` +
    `<p class="narrative">${escapeHtml(report.narrative)}</p>` +
    `<table class="rubric"><thead><tr><th>Item</th><th>Events</th><th>Credit</th><th></th></tr></thead>` +
    `<tbody>${rows.join("")}</tbody></table></div>`
  );
}

function renderConcludeForm(caseDoc: CaseDocWire | null): string {
  const options = (caseDoc?.differential ?? [])
    .map((d) => `<option value="${escapeHtml(d)}">${escapeHtml(d)}</option>`)
    .join("");
  return (
    `<form class="conclude"><label>Final diagnosis ` +
    `<select name="diagnosis">${options}</select></label>` +
    `<button type="submit">Conclude case</button></form>`
  );
}

export function renderConnectionNotice(view: SessionViewModel): string {
  if (view.connection === "retry") {
    return `<div class="notice retry">Connection lost; retrying. Nothing is shown that the server did not send.</div>`;
  }
  if (view.connection === "ended") {
    return `<div class="notice ended">This session is no longer available.</div>`;
  }
  return "";
}

/** One full view: tabs, tab body, drawer, connection state. */
export function renderSessionView(view: SessionViewModel, caseDoc: CaseDocWire | null): string {
  const tab = view.tab;
  const chat = tab === "patient_chat" || tab === "supervisor";
  const entries = view.visibleEntries(tab);
  let body = "";
  if (tab === "feedback") {
    body = renderTranscript(entries, false) + renderFeedback(view.report, caseDoc);
  } else {
    body = renderTranscript(entries, chat);
    if (caseDoc) body += renderCatalog(caseDoc, tab);
    if (chat) {
      body +=
        `<form class="say"><input name="text" type="text" ` +
        `placeholder="${tab === "supervisor" ? "Talk to supervisor" : "Ask the patient"}" />` +
        `<button type="submit" ${view.pendingAction ? "disabled" : ""}>Send</button></form>`;
    }
  }
  return (
    renderConnectionNotice(view) +
    renderTabs(tab) +
    `<main class="tab-body" data-active-tab="${tab}">${body}</main>` +
    renderDrawer(view.drawerExplanation())
  );
}

export function renderDashboard(vm: DashboardViewModel, caseDoc: CaseDocWire | null): string {
  const rows = vm.rows.map(
    (row) =>
      `<tr data-seq="${row.seq}"><td>${row.seq}</td><td>${escapeHtml(row.decision_id)}</td>` +
      `<td>${escapeHtml(row.agent_id)}</td><td>${escapeHtml(vm.triggerLabel(row))}</td>` +
      `<td>${row.reason_codes.map(escapeHtml).join(", ")}</td>` +
      `<td>${row.rule_ids.map(escapeHtml).join(", ")}</td><td>${row.elapsed} ms</td></tr>`,
  );
  return (
    `<section class="dashboard"><h2>Decision log (${vm.rowCount} rows)</h2>` +
    `<table class="decisions"><thead><tr><th>#</th><th>decision</th><th>agent</th>` +
    `<th>trigger</th><th>reason codes</th><th>rule ids</th><th>elapsed</th></tr></thead>` +
    `<tbody>${rows.join("")}</tbody></table>` +
    `<section class="report-panel">${renderFeedback(vm.report, caseDoc)}</section></section>`
  );
}
