// Browser bootstrap: case picker, then the tabbed session console.
// At most one action is in flight per session (the send controls disable
// while pending), matching the server's per-session serialization.

import { ApiClient } from "./api.js";
import { DashboardViewModel } from "./dashboard_view.js";
import { pollUpdates } from "./poller.js";
import { renderDashboard, renderSessionView, escapeHtml } from "./render.js";
import { SessionViewModel, TABS, type Tab } from "./session_view.js";
import type { CaseDocWire } from "./types.js";

const POLL_INTERVAL_MS = 1500;

function rootElement(): HTMLElement {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  return root;
}

async function bootstrap(): Promise<void> {
  const client = new ApiClient("");
  const root = rootElement();
  const cases = await client.listCases();
  root.innerHTML =
    `<h1>Clinical scenario simulator</h1><ul class="cases">` +
    cases
      .map(
        (c) =>
          `<li><button class="start-case" data-case="${escapeHtml(c.case_id)}">` +
          `${escapeHtml(c.title)}: ${escapeHtml(c.chief_complaint)}</button></li>`,
      )
      .join("") +
    `</ul>`;
  root.addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest<HTMLElement>(".start-case");
    if (button?.dataset.case) void startSession(client, button.dataset.case);
  });
}

async function startSession(client: ApiClient, caseId: string): Promise<void> {
  const summary = await client.createSession(caseId);
  const caseDoc = await client.getCase(caseId);
  const view = new SessionViewModel(summary.session_id);
  const root = rootElement();

  const redraw = () => {
    root.innerHTML =
      `<header><h1>${escapeHtml(caseDoc.title)}</h1>` +
      `<p class="complaint">${escapeHtml(caseDoc.chief_complaint)}</p></header>` +
      renderSessionView(view, caseDoc);
    wire(root, client, view, caseDoc, redraw);
  };

  await pollUpdates(client, view);
  redraw();
  const timer = setInterval(async () => {
    if (view.connection === "ended") {
      clearInterval(timer);
      return;
    }
    const appended = await pollUpdates(client, view);
    if (appended > 0 || view.connection !== "ok") redraw();
  }, POLL_INTERVAL_MS);
}

function wire(
  root: HTMLElement,
  client: ApiClient,
  view: SessionViewModel,
  caseDoc: CaseDocWire,
  redraw: () => void,
): void {
  const submit = async (input: string) => {
    if (view.pendingAction) return;
    view.pendingAction = true;
    redraw();
    try {
      if (view.tab === "feedback") {
        const data = await client.conclude(view.sessionId, input);
        view.report = data.report;
      } else {
        const entry = await client.postAction(view.sessionId, view.actionForTab(view.tab, input));
        view.applyEntries([entry]);
      }
      await pollUpdates(client, view);
    } finally {
      view.pendingAction = false;
      redraw();
    }
  };

  root.querySelectorAll<HTMLElement>(".tab").forEach((button) => {
    button.addEventListener("click", () => {
      view.tab = button.dataset.tab as Tab;
      if (!TABS.includes(view.tab)) view.tab = "patient_chat";
      redraw();
    });
  });
  root.querySelectorAll<HTMLElement>(".explain").forEach((button) => {
    button.addEventListener("click", () => {
      view.openDrawer(Number(button.dataset.seq));
      redraw();
    });
  });
  root.querySelector(".close-drawer")?.addEventListener("click", () => {
    view.closeDrawer();
    redraw();
  });
  root.querySelectorAll<HTMLElement>(".catalog-item").forEach((button) => {
    button.addEventListener("click", () => void submit(button.dataset.target ?? ""));
  });
  root.querySelector<HTMLFormElement>("form.say")?.addEventListener("submit", (event) => {
    event.preventDefault();
    const field = (event.target as HTMLFormElement).elements.namedItem("text") as HTMLInputElement;
    void submit(field.value);
    field.value = "";
  });
  root.querySelector<HTMLFormElement>("form.conclude")?.addEventListener("submit", (event) => {
    event.preventDefault();
    const select = (event.target as HTMLFormElement).elements.namedItem(
      "diagnosis",
    ) as HTMLSelectElement;
    void submit(select.value);
  });
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void bootstrap();
}

export { bootstrap, startSession, DashboardViewModel, renderDashboard };
