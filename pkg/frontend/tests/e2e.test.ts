// End-to-end acceptance against a live server: spawns `clinsim serve` and
// drives the real HTTP API through the view models.

import { spawn, type ChildProcess } from "node:child_process";
import { createServer } from "node:net";
import { fileURLToPath } from "node:url";
import path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { DashboardViewModel } from "../src/dashboard_view.js";
import { pollUpdates } from "../src/poller.js";
import { renderDashboard, renderSessionView } from "../src/render.js";
import { SessionViewModel, TABS, type Tab } from "../src/session_view.js";
import type { CaseDocWire } from "../src/types.js";

const REPO_ROOT = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..", "..");
const CASES_DIR = path.join(REPO_ROOT, "src", "clinsim", "data", "cases");

let server: ChildProcess;
let baseUrl: string;

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

beforeAll(async () => {
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  server = spawn(
    "python3",
    ["-m", "clinsim.cli", "serve", "--port", String(port), "--cases", CASES_DIR],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  const stderr: string[] = [];
  server.stderr?.on("data", (chunk) => stderr.push(String(chunk)));
  for (let attempt = 0; attempt < 100; attempt += 1) {
    try {
      const response = await fetch(`${baseUrl}/cases`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    if (server.exitCode !== null) {
      throw new Error(`server exited early: ${stderr.join("")}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error(`server never became ready: ${stderr.join("")}`);
}, 30_000);

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("end-to-end UI session against a live service", () => {
  it("runs the full student flow with all six tabs functional", async () => {
    const client = new ApiClient(baseUrl);

    const cases = await client.listCases();
    expect(cases.map((c) => c.case_id)).toContain("chestpain-01");
    const caseDoc: CaseDocWire = await client.getCase("chestpain-01");

    const summary = await client.createSession("chestpain-01");
    const view = new SessionViewModel(summary.session_id);
    await pollUpdates(client, view);
    expect(view.lastSeq).toBe(1); // init entry

    const act = async (tab: Tab, input: string) => {
      view.tab = tab;
      view.pendingAction = true;
      const entry = await client.postAction(view.sessionId, view.actionForTab(tab, input));
      view.applyEntries([entry]);
      view.pendingAction = false;
      return entry;
    };

    // ask 2 questions
    await act("patient_chat", "Where does it hurt?");
    await act("patient_chat", "When did the pain start?");
    expect(view.visibleEntries("patient_chat")).toHaveLength(2);

    // perform the vitals exam
    const vitals = await act("physical_exam", "vitals");
    expect(vitals.response.content).toContain("mmHg");

    // order EKG and troponin
    await act("labs", "ekg");
    const troponin = await act("labs", "troponin");
    expect(view.visibleEntries("labs")).toHaveLength(2);

    // open one explanation drawer: content equals the server record field-for-field
    view.openDrawer(troponin.seq);
    const drawer = view.drawerExplanation();
    const serverRecords = await client.getExplanations(view.sessionId);
    const serverRecord = serverRecords.find((r) => r.decision_id === drawer?.decision_id);
    expect(drawer).toEqual(serverRecord);
    expect(renderSessionView(view, caseDoc)).toContain(
      `data-decision-id="${drawer?.decision_id}"`,
    );

    // a supervisor check-in and an intervention, so every tab has traffic
    await act("supervisor", "How am I doing?");
    await act("intervention", "antacid_trial");

    // conclude from the feedback tab and view the report
    view.tab = "feedback";
    const concluded = await client.conclude(view.sessionId, "gerd");
    view.report = concluded.report;
    await pollUpdates(client, view);
    expect(concluded.state).toBe("evaluated");

    // all six tabs render against the live log without inventing entries
    const serverLog = await client.getLog(view.sessionId, 0);
    expect(view.entries).toEqual(serverLog);
    for (const tab of TABS) {
      view.tab = tab;
      const html = renderSessionView(view, caseDoc);
      expect(html).toContain(`data-active-tab="${tab}"`);
      for (const entry of view.visibleEntries(tab)) {
        expect(html).toContain(`data-seq="${entry.seq}"`);
      }
    }

    // feedback tab shows every rubric item exactly once with its fraction
    view.tab = "feedback";
    const feedbackHtml = renderSessionView(view, caseDoc);
    for (const item of concluded.report.item_scores) {
      expect(feedbackHtml.match(new RegExp(`data-item="${item.item_id}"`, "g"))).toHaveLength(1);
    }
    expect(feedbackHtml).toContain("Total score");
  }, 30_000);

  it("educator dashboard row count equals the server log length", async () => {
    const client = new ApiClient(baseUrl);
    const summary = await client.createSession("chestpain-01");
    const view = new SessionViewModel(summary.session_id);
    await client.postAction(view.sessionId, { kind: "ask_patient", text: "Where does it hurt?" });
    await client.postAction(view.sessionId, { kind: "order_test", target: "troponin" });
    await client.conclude(view.sessionId, "gerd");

    const log = await client.getLog(view.sessionId, 0);
    const dashboard = new DashboardViewModel(await client.getDashboard(view.sessionId));
    expect(dashboard.rowCount).toBe(log.length);
    expect(dashboard.sessionState).toBe("evaluated");
    const html = renderDashboard(dashboard, await client.getCase("chestpain-01"));
    expect(html.match(/<tr data-seq=/g)).toHaveLength(log.length);
  }, 30_000);

  it("poller reports ended for vanished sessions", async () => {
    const client = new ApiClient(baseUrl);
    const view = new SessionViewModel("never-existed");
    await pollUpdates(client, view);
    expect(view.connection).toBe("ended");
  });
});
