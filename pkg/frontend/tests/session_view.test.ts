import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { pollUpdates } from "../src/poller.js";
import { SessionViewModel, TABS } from "../src/session_view.js";
import type { LogEntryWire } from "../src/types.js";

function entry(seq: number, overrides: Partial<LogEntryWire> = {}): LogEntryWire {
  return {
    seq,
    action: { kind: "ask_patient", text: `q${seq}` },
    route: { routed_to: "patient", reason: "r", rule_id: "route.ask_patient" },
    response: {
      agent_id: "patient",
      content: `answer ${seq}`,
      revealed_findings: [],
      explanation: {
        decision_id: `d-${seq}`,
        agent_id: "patient",
        kind: "interaction_history",
        reason_codes: ["matched:x"],
        contributions: [],
        rule_ids: ["chief_pain"],
        narrative: "",
        elapsed: 0,
      },
    },
    ...overrides,
  };
}

function fetchStub(handler: (url: string) => unknown) {
  return async (url: string): Promise<Response> => {
    const body = handler(url);
    return new Response(JSON.stringify(body), {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  };
}

describe("SessionViewModel.applyEntries", () => {
  it("appends strictly in seq order", () => {
    const view = new SessionViewModel("s1");
    const added = view.applyEntries([entry(2), entry(1), entry(3)]);
    expect(added).toBe(3);
    expect(view.entries.map((e) => e.seq)).toEqual([1, 2, 3]);
  });

  it("is idempotent on duplicate polls", () => {
    const view = new SessionViewModel("s1");
    view.applyEntries([entry(1), entry(2)]);
    const added = view.applyEntries([entry(1), entry(2)]);
    expect(added).toBe(0);
    expect(view.entries).toHaveLength(2);
  });

  it("appends nothing when there are no new entries", () => {
    const view = new SessionViewModel("s1");
    view.applyEntries([entry(1)]);
    expect(view.applyEntries([])).toBe(0);
    expect(view.entries).toHaveLength(1);
  });

  it("waits for contiguous entries rather than skipping a gap", () => {
    const view = new SessionViewModel("s1");
    view.applyEntries([entry(1)]);
    expect(view.applyEntries([entry(3)])).toBe(0);
    expect(view.lastSeq).toBe(1);
  });
});

describe("tab action mapping", () => {
  it("maps each tab to its action kind", () => {
    const view = new SessionViewModel("s1");
    expect(view.actionForTab("patient_chat", "hi")).toEqual({ kind: "ask_patient", text: "hi" });
    expect(view.actionForTab("physical_exam", "vitals")).toEqual({
      kind: "request_exam",
      target: "vitals",
    });
    expect(view.actionForTab("labs", "ekg")).toEqual({ kind: "order_test", target: "ekg" });
    expect(view.actionForTab("intervention", "aspirin")).toEqual({
      kind: "intervene",
      target: "aspirin",
    });
    expect(view.actionForTab("supervisor", "help")).toEqual({
      kind: "ask_supervisor",
      text: "help",
    });
    expect(view.actionForTab("feedback", "gerd")).toEqual({ kind: "end_case", target: "gerd" });
  });

  it("defines all six tabs", () => {
    expect(TABS).toHaveLength(6);
  });
});

describe("explanation drawer", () => {
  it("shows the selected entry's record verbatim and closes", () => {
    const view = new SessionViewModel("s1");
    view.applyEntries([entry(1), entry(2)]);
    view.openDrawer(2);
    expect(view.drawerExplanation()).toEqual(view.entries[1]!.response.explanation);
    view.closeDrawer();
    expect(view.drawerExplanation()).toBeNull();
  });

  it("ignores unknown seqs", () => {
    const view = new SessionViewModel("s1");
    view.openDrawer(99);
    expect(view.drawerExplanation()).toBeNull();
  });
});

describe("pollUpdates", () => {
  it("requests entries after lastSeq and appends them", async () => {
    const requested: string[] = [];
    const client = new ApiClient(
      "http://test",
      fetchStub((url) => {
        requested.push(url);
        return { ok: true, data: [entry(1), entry(2)] };
      }),
    );
    const view = new SessionViewModel("s1");
    const added = await pollUpdates(client, view);
    expect(added).toBe(2);
    expect(requested[0]).toBe("http://test/sessions/s1/log?since=0");
    expect(view.connection).toBe("ok");
  });

  it("marks the session ended on 404", async () => {
    const client = new ApiClient("http://test", async () =>
      new Response(JSON.stringify({ ok: false, error: { code: "unknown_session", message: "x", details: null } }), {
        status: 404,
      }),
    );
    const view = new SessionViewModel("gone");
    expect(await pollUpdates(client, view)).toBe(0);
    expect(view.connection).toBe("ended");
  });

  it("flips into retry on network failure without touching entries", async () => {
    const client = new ApiClient("http://test", async () => {
      throw new Error("connection refused");
    });
    const view = new SessionViewModel("s1");
    view.applyEntries([entry(1)]);
    expect(await pollUpdates(client, view)).toBe(0);
    expect(view.connection).toBe("retry");
    expect(view.entries).toHaveLength(1);
  });
});

describe("ApiClient envelopes", () => {
  it("unwraps ok envelopes", async () => {
    const client = new ApiClient(
      "http://test",
      fetchStub(() => ({ ok: true, data: [{ case_id: "c", title: "t", chief_complaint: "x", differential: [] }] })),
    );
    const cases = await client.listCases();
    expect(cases[0]!.case_id).toBe("c");
  });

  it("raises ApiError with the server code", async () => {
    const client = new ApiClient("http://test", async () =>
      new Response(JSON.stringify({ ok: false, error: { code: "session_not_active", message: "nope", details: null } }), {
        status: 409,
      }),
    );
    await expect(client.postAction("s", { kind: "ask_patient", text: "hi" })).rejects.toMatchObject({
      status: 409,
      code: "session_not_active",
    });
    expect(new ApiError(500, "x", "y")).toBeInstanceOf(Error);
  });
});
