// Thin typed client over the session HTTP API. Every response is a
// WireEnvelope; non-ok envelopes become ApiError with the server's code.

import type {
  ActionWire,
  CaseDocWire,
  CaseSummaryWire,
  DashboardWire,
  ExplanationWire,
  LogEntryWire,
  ReportWire,
  SessionSummaryWire,
  WireEnvelope,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly details: unknown = null,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    let envelope: WireEnvelope<T>;
    try {
      envelope = (await response.json()) as WireEnvelope<T>;
    } catch {
      throw new ApiError(response.status, "bad_envelope", "response was not JSON");
    }
    if (!envelope.ok || envelope.data === undefined) {
      const err = envelope.error ?? { code: "unknown", message: "unknown error", details: null };
      throw new ApiError(response.status, err.code, err.message, err.details);
    }
    return envelope.data;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  listCases(): Promise<CaseSummaryWire[]> {
    return this.request("/cases");
  }

  getCase(caseId: string): Promise<CaseDocWire> {
    return this.request(`/cases/${caseId}`);
  }

  createSession(caseId: string): Promise<SessionSummaryWire> {
    return this.post("/sessions", { case_id: caseId });
  }

  postAction(sessionId: string, action: ActionWire): Promise<LogEntryWire> {
    return this.post(`/sessions/${sessionId}/actions`, action);
  }

  getLog(sessionId: string, since: number): Promise<LogEntryWire[]> {
    return this.request(`/sessions/${sessionId}/log?since=${since}`);
  }

  getExplanations(sessionId: string): Promise<ExplanationWire[]> {
    return this.request(`/sessions/${sessionId}/explanations`);
  }

  conclude(sessionId: string, diagnosis: string): Promise<SessionSummaryWire & { report: ReportWire }> {
    return this.post(`/sessions/${sessionId}/conclude`, { diagnosis });
  }

  getReport(sessionId: string): Promise<ReportWire> {
    return this.request(`/sessions/${sessionId}/report`);
  }

  getDashboard(sessionId: string, educatorToken?: string): Promise<DashboardWire> {
    const headers: Record<string, string> = {};
    if (educatorToken) headers["x-educator-token"] = educatorToken;
    return this.request(`/dashboard/sessions/${sessionId}`, { headers });
  }
}
