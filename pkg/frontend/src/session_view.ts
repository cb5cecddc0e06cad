// Client-side session state: the server log (verbatim), the active tab,
// the single in-flight action flag, and the explanation drawer.
//
// The tab decides the action kind, so there is no intent guessing: whatever
// the student types or clicks on a tab maps structurally to one action.

import type { ActionWire, AgentId, ExplanationWire, LogEntryWire, ReportWire } from "./types.js";

export const TABS = [
  "patient_chat",
  "physical_exam",
  "labs",
  "intervention",
  "supervisor",
  "feedback",
] as const;

export type Tab = (typeof TABS)[number];

// Which agent's entries a tab displays (entries are filtered by route).
export const TAB_AGENT: Record<Tab, AgentId> = {
  patient_chat: "patient",
  physical_exam: "physical_exam",
  labs: "diagnostic",
  intervention: "intervention",
  supervisor: "supervisor",
  feedback: "evaluation",
};

export type ConnectionState = "ok" | "retry" | "ended";

export class SessionViewModel {
  readonly entries: LogEntryWire[] = [];
  tab: Tab = "patient_chat";
  pendingAction = false;
  drawerSeq: number | null = null;
  connection: ConnectionState = "ok";
  report: ReportWire | null = null;

  constructor(readonly sessionId: string) {}

  get lastSeq(): number {
    const last = this.entries[this.entries.length - 1];
    return last ? last.seq : 0;
  }

  /**
   * Append server entries strictly in seq order. Entries already applied
   * are ignored, so polling the same range twice never duplicates rows.
   * Returns how many entries were appended.
   */
  applyEntries(incoming: LogEntryWire[]): number {
    const sorted = [...incoming].sort((a, b) => a.seq - b.seq);
    let appended = 0;
    for (const entry of sorted) {
      if (entry.seq <= this.lastSeq) continue; // duplicate poll
      if (entry.seq !== this.lastSeq + 1) break; // gap: wait for the next poll
      this.entries.push(entry);
      appended += 1;
    }
    return appended;
  }

  /** Entries shown on a tab: exactly the server entries routed to its agent. */
  visibleEntries(tab: Tab): LogEntryWire[] {
    return this.entries.filter((e) => e.route.routed_to === TAB_AGENT[tab]);
  }

  openDrawer(seq: number): void {
    if (this.entries.some((e) => e.seq === seq)) this.drawerSeq = seq;
  }

  closeDrawer(): void {
    this.drawerSeq = null;
  }

  /** The ExplanationRecord shown in the drawer, verbatim from the server. */
  drawerExplanation(): ExplanationWire | null {
    if (this.drawerSeq === null) return null;
    const entry = this.entries.find((e) => e.seq === this.drawerSeq);
    return entry ? entry.response.explanation : null;
  }

  /** Map a tab plus user input to the one action kind that tab can send. */
  actionForTab(tab: Tab, input: string): ActionWire {
    switch (tab) {
      case "patient_chat":
        return { kind: "ask_patient", text: input };
      case "physical_exam":
        return { kind: "request_exam", target: input };
      case "labs":
        return { kind: "order_test", target: input };
      case "intervention":
        return { kind: "intervene", target: input };
      case "supervisor":
        return { kind: "ask_supervisor", text: input };
      case "feedback":
        return { kind: "end_case", target: input };
    }
  }
}
