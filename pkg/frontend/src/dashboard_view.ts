// Educator dashboard: one row per logged decision, plus the report panel.

import type { DashboardWire, DecisionRowWire, ReportWire } from "./types.js";

export class DashboardViewModel {
  constructor(private readonly view: DashboardWire) {}

  /** Decision rows, ordered by seq, one per server log entry. */
  get rows(): DecisionRowWire[] {
    return [...this.view.decisions].sort((a, b) => a.seq - b.seq);
  }

  get rowCount(): number {
    return this.view.decisions.length;
  }

  get report(): ReportWire | null {
    return this.view.report;
  }

  get sessionState(): string {
    return this.view.session.state;
  }

  /** Human-readable trigger cell: the action kind plus its payload. */
  triggerLabel(row: DecisionRowWire): string {
    if (row.trigger === null) return "(system)";
    const payload = row.trigger.text ?? row.trigger.target ?? "";
    return payload ? `${row.trigger.kind}: ${payload}` : row.trigger.kind;
  }
}
