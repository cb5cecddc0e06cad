// Wire types mirroring the server's JSON envelopes. Field names are the
// contract; the UI renders them verbatim and never invents content.

export type AgentId =
  | "patient"
  | "physical_exam"
  | "diagnostic"
  | "intervention"
  | "evaluation"
  | "supervisor";

export type ActionKindWire =
  | "ask_patient"
  | "request_exam"
  | "order_test"
  | "intervene"
  | "ask_supervisor"
  | "request_explanation"
  | "end_case";

export interface WireEnvelope<T> {
  ok: boolean;
  data?: T;
  error?: { code: string; message: string; details: unknown };
}

export interface ContributionWire {
  feature: string;
  weight: number;
}

export interface ExplanationWire {
  decision_id: string;
  agent_id: AgentId;
  kind: string;
  reason_codes: string[];
  contributions: ContributionWire[];
  rule_ids: string[];
  narrative: string;
  elapsed: number;
}

export interface ResponseWire {
  agent_id: AgentId;
  content: string;
  revealed_findings: string[];
  explanation: ExplanationWire;
}

export interface ActionWire {
  kind: ActionKindWire;
  text?: string;
  target?: string;
  issued_at?: string;
}

export interface RouteWire {
  routed_to: AgentId;
  reason: string;
  rule_id: string;
}

export interface LogEntryWire {
  seq: number;
  action: ActionWire | null;
  route: RouteWire;
  response: ResponseWire;
}

export interface ItemScoreWire {
  item_id: string;
  satisfied: number;
  required: number;
  fraction: number;
  weighted_points: number;
}

export interface KeyFactorWire {
  item_id: string;
  direction: "strength" | "improvement";
  evidence: string[];
}

export interface ReportWire {
  session_id: string;
  item_scores: ItemScoreWire[];
  total_score: number;
  key_factors: KeyFactorWire[];
  narrative: string;
  explanation: ExplanationWire;
}

export interface CaseSummaryWire {
  case_id: string;
  title: string;
  chief_complaint: string;
  differential: string[];
}

export interface CatalogItemWire {
  label: string;
  [key: string]: unknown;
}

export interface CaseDocWire {
  case_id: string;
  title: string;
  chief_complaint: string;
  differential: string[];
  exam_findings: Record<string, { exam_id: string; label: string }>;
  test_catalog: Record<string, { test_id: string; modality: string; label: string }>;
  intervention_protocol: Array<{ intervention_id: string; label: string }>;
  rubric: Array<{ item_id: string; description: string; weight: number }>;
}

export interface SessionSummaryWire {
  session_id: string;
  case_id: string;
  state: string;
  entries: number;
  submitted_diagnosis: string | null;
  total_score: number | null;
}

export interface DecisionRowWire {
  seq: number;
  decision_id: string;
  agent_id: AgentId;
  trigger: ActionWire | null;
  reason_codes: string[];
  rule_ids: string[];
  elapsed: number;
}

export interface DashboardWire {
  session: SessionSummaryWire;
  decisions: DecisionRowWire[];
  report: ReportWire | null;
  item_explanations: ExplanationWire[] | null;
}
