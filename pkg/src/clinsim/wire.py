"""JSON wire forms for every record the service or CLI emits.

Field names are part of the contract (the UI renders them verbatim), and
``canonical_json`` gives byte-stable output for exports and replay checks.
"""

from __future__ import annotations

import json
from typing import Any

from .agent_core import AgentResponse, ExplanationRecord
from .errors import MalformedAction
from .evaluation import FeedbackReport
from .supervisor import LogEntry, RouteDecision, StudentAction, make_action

#: Fields whose values are wall-clock measurements, excluded from replay equality.
VOLATILE_FIELDS = frozenset({"issued_at", "started_at", "ended_at", "elapsed"})


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def explanation_to_wire(record: ExplanationRecord) -> dict:
    return {
        "decision_id": record.decision_id,
        "agent_id": record.agent_id.value,
        "kind": record.kind.value,
        "reason_codes": list(record.reason_codes),
        "contributions": [
            {"feature": c.feature, "weight": c.weight} for c in record.contributions
        ],
        "rule_ids": list(record.rule_ids),
        "narrative": record.narrative,
        "elapsed": record.elapsed,
    }


def response_to_wire(response: AgentResponse) -> dict:
    return {
        "agent_id": response.agent_id.value,
        "content": response.content,
        "revealed_findings": list(response.revealed_findings),
        "explanation": explanation_to_wire(response.explanation),
    }


def action_to_wire(action: StudentAction) -> dict:
    doc: dict = {"kind": action.kind.value}
    if action.text is not None:
        doc["text"] = action.text
    if action.target is not None:
        doc["target"] = action.target
    doc["issued_at"] = action.issued_at
    return doc


def action_from_wire(doc: Any) -> StudentAction:
    if not isinstance(doc, dict):
        raise MalformedAction("action must be an object", field="$")
    kind = doc.get("kind")
    if not isinstance(kind, str):
        raise MalformedAction("missing or non-string 'kind'", field="kind")
    text = doc.get("text")
    if text is not None and not isinstance(text, str):
        raise MalformedAction("'text' must be a string", field="text")
    target = doc.get("target")
    if target is not None and not isinstance(target, str):
        raise MalformedAction("'target' must be a string", field="target")
    issued_at = doc.get("issued_at")
    if issued_at is not None and not isinstance(issued_at, str):
        raise MalformedAction("'issued_at' must be a string", field="issued_at")
    return make_action(kind, text=text, target=target, issued_at=issued_at)


def route_to_wire(route: RouteDecision) -> dict:
    return {
        "routed_to": route.routed_to.value,
        "reason": route.reason,
        "rule_id": route.rule_id,
    }


def log_entry_to_wire(entry: LogEntry) -> dict:
    return {
        "seq": entry.seq,
        "action": action_to_wire(entry.action) if entry.action is not None else None,
        "route": route_to_wire(entry.route),
        "response": response_to_wire(entry.response),
    }


def report_to_wire(report: FeedbackReport) -> dict:
    return {
        "session_id": report.session_id,
        "item_scores": [
            {
                "item_id": s.item_id,
                "satisfied": s.satisfied,
                "required": s.required,
                "fraction": s.fraction,
                "weighted_points": s.weighted_points,
            }
            for s in report.item_scores
        ],
        "total_score": report.total_score,
        "key_factors": [
            {
                "item_id": f.item_id,
                "direction": f.direction,
                "evidence": list(f.evidence),
            }
            for f in report.key_factors
        ],
        "narrative": report.narrative,
        "explanation": explanation_to_wire(report.explanation),
    }


def strip_volatile(payload: Any) -> Any:
    """Recursively drop wall-clock fields; used by replay equality checks."""
    if isinstance(payload, dict):
        return {
            k: strip_volatile(v) for k, v in payload.items() if k not in VOLATILE_FIELDS
        }
    if isinstance(payload, list):
        return [strip_volatile(v) for v in payload]
    return payload


def envelope_ok(data: Any) -> dict:
    return {"ok": True, "data": data}


def envelope_error(code: str, message: str, details: Any = None) -> dict:
    return {"ok": False, "error": {"code": code, "message": message, "details": details}}
