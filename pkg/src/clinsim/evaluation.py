"""Rubric scoring over the interaction log and feedback report generation.

Scoring is purely rule-based and referentially transparent: the same
(case, log) always produces a byte-identical serialized report. A dialogue
backend may polish the narrative prose, never the numbers; scores and key
factors come only from matcher hits in the log.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

from .agent_core import Contribution, DialogueBackend, ExplanationRecord
from .case_model import ClinicalCase, EventMatcher
from .clinical_agents import persona_or_default
from .enums import ActionKind, AgentId, ExplanationKind, MatcherKind
from .errors import UnknownItem

if TYPE_CHECKING:  # pragma: no cover
    from .supervisor import LogEntry


def _entry_failed(entry: "LogEntry") -> bool:
    # error-wrapped entries carry an "error:<code>" reason code first
    codes = entry.response.explanation.reason_codes
    return bool(codes) and codes[0].startswith("error:")


def matcher_matches(matcher: EventMatcher, entry: "LogEntry") -> bool:
    """Does one log entry satisfy one required event?"""
    action = entry.action
    if matcher.kind is MatcherKind.ACTION_OF_KIND:
        if action is None or action.kind is not matcher.action or _entry_failed(entry):
            return False
        return matcher.target is None or action.target == matcher.target
    if matcher.kind is MatcherKind.PATIENT_QUESTION_CONTAINING:
        if action is None or action.kind is not ActionKind.ASK_PATIENT:
            return False
        text = (action.text or "").lower()
        return any(k in text for k in matcher.keywords)
    if matcher.kind is MatcherKind.FINDING_OBSERVED:
        return matcher.finding in entry.response.revealed_findings
    # diagnosis_submitted
    return (
        action is not None
        and action.kind is ActionKind.END_CASE
        and action.target == matcher.disease
    )


def matched_decision_ids(matcher: EventMatcher, log: Sequence["LogEntry"]) -> tuple[str, ...]:
    return tuple(
        e.response.explanation.decision_id for e in log if matcher_matches(matcher, e)
    )


@dataclass(frozen=True)
class EventDetail:
    """Where (if anywhere) one required event matched."""

    description: str
    decision_ids: tuple[str, ...]

    @property
    def matched(self) -> bool:
        return bool(self.decision_ids)


@dataclass(frozen=True)
class ItemScore:
    item_id: str
    satisfied: int
    required: int
    fraction: float
    weighted_points: float


@dataclass(frozen=True)
class KeyFactor:
    item_id: str
    direction: str  # "strength" | "improvement"
    evidence: tuple[str, ...]  # decision ids


@dataclass(frozen=True)
class FeedbackReport:
    session_id: str
    item_scores: tuple[ItemScore, ...]
    total_score: float
    key_factors: tuple[KeyFactor, ...]
    narrative: str
    explanation: ExplanationRecord
    event_details: tuple[tuple[str, tuple[EventDetail, ...]], ...] = ()

    def item(self, item_id: str) -> ItemScore:
        for score in self.item_scores:
            if score.item_id == item_id:
                return score
        raise UnknownItem(f"unknown rubric item {item_id!r}", item_id=item_id)


def score_transcript(
    case: ClinicalCase,
    log: Sequence["LogEntry"],
    *,
    session_id: str = "",
    narrative_backend: DialogueBackend | None = None,
) -> FeedbackReport:
    """Score every rubric item against the log and pick the key factors.

    fraction(item) = matched required events / total required events;
    total = sum(weight * fraction) / sum(weight). Top-3 fully-met items by
    weight are strengths, top-3 unmet/partial items are improvements
    (ties by item_id ascending).
    """
    log = tuple(log)
    details: list[tuple[str, tuple[EventDetail, ...]]] = []
    item_scores: list[ItemScore] = []
    for item in case.rubric:
        event_details = tuple(
            EventDetail(description=m.describe(), decision_ids=matched_decision_ids(m, log))
            for m in item.required_events
        )
        satisfied = sum(1 for d in event_details if d.matched)
        required = len(item.required_events)
        fraction = satisfied / required if required else 0.0
        item_scores.append(
            ItemScore(
                item_id=item.item_id,
                satisfied=satisfied,
                required=required,
                fraction=fraction,
                weighted_points=item.weight * fraction,
            )
        )
        details.append((item.item_id, event_details))

    total_weight = math.fsum(item.weight for item in case.rubric)
    total = math.fsum(s.weighted_points for s in item_scores) / total_weight if total_weight else 0.0

    weight_of = {item.item_id: item.weight for item in case.rubric}
    fully_met = [s for s in item_scores if s.fraction == 1.0]
    unmet = [s for s in item_scores if s.fraction < 1.0]
    evidence_of = {
        item_id: tuple(
            dict.fromkeys(did for d in event_details for did in d.decision_ids)
        )
        for item_id, event_details in details
    }
    rank = lambda scores: sorted(scores, key=lambda s: (-weight_of[s.item_id], s.item_id))[:3]
    key_factors = tuple(
        KeyFactor(item_id=s.item_id, direction="strength", evidence=evidence_of[s.item_id])
        for s in rank(fully_met)
    ) + tuple(
        KeyFactor(item_id=s.item_id, direction="improvement", evidence=evidence_of[s.item_id])
        for s in rank(unmet)
    )

    description_of = {item.item_id: item.description for item in case.rubric}
    narrative = _narrative(item_scores, total, key_factors, description_of, empty=not log)
    if narrative_backend is not None:
        narrative = narrative_backend.render(
            persona_or_default(None, AgentId.EVALUATION),
            {"session_id": session_id, "total_score": total},
            narrative,
        )

    reason_codes = tuple(f"item:{s.item_id}:{s.satisfied}/{s.required}" for s in item_scores)
    if not log:
        reason_codes = ("no_interaction",) + reason_codes
    explanation = ExplanationRecord(
        decision_id="eval-report",
        agent_id=AgentId.EVALUATION,
        kind=ExplanationKind.RUBRIC_BASED,
        reason_codes=reason_codes,
        contributions=tuple(
            Contribution(feature=s.item_id, weight=s.weighted_points) for s in item_scores
        ),
        rule_ids=tuple(s.item_id for s in item_scores),
        narrative=narrative,
        elapsed=0,  # synchronous rule evaluation; kept 0 so reports replay byte-identically
    )
    return FeedbackReport(
        session_id=session_id,
        item_scores=tuple(item_scores),
        total_score=total,
        key_factors=key_factors,
        narrative=narrative,
        explanation=explanation,
        event_details=tuple(details),
    )


def _narrative(
    item_scores: Iterable[ItemScore],
    total: float,
    key_factors: tuple[KeyFactor, ...],
    description_of: dict[str, str],
    *,
    empty: bool,
) -> str:
    if empty:
        return "No interaction was recorded, so no rubric item could be credited."
    scores = list(item_scores)
    full = sum(1 for s in scores if s.fraction == 1.0)
    partial = sum(1 for s in scores if 0.0 < s.fraction < 1.0)
    parts = [f"Overall score {total:.2f}: {full} of {len(scores)} rubric item(s) fully met"]
    parts.append(f"{partial} partially met." if partial else "none partially met.")
    strengths = [f for f in key_factors if f.direction == "strength"]
    improvements = [f for f in key_factors if f.direction == "improvement"]
    if strengths:
        parts.append("Strengths: " + "; ".join(description_of[f.item_id] for f in strengths) + ".")
    if improvements:
        parts.append(
            "Focus areas: " + "; ".join(description_of[f.item_id] for f in improvements) + "."
        )
    return " ".join(parts)


def explain_evaluation(report: FeedbackReport, item_id: str) -> ExplanationRecord:
    """Per-item breakdown: each required event, matched or missing, with evidence."""
    for iid, event_details in report.event_details:
        if iid != item_id:
            continue
        score = report.item(item_id)
        reason_codes = tuple(
            (
                f"matched:{d.description}@{','.join(d.decision_ids)}"
                if d.matched
                else f"missing:{d.description}"
            )
            for d in event_details
        )
        return ExplanationRecord(
            decision_id=f"eval-{item_id}",
            agent_id=AgentId.EVALUATION,
            kind=ExplanationKind.RUBRIC_BASED,
            reason_codes=reason_codes,
            rule_ids=(item_id,),
            narrative=(
                f"{score.satisfied} of {score.required} required event(s) observed "
                f"(fraction {score.fraction:.2f})."
            ),
        )
    raise UnknownItem(f"unknown rubric item {item_id!r}", item_id=item_id)
