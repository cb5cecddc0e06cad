"""Session lifecycle and action routing.

The supervisor owns the append-only interaction log and the state machine
(created -> active -> concluded -> evaluated). Routing is structural: the
action variant alone decides which agent answers, so there is no intent
guessing anywhere. Agent-level failures (unknown exam id, etc.) become
error-response log entries explained by the supervisor; they never corrupt
the log or the session state.

Sessions run concurrently; within one session every mutation happens under
the session lock, in arrival order.
"""

from __future__ import annotations

import dataclasses
import threading
import uuid
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import evaluation
from .agent_core import (
    AgentRegistry,
    AgentResponse,
    Contribution,
    DialogueBackend,
    ExplanationRecord,
    ScriptBackend,
    build_agent_registry,
    guarded_content,
)
from .case_model import ClinicalCase, validate_case
from .clinical_agents import (
    ObservationSet,
    apply_intervention,
    exam_perform,
    explain_diagnosis,
    order_test,
    patient_reply,
    score_evidence,
)
from .enums import SESSION_TRANSITIONS, ActionKind, AgentId, ExplanationKind, SessionState
from .errors import (
    ClinSimError,
    InvalidCaseError,
    MalformedAction,
    SessionNotActive,
    UnknownAgent,
    UnknownCase,
    UnknownDisease,
)

#: Structural routing table; request_explanation resolves to the named agent.
ROUTING_TABLE: dict[ActionKind, AgentId] = {
    ActionKind.ASK_PATIENT: AgentId.PATIENT,
    ActionKind.REQUEST_EXAM: AgentId.PHYSICAL_EXAM,
    ActionKind.ORDER_TEST: AgentId.DIAGNOSTIC,
    ActionKind.INTERVENE: AgentId.INTERVENTION,
    ActionKind.ASK_SUPERVISOR: AgentId.SUPERVISOR,
    ActionKind.END_CASE: AgentId.EVALUATION,
}

_TEXT_ACTIONS = {ActionKind.ASK_PATIENT, ActionKind.ASK_SUPERVISOR}
_TARGET_ACTIONS = {
    ActionKind.REQUEST_EXAM,
    ActionKind.ORDER_TEST,
    ActionKind.INTERVENE,
    ActionKind.REQUEST_EXPLANATION,
    ActionKind.END_CASE,
}


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass(frozen=True)
class StudentAction:
    kind: ActionKind
    text: str | None = None
    target: str | None = None
    issued_at: str = ""


def make_action(kind: ActionKind | str, *, text: str | None = None, target: str | None = None,
                issued_at: str | None = None) -> StudentAction:
    """Build a validated action; raises MalformedAction naming the bad field."""
    try:
        kind = ActionKind(kind)
    except ValueError:
        raise MalformedAction(f"unknown action kind {kind!r}", field="kind") from None
    if kind in _TEXT_ACTIONS:
        if not isinstance(text, str):
            raise MalformedAction(f"{kind.value} requires a string 'text'", field="text")
        if target is not None:
            raise MalformedAction(f"{kind.value} does not take a 'target'", field="target")
    elif kind in _TARGET_ACTIONS:
        if not isinstance(target, str) or not target:
            raise MalformedAction(f"{kind.value} requires a non-empty 'target'", field="target")
        if text is not None:
            raise MalformedAction(f"{kind.value} does not take a 'text'", field="text")
    return StudentAction(kind=kind, text=text, target=target, issued_at=issued_at or now_iso())


@dataclass(frozen=True)
class RouteDecision:
    routed_to: AgentId
    reason: str
    rule_id: str


@dataclass(frozen=True)
class LogEntry:
    seq: int
    action: StudentAction | None  # None for system entries (init, report)
    route: RouteDecision
    response: AgentResponse


@dataclass
class Session:
    session_id: str
    case: ClinicalCase
    registry: AgentRegistry
    state: SessionState = SessionState.CREATED
    observations: ObservationSet = field(default_factory=ObservationSet)
    log: list[LogEntry] = field(default_factory=list)
    started_at: str = ""
    ended_at: str | None = None
    report: "evaluation.FeedbackReport | None" = None
    submitted_diagnosis: str | None = None
    state_history: list[SessionState] = field(default_factory=list)
    lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    @property
    def case_id(self) -> str:
        return self.case.case_id

    def log_snapshot(self) -> tuple[LogEntry, ...]:
        with self.lock:
            return tuple(self.log)

    def _transition(self, new_state: SessionState) -> None:
        if new_state not in SESSION_TRANSITIONS[self.state]:
            raise SessionNotActive(
                f"illegal transition {self.state.value} -> {new_state.value}"
            )
        self.state = new_state
        self.state_history.append(new_state)

    def _append(self, action: StudentAction | None, route: RouteDecision,
                response: AgentResponse) -> LogEntry:
        entry = LogEntry(seq=len(self.log) + 1, action=action, route=route, response=response)
        self.log.append(entry)
        return entry


class SessionManager:
    """Creates sessions over a case library and drives them to evaluation."""

    def __init__(self, cases: dict[str, ClinicalCase], backend: DialogueBackend | None = None):
        self.cases = dict(cases)
        self.backend = backend or ScriptBackend()

    # -- lifecycle ---------------------------------------------------------

    def start_session(self, case_id: str, session_id: str | None = None) -> Session:
        case = self.cases.get(case_id)
        if case is None:
            raise UnknownCase(f"unknown case {case_id!r}", case_id=case_id)
        errors = [d for d in validate_case(case) if d.severity == "error"]
        if errors:
            raise InvalidCaseError(case_id, errors)

        session = Session(
            session_id=session_id or f"s-{uuid.uuid4().hex[:12]}",
            case=case,
            registry=build_agent_registry(case),
            started_at=now_iso(),
        )
        session.state_history.append(SessionState.CREATED)
        session._transition(SessionState.ACTIVE)

        decision_id = session.observations.allocate_decision_id()
        explanation = ExplanationRecord(
            decision_id=decision_id,
            agent_id=AgentId.SUPERVISOR,
            kind=ExplanationKind.SCENARIO_FLOW,
            reason_codes=("session_started", f"case:{case.case_id}", "agents_ready:6"),
            rule_ids=("route.init",),
            narrative="All six agents initialized from the case knowledge base; session is active.",
        )
        response = AgentResponse(
            agent_id=AgentId.SUPERVISOR,
            content=guarded_content(
                f"Case started: {case.title}. Interview the patient, examine, order tests, "
                "intervene as indicated, then conclude with a diagnosis.",
                case,
            ),
            revealed_findings=(),
            explanation=explanation,
        )
        session._append(
            None,
            RouteDecision(
                routed_to=AgentId.SUPERVISOR,
                reason="session initialization",
                rule_id="route.init",
            ),
            response,
        )
        return session

    # -- routing -----------------------------------------------------------

    def route_action(self, session: Session, action: StudentAction) -> LogEntry:
        """Dispatch one action, append exactly one log entry, return it.

        end_case additionally appends the report entry and moves the session
        to evaluated before returning the conclusion entry.
        """
        with session.lock:
            if session.state is not SessionState.ACTIVE:
                raise SessionNotActive(
                    f"session {session.session_id} is {session.state.value}, not active"
                )
            if action.kind is ActionKind.END_CASE:
                return self._conclude(session, action)

            route = self._route_for(session, action)
            try:
                response = self._dispatch(session, action, route.routed_to)
            except ClinSimError as e:
                response = self._error_response(session, action, e)
            return session._append(action, route, response)

    def _route_for(self, session: Session, action: StudentAction) -> RouteDecision:
        if action.kind is ActionKind.REQUEST_EXPLANATION:
            agent_id, _ = _split_explanation_target(action.target or "")
            try:
                routed = AgentId(agent_id)
            except ValueError:
                routed = AgentId.SUPERVISOR  # unknown agent: supervisor explains the error
            return RouteDecision(
                routed_to=routed,
                reason=f"explanation requests go to the named agent ({routed.value})",
                rule_id="route.request_explanation",
            )
        routed = ROUTING_TABLE[action.kind]
        return RouteDecision(
            routed_to=routed,
            reason=f"{action.kind.value} actions are handled by the {routed.value} agent",
            rule_id=f"route.{action.kind.value}",
        )

    def _dispatch(self, session: Session, action: StudentAction, routed_to: AgentId) -> AgentResponse:
        case = session.case
        if action.kind is ActionKind.ASK_PATIENT:
            history = tuple(
                e.action.text or ""
                for e in session.log
                if e.action is not None and e.action.kind is ActionKind.ASK_PATIENT
            )
            return patient_reply(
                case,
                session.observations,
                action.text or "",
                history=history,
                backend=self.backend,
                persona=session.registry.get(AgentId.PATIENT),
            )
        if action.kind is ActionKind.REQUEST_EXAM:
            return exam_perform(case, session.observations, action.target or "")
        if action.kind is ActionKind.ORDER_TEST:
            return order_test(case, session.observations, action.target or "")
        if action.kind is ActionKind.INTERVENE:
            return apply_intervention(case, session.observations, action.target or "")
        if action.kind is ActionKind.ASK_SUPERVISOR:
            return self.supervisor_reply(session, action.text or "")
        return self._explain(session, action.target or "")

    # -- supervisor voice ----------------------------------------------------

    def supervisor_reply(self, session: Session, text: str) -> AgentResponse:
        """Case-progression summary: action counts, findings coverage, phase hint."""
        case = session.case
        counts = Counter(
            e.action.kind for e in session.log if e.action is not None
        )
        total = len(case.discoverable_findings())
        gathered = len(session.observations)
        phase = _phase_hint(counts)

        reason_codes = tuple(f"count:{k.value}:{counts.get(k, 0)}" for k in ActionKind)
        reason_codes += (f"findings_observed:{gathered}", f"findings_total:{total}", f"phase:{phase}")
        narrative = (
            f"{sum(counts.values())} action(s) so far; {gathered} of {total} discoverable "
            f"findings observed. Suggested focus: {phase}."
        )
        explanation = ExplanationRecord(
            decision_id=session.observations.allocate_decision_id(),
            agent_id=AgentId.SUPERVISOR,
            kind=ExplanationKind.SCENARIO_FLOW,
            reason_codes=reason_codes,
            rule_ids=("progression_summary",),
            narrative=narrative,
        )
        content = (
            f"You have taken {sum(counts.values())} action(s): "
            f"{counts.get(ActionKind.ASK_PATIENT, 0)} patient question(s), "
            f"{counts.get(ActionKind.REQUEST_EXAM, 0)} exam(s), "
            f"{counts.get(ActionKind.ORDER_TEST, 0)} test(s), "
            f"{counts.get(ActionKind.INTERVENE, 0)} intervention(s). "
            f"Findings observed: {gathered} of {total}. Consider focusing on: {phase}."
        )
        return AgentResponse(
            agent_id=AgentId.SUPERVISOR,
            content=guarded_content(content, case),
            revealed_findings=(),
            explanation=explanation,
        )

    # -- explanation requests -------------------------------------------------

    def _explain(self, session: Session, target: str) -> AgentResponse:
        agent_name, qualifier = _split_explanation_target(target)
        try:
            agent_id = AgentId(agent_name)
        except ValueError:
            raise UnknownAgent(f"unknown agent {agent_name!r}", agent=agent_name) from None

        case = session.case
        obs = session.observations
        if agent_id is AgentId.DIAGNOSTIC:
            if qualifier:
                record = explain_diagnosis(case, obs, qualifier)
                record = dataclasses.replace(record, decision_id=obs.allocate_decision_id())
                content = (
                    f"Evidence review for '{qualifier}': "
                    f"{len(record.contributions)} weighted contribution(s); see explanation."
                )
            else:
                scores = score_evidence(case, obs)
                record = ExplanationRecord(
                    decision_id=obs.allocate_decision_id(),
                    agent_id=AgentId.DIAGNOSTIC,
                    kind=ExplanationKind.TEST_UTILITY,
                    reason_codes=tuple(
                        f"rank{i + 1}:{s.disease}:{s.status}" for i, s in enumerate(scores)
                    ),
                    contributions=tuple(
                        Contribution(feature=s.disease, weight=s.score) for s in scores
                    ),
                    rule_ids=("evidence_ranking",),
                    narrative="Current differential ranking by accumulated evidence weight.",
                )
                content = "Current ranking: " + ", ".join(
                    f"{s.disease} ({s.status})" for s in scores
                )
        elif agent_id is AgentId.PATIENT:
            questions = [
                e for e in session.log
                if e.action is not None and e.action.kind is ActionKind.ASK_PATIENT
            ]
            matched = tuple(
                dict.fromkeys(
                    rid for e in questions for rid in e.response.explanation.rule_ids
                )
            )
            record = ExplanationRecord(
                decision_id=obs.allocate_decision_id(),
                agent_id=AgentId.PATIENT,
                kind=ExplanationKind.INTERACTION_HISTORY,
                reason_codes=(f"questions_asked:{len(questions)}",),
                rule_ids=matched or ("no_questions_yet",),
                narrative=f"{len(questions)} question(s) asked; {len(matched)} script entr(ies) matched so far.",
            )
            content = f"We have covered {len(questions)} question(s) so far."
        elif agent_id is AgentId.PHYSICAL_EXAM:
            performed = tuple(
                dict.fromkeys(
                    e.action.target
                    for e in session.log
                    if e.action is not None
                    and e.action.kind is ActionKind.REQUEST_EXAM
                    and e.response.agent_id is AgentId.PHYSICAL_EXAM
                )
            )
            record = ExplanationRecord(
                decision_id=obs.allocate_decision_id(),
                agent_id=AgentId.PHYSICAL_EXAM,
                kind=ExplanationKind.PROCEDURAL,
                reason_codes=tuple(f"performed:{x}" for x in performed) or ("no_exams_performed",),
                rule_ids=performed or ("none",),
                narrative=f"{len(performed)} exam(s) performed out of {len(case.exam_findings)} available.",
            )
            content = f"Exams performed: {', '.join(performed) if performed else 'none yet'}."
        elif agent_id is AgentId.INTERVENTION:
            attempted = tuple(
                dict.fromkeys(
                    e.action.target
                    for e in session.log
                    if e.action is not None
                    and e.action.kind is ActionKind.INTERVENE
                    and e.response.agent_id is AgentId.INTERVENTION
                )
            )
            record = ExplanationRecord(
                decision_id=obs.allocate_decision_id(),
                agent_id=AgentId.INTERVENTION,
                kind=ExplanationKind.GUIDELINE_RATIONALE,
                reason_codes=tuple(f"attempted:{x}" for x in attempted)
                or ("no_interventions_attempted",),
                rule_ids=attempted or ("none",),
                narrative=f"{len(attempted)} intervention(s) attempted out of {len(case.intervention_protocol)} in protocol.",
            )
            content = f"Interventions attempted: {', '.join(attempted) if attempted else 'none yet'}."
        elif agent_id is AgentId.EVALUATION:
            record = ExplanationRecord(
                decision_id=obs.allocate_decision_id(),
                agent_id=AgentId.EVALUATION,
                kind=ExplanationKind.RUBRIC_BASED,
                reason_codes=("not_evaluated_yet", f"rubric_items:{len(case.rubric)}"),
                rule_ids=tuple(item.item_id for item in case.rubric),
                narrative="The rubric is applied when the case concludes; no report exists yet.",
            )
            content = (
                f"Evaluation happens at conclusion; the rubric has {len(case.rubric)} item(s)."
            )
        else:  # supervisor
            return self.supervisor_reply(session, "explain")
        return AgentResponse(
            agent_id=agent_id,
            content=guarded_content(content, case),
            revealed_findings=(),
            explanation=record,
        )

    # -- errors ---------------------------------------------------------------

    def _error_response(self, session: Session, action: StudentAction, error: ClinSimError) -> AgentResponse:
        explanation = ExplanationRecord(
            decision_id=session.observations.allocate_decision_id(),
            agent_id=AgentId.SUPERVISOR,
            kind=ExplanationKind.SCENARIO_FLOW,
            reason_codes=(f"error:{error.code}", f"action:{action.kind.value}"),
            rule_ids=("route.error_wrap",),
            narrative=f"The {action.kind.value} action failed: {error.message}. The session continues.",
        )
        return AgentResponse(
            agent_id=AgentId.SUPERVISOR,
            content=guarded_content(f"That did not work: {error.message}.", session.case),
            revealed_findings=(),
            explanation=explanation,
        )

    # -- conclusion -------------------------------------------------------------

    def conclude_session(self, session: Session, submitted_diagnosis: str) -> Session:
        """Conclude and evaluate; returns the same session, now 'evaluated'."""
        self.route_action(
            session, make_action(ActionKind.END_CASE, target=submitted_diagnosis)
        )
        return session

    def _conclude(self, session: Session, action: StudentAction) -> LogEntry:
        case = session.case
        diagnosis = action.target or ""
        if diagnosis not in case.differential:
            raise UnknownDisease(
                f"unknown disease {diagnosis!r}: not in differential", disease=diagnosis
            )
        session.submitted_diagnosis = diagnosis
        decision_id = session.observations.allocate_decision_id()
        conclusion = session._append(
            action,
            RouteDecision(
                routed_to=AgentId.EVALUATION,
                reason="end_case hands the transcript to the evaluation agent",
                rule_id="route.end_case",
            ),
            AgentResponse(
                agent_id=AgentId.EVALUATION,
                content=guarded_content(
                    "Final diagnosis submitted. Scoring the transcript against the rubric.", case
                ),
                revealed_findings=(),
                explanation=ExplanationRecord(
                    decision_id=decision_id,
                    agent_id=AgentId.EVALUATION,
                    kind=ExplanationKind.RUBRIC_BASED,
                    reason_codes=("diagnosis_submitted",),
                    rule_ids=("route.end_case",),
                    narrative="Conclusion recorded; the rubric will be applied to the full log.",
                ),
            ),
        )
        session._transition(SessionState.CONCLUDED)
        session.ended_at = now_iso()

        report = evaluation.score_transcript(
            case, tuple(session.log), session_id=session.session_id,
            narrative_backend=self.backend,
        )
        session.report = report
        session._append(
            None,
            RouteDecision(
                routed_to=AgentId.EVALUATION,
                reason="feedback report generation",
                rule_id="route.report",
            ),
            AgentResponse(
                agent_id=AgentId.EVALUATION,
                content=guarded_content(report.narrative, case),
                revealed_findings=(),
                explanation=report.explanation,
            ),
        )
        session._transition(SessionState.EVALUATED)
        return conclusion


def _split_explanation_target(target: str) -> tuple[str, str | None]:
    if ":" in target:
        agent, qualifier = target.split(":", 1)
        return agent, qualifier or None
    return target, None


def _phase_hint(counts: Counter) -> str:
    if counts.get(ActionKind.ASK_PATIENT, 0) == 0:
        return "history"
    if counts.get(ActionKind.REQUEST_EXAM, 0) == 0:
        return "exam"
    if counts.get(ActionKind.ORDER_TEST, 0) == 0:
        return "tests"
    if counts.get(ActionKind.INTERVENE, 0) == 0:
        return "intervention"
    return "conclude"
