"""Shared agent contract: personas, explanation records, and the leak guard.

Every agent decision in the system is delivered as an AgentResponse, and an
AgentResponse cannot exist without an ExplanationRecord with content. That
structural rule, plus the disclosure guard on every piece of
player-visible text, is what makes the simulator explainable and safe by
construction rather than by convention.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

from .case_model import ClinicalCase, FindingId
from .enums import ActionKind, AgentId, ExplanationKind

#: The one explanation style each agent is allowed to emit.
EXPLAINABILITY_PROFILES: dict[AgentId, tuple[ExplanationKind, ...]] = {
    AgentId.PATIENT: (ExplanationKind.INTERACTION_HISTORY,),
    AgentId.PHYSICAL_EXAM: (ExplanationKind.PROCEDURAL,),
    AgentId.DIAGNOSTIC: (ExplanationKind.TEST_UTILITY,),
    AgentId.INTERVENTION: (ExplanationKind.GUIDELINE_RATIONALE,),
    AgentId.EVALUATION: (ExplanationKind.RUBRIC_BASED,),
    AgentId.SUPERVISOR: (ExplanationKind.SCENARIO_FLOW,),
}

#: Structural routing: the action kinds each agent answers for.
DECISION_TRIGGERS: dict[AgentId, tuple[ActionKind, ...]] = {
    AgentId.PATIENT: (ActionKind.ASK_PATIENT, ActionKind.REQUEST_EXPLANATION),
    AgentId.PHYSICAL_EXAM: (ActionKind.REQUEST_EXAM, ActionKind.REQUEST_EXPLANATION),
    AgentId.DIAGNOSTIC: (ActionKind.ORDER_TEST, ActionKind.REQUEST_EXPLANATION),
    AgentId.INTERVENTION: (ActionKind.INTERVENE, ActionKind.REQUEST_EXPLANATION),
    AgentId.EVALUATION: (ActionKind.END_CASE, ActionKind.REQUEST_EXPLANATION),
    AgentId.SUPERVISOR: (ActionKind.ASK_SUPERVISOR, ActionKind.REQUEST_EXPLANATION),
}

DEFAULT_DISPLAY_NAMES: dict[AgentId, str] = {
    AgentId.PATIENT: "Alex",
    AgentId.PHYSICAL_EXAM: "Dr. Eva",
    AgentId.DIAGNOSTIC: "Brian",
    AgentId.INTERVENTION: "Clair",
    AgentId.EVALUATION: "Dr. Eval",
    AgentId.SUPERVISOR: "Sam",
}

REDACTION = "[withheld]"


@dataclass(frozen=True)
class AgentPersona:
    agent_id: AgentId
    display_name: str
    goal: str
    model_descriptor: str
    knowledge_base_refs: tuple[str, ...]
    decision_triggers: tuple[ActionKind, ...]
    explainability_profile: tuple[ExplanationKind, ...]


@dataclass(frozen=True)
class Contribution:
    """One signed feature weight behind a decision."""

    feature: str
    weight: float


@dataclass(frozen=True)
class ExplanationRecord:
    decision_id: str
    agent_id: AgentId
    kind: ExplanationKind
    reason_codes: tuple[str, ...] = ()
    contributions: tuple[Contribution, ...] = ()
    rule_ids: tuple[str, ...] = ()
    narrative: str = ""
    elapsed: int = 0  # whole milliseconds

    def __post_init__(self):
        if not (self.reason_codes or self.contributions or self.rule_ids):
            raise ValueError("an explanation must have content (reason codes, contributions, or rule ids)")
        if self.elapsed < 0:
            raise ValueError("elapsed must be >= 0")
        if self.kind not in EXPLAINABILITY_PROFILES[self.agent_id]:
            raise ValueError(
                f"{self.agent_id.value} cannot emit {self.kind.value} explanations"
            )


@dataclass(frozen=True)
class AgentResponse:
    agent_id: AgentId
    content: str
    revealed_findings: tuple[FindingId, ...]
    explanation: ExplanationRecord

    def __post_init__(self):
        if not isinstance(self.explanation, ExplanationRecord):
            raise ValueError("a response without an explanation is not allowed")


# ---------------------------------------------------------------------------
# disclosure guard
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GuardViolation:
    term: str
    occurrences: int


@dataclass(frozen=True)
class GuardResult:
    passed: bool
    text: str
    violations: tuple[GuardViolation, ...] = ()


def guard_disclosure(text: str, forbidden_terms: list[str] | tuple[str, ...]) -> GuardResult:
    """Case-insensitive substring scan; redacts every hit.

    Terms are expected lowercased. Longer terms are redacted first so a term
    that is a substring of another is not double-counted.
    """
    redacted = text
    violations = []
    for term in sorted(set(forbidden_terms), key=lambda t: (-len(t), t)):
        if not term:
            continue
        pattern = re.compile(re.escape(term), re.IGNORECASE)
        redacted, count = pattern.subn(REDACTION, redacted)
        if count:
            violations.append(GuardViolation(term=term, occurrences=count))
    if not violations:
        return GuardResult(passed=True, text=text)
    violations.sort(key=lambda v: v.term)
    return GuardResult(passed=False, text=redacted, violations=tuple(violations))


def guarded_content(text: str, case: ClinicalCase) -> str:
    """The text as shown to the student: forbidden terms withheld."""
    return guard_disclosure(text, case.forbidden_terms).text


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AgentRegistry:
    case: ClinicalCase
    personas: tuple[tuple[AgentId, AgentPersona], ...]

    def get(self, agent_id: AgentId) -> AgentPersona:
        for aid, persona in self.personas:
            if aid is agent_id:
                return persona
        raise KeyError(agent_id)  # unreachable: registry always holds all six

    def __iter__(self):
        return iter(self.personas)


def build_agent_registry(
    case: ClinicalCase, display_names: dict[AgentId, str] | None = None
) -> AgentRegistry:
    """Wire the six personas to a case's knowledge base. Deterministic."""
    names = dict(DEFAULT_DISPLAY_NAMES)
    if display_names:
        names.update(display_names)
    kb = {
        AgentId.PATIENT: (
            f"case:{case.case_id}/symptom_script#{len(case.symptom_script)}",
            f"case:{case.case_id}/forbidden_terms#{len(case.forbidden_terms)}",
        ),
        AgentId.PHYSICAL_EXAM: (f"case:{case.case_id}/exam_findings#{len(case.exam_findings)}",),
        AgentId.DIAGNOSTIC: (
            f"case:{case.case_id}/test_catalog#{len(case.test_catalog)}",
            f"case:{case.case_id}/evidence_links#{len(case.evidence_links)}",
        ),
        AgentId.INTERVENTION: (
            f"case:{case.case_id}/intervention_protocol#{len(case.intervention_protocol)}",
        ),
        AgentId.EVALUATION: (
            f"case:{case.case_id}/rubric#{len(case.rubric)}",
            "session:interaction_log",
        ),
        AgentId.SUPERVISOR: ("session:interaction_log", "session:agent_status"),
    }
    goals = {
        AgentId.PATIENT: (
            "Answer history questions in character, revealing symptoms gradually "
            "while keeping the final diagnosis undisclosed until the case concludes."
        ),
        AgentId.PHYSICAL_EXAM: (
            "Return structured findings for requested physical examinations and "
            "note what each maneuver covers."
        ),
        AgentId.DIAGNOSTIC: (
            "Fulfill test orders with immediate results and keep a weighted "
            "evidence ledger over the differential."
        ),
        AgentId.INTERVENTION: (
            "Apply the treatment protocol, flag unsafe orders with reason codes, "
            "and report outcomes for indicated therapy."
        ),
        AgentId.EVALUATION: (
            "Score the finished transcript against the educator rubric and report "
            "the key factors behind every mark."
        ),
        AgentId.SUPERVISOR: (
            "Route every student action to the right agent, keep the session log, "
            "and summarize case progression on request."
        ),
    }
    models = {
        AgentId.PATIENT: "scripted symptom engine with keyword matching",
        AgentId.PHYSICAL_EXAM: "rule-based exam findings lookup",
        AgentId.DIAGNOSTIC: "additive signed-weight evidence scorer",
        AgentId.INTERVENTION: "guideline rule engine (indications and contraindications)",
        AgentId.EVALUATION: "deterministic rubric transcript scorer",
        AgentId.SUPERVISOR: "state-machine router over student actions",
    }
    personas = tuple(
        (
            agent_id,
            AgentPersona(
                agent_id=agent_id,
                display_name=names[agent_id],
                goal=goals[agent_id],
                model_descriptor=models[agent_id],
                knowledge_base_refs=kb[agent_id],
                decision_triggers=DECISION_TRIGGERS[agent_id],
                explainability_profile=EXPLAINABILITY_PROFILES[agent_id],
            ),
        )
        for agent_id in AgentId
    )
    return AgentRegistry(case=case, personas=personas)


_KIND_BLURBS = {
    ExplanationKind.INTERACTION_HISTORY: "interaction_history (which keywords matched, what was asked before)",
    ExplanationKind.PROCEDURAL: "procedural (what each exam covers and found)",
    ExplanationKind.TEST_UTILITY: "test_utility (signed evidence weights linking results to diseases)",
    ExplanationKind.GUIDELINE_RATIONALE: "guideline_rationale (which protocol rule fired and why)",
    ExplanationKind.RUBRIC_BASED: "rubric_based (per-item scores and the key factors behind them)",
    ExplanationKind.SCENARIO_FLOW: "scenario_flow (routing decisions and case progression)",
}


def format_persona_card(persona: AgentPersona) -> str:
    """Render the five-attribute persona card in a stable order."""
    lines = [
        f"# {persona.display_name} ({persona.agent_id.value} agent)",
        f"Goal: {persona.goal}",
        f"Model: {persona.model_descriptor}",
        "Knowledge Base: " + "; ".join(persona.knowledge_base_refs),
        "Decision Triggers: " + ", ".join(t.value for t in persona.decision_triggers),
        "Explainability: " + "; ".join(_KIND_BLURBS[k] for k in persona.explainability_profile),
    ]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# dialogue backend boundary
# ---------------------------------------------------------------------------


class DialogueBackend:
    """Renders candidate response text for a persona.

    The rule engines decide *what* happens (findings, scores, reason codes);
    a backend may only restyle the surface text. The disclosure guard runs on
    whatever comes back, so the non-leak property holds for any backend.
    """

    name = "base"

    def render(self, persona: AgentPersona, context: dict, default_text: str) -> str:
        raise NotImplementedError


class ScriptBackend(DialogueBackend):
    """Default backend: returns the scripted text unchanged. Pure."""

    name = "script"

    def render(self, persona: AgentPersona, context: dict, default_text: str) -> str:
        return default_text


class ExternalBackend(DialogueBackend):
    """Optional generative client; falls back to the scripted text on any failure."""

    name = "external"

    def __init__(self, url: str, timeout: float = 5.0):
        self.url = url
        self.timeout = timeout

    def render(self, persona: AgentPersona, context: dict, default_text: str) -> str:
        import httpx

        try:
            resp = httpx.post(
                self.url,
                json={
                    "agent_id": persona.agent_id.value,
                    "display_name": persona.display_name,
                    "goal": persona.goal,
                    "context": context,
                    "default_text": default_text,
                },
                timeout=self.timeout,
            )
            resp.raise_for_status()
            text = resp.json().get("text")
            return text if isinstance(text, str) and text.strip() else default_text
        except Exception:
            return default_text


def backend_from_env(env: dict | None = None) -> DialogueBackend:
    """Resolve CLINSIM_BACKEND: 'script' (default) or 'external:<url>'."""
    value = (env if env is not None else os.environ).get("CLINSIM_BACKEND", "script")
    if value == "script":
        return ScriptBackend()
    if value.startswith("external:"):
        return ExternalBackend(value.split(":", 1)[1])
    raise ValueError(f"unsupported CLINSIM_BACKEND value {value!r}")
