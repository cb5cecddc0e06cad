"""Decision procedures for the five clinical agents.

All operations are deterministic functions of (case, observations) plus the
student input. The only mutable piece is the ObservationSet, which grows
append-only as the patient script, exams, and tests reveal findings.

Evidence scoring is additive over signed per-(disease, finding) weights and
uses exact summation (math.fsum), so a score always equals the sum of its
listed contributions regardless of listing order.
"""

from __future__ import annotations

import math
import re
import time
from dataclasses import dataclass

from .agent_core import (
    DECISION_TRIGGERS,
    DEFAULT_DISPLAY_NAMES,
    EXPLAINABILITY_PROFILES,
    AgentPersona,
    AgentResponse,
    Contribution,
    DialogueBackend,
    ExplanationRecord,
    ScriptBackend,
    guarded_content,
)
from .case_model import ClinicalCase, DiseaseId, FindingId, SymptomScriptEntry
from .enums import AgentId, ExplanationKind
from .errors import UnknownDisease, UnknownExam, UnknownIntervention, UnknownTest

_WORD_RE = re.compile(r"[a-z0-9']+")

FALLBACK_UTTERANCE = "I'm not sure what you're asking, doctor. Could you put it another way?"


def _tokens(text: str) -> frozenset[str]:
    return frozenset(_WORD_RE.findall(text.lower()))


class ObservationSet:
    """Findings accumulated in one session, with provenance per finding.

    Append-only: findings are never removed, and the first decision that
    revealed a finding keeps the provenance slot. Also hands out the
    session-scoped decision ids so replays reproduce them exactly.
    """

    def __init__(self) -> None:
        self._findings: dict[FindingId, str] = {}  # insertion-ordered
        self._decision_counter = 0

    def allocate_decision_id(self) -> str:
        self._decision_counter += 1
        return f"d-{self._decision_counter:04d}"

    def add(self, findings, decision_id: str) -> tuple[FindingId, ...]:
        """Record findings; returns only the ones that are new."""
        fresh = []
        for f in findings:
            if f not in self._findings:
                self._findings[f] = decision_id
                fresh.append(f)
        return tuple(fresh)

    def provenance(self, finding: FindingId) -> str | None:
        return self._findings.get(finding)

    def __contains__(self, finding: FindingId) -> bool:
        return finding in self._findings

    def __iter__(self):
        return iter(self._findings)

    def __len__(self) -> int:
        return len(self._findings)

    def as_set(self) -> frozenset[FindingId]:
        return frozenset(self._findings)


@dataclass(frozen=True)
class ScoreContribution:
    finding: FindingId
    weight: float


@dataclass(frozen=True)
class DiseaseScore:
    disease: DiseaseId
    score: float
    contributions: tuple[ScoreContribution, ...]
    status: str  # "candidate" | "ruled_out"


def _elapsed_ms(t0: int) -> int:
    return max(0, (time.perf_counter_ns() - t0) // 1_000_000)


# ---------------------------------------------------------------------------
# patient agent
# ---------------------------------------------------------------------------


def match_script_entry(case: ClinicalCase, question: str) -> tuple[SymptomScriptEntry | None, frozenset[str]]:
    """Pick the script entry with the largest keyword overlap.

    Ties break toward file order; zero overlap means no match.
    """
    tokens = _tokens(question)
    best: SymptomScriptEntry | None = None
    best_overlap: frozenset[str] = frozenset()
    for entry in case.symptom_script:
        overlap = entry.keywords & tokens
        if len(overlap) > len(best_overlap):
            best, best_overlap = entry, overlap
    return best, best_overlap


def patient_reply(
    case: ClinicalCase,
    observations: ObservationSet,
    question: str,
    history: tuple[str, ...] = (),
    backend: DialogueBackend | None = None,
    persona: AgentPersona | None = None,
) -> AgentResponse:
    """Answer a history question from the symptom script.

    ``history`` holds the previously asked questions so the explanation can
    cite repeats. Unmatched questions get a fixed fallback utterance.
    """
    t0 = time.perf_counter_ns()
    backend = backend or ScriptBackend()
    decision_id = observations.allocate_decision_id()
    entry, overlap = match_script_entry(case, question)

    if entry is None:
        explanation = ExplanationRecord(
            decision_id=decision_id,
            agent_id=AgentId.PATIENT,
            kind=ExplanationKind.INTERACTION_HISTORY,
            reason_codes=("no_script_match",),
            narrative="No scripted symptom matched the question, so the patient asked for a rephrase.",
            elapsed=_elapsed_ms(t0),
        )
        return AgentResponse(
            agent_id=AgentId.PATIENT,
            content=guarded_content(FALLBACK_UTTERANCE, case),
            revealed_findings=(),
            explanation=explanation,
        )

    repeats = sum(1 for q in history if match_script_entry(case, q)[0] is entry)
    reason_codes = tuple(f"matched:{kw}" for kw in sorted(overlap))
    if repeats:
        reason_codes += (f"previously_asked:{repeats}",)

    text = backend.render(
        persona_or_default(persona, AgentId.PATIENT),
        {"case_id": case.case_id, "question": question, "entry_id": entry.entry_id},
        entry.response_text,
    )
    content = guarded_content(text, case)
    new = observations.add(entry.reveals, decision_id)
    explanation = ExplanationRecord(
        decision_id=decision_id,
        agent_id=AgentId.PATIENT,
        kind=ExplanationKind.INTERACTION_HISTORY,
        reason_codes=reason_codes,
        rule_ids=(entry.entry_id,),
        narrative=(
            f"Matched script entry '{entry.entry_id}' on keyword(s) {', '.join(sorted(overlap))}"
            + (f"; a related question was asked {repeats} time(s) before." if repeats else ".")
        ),
        elapsed=_elapsed_ms(t0),
    )
    return AgentResponse(
        agent_id=AgentId.PATIENT,
        content=content,
        revealed_findings=new,
        explanation=explanation,
    )


def persona_or_default(persona: AgentPersona | None, agent_id: AgentId) -> AgentPersona:
    if persona is not None:
        return persona
    return AgentPersona(
        agent_id=agent_id,
        display_name=DEFAULT_DISPLAY_NAMES[agent_id],
        goal="",
        model_descriptor="",
        knowledge_base_refs=(),
        decision_triggers=DECISION_TRIGGERS[agent_id],
        explainability_profile=EXPLAINABILITY_PROFILES[agent_id],
    )


# ---------------------------------------------------------------------------
# physical exam agent
# ---------------------------------------------------------------------------


def exam_perform(case: ClinicalCase, observations: ObservationSet, exam_id: str) -> AgentResponse:
    t0 = time.perf_counter_ns()
    exam = case.exam_findings.get(exam_id)
    if exam is None:
        raise UnknownExam(f"unknown exam {exam_id!r}", exam_id=exam_id)
    decision_id = observations.allocate_decision_id()
    new = observations.add(exam.finding_ids, decision_id)

    content = exam.result_text
    if exam.vitals:
        content += "\n" + "; ".join(f"{name}: {v.value} {v.unit}" for name, v in exam.vitals)
    explanation = ExplanationRecord(
        decision_id=decision_id,
        agent_id=AgentId.PHYSICAL_EXAM,
        kind=ExplanationKind.PROCEDURAL,
        reason_codes=tuple(f"covers:{f}" for f in exam.finding_ids) or ("covers:none",),
        rule_ids=(exam.exam_id,),
        narrative=f"{exam.label} performed; it reports on {len(exam.finding_ids)} finding(s).",
        elapsed=_elapsed_ms(t0),
    )
    return AgentResponse(
        agent_id=AgentId.PHYSICAL_EXAM,
        content=guarded_content(content, case),
        revealed_findings=new,
        explanation=explanation,
    )


# ---------------------------------------------------------------------------
# diagnostic agent
# ---------------------------------------------------------------------------


def _test_relevance(case: ClinicalCase, finding_ids) -> list[tuple[DiseaseId, float]]:
    """Net signed weight each disease gains from a test's findings, ranked by |total|."""
    totals = []
    for disease in case.differential:
        weights = [w for f in finding_ids if (w := case.weight(disease, f)) is not None]
        if weights:
            totals.append((disease, math.fsum(weights)))
    totals.sort(key=lambda dw: (-abs(dw[1]), dw[0]))
    return totals


def order_test(case: ClinicalCase, observations: ObservationSet, test_id: str) -> AgentResponse:
    t0 = time.perf_counter_ns()
    test = case.test_catalog.get(test_id)
    if test is None:
        raise UnknownTest(f"unknown test {test_id!r}", test_id=test_id)
    decision_id = observations.allocate_decision_id()
    new = observations.add(test.finding_ids, decision_id)

    relevance = _test_relevance(case, test.finding_ids)
    explanation = ExplanationRecord(
        decision_id=decision_id,
        agent_id=AgentId.DIAGNOSTIC,
        kind=ExplanationKind.TEST_UTILITY,
        reason_codes=tuple(f"informs:{d}" for d, _ in relevance) or ("informs:none",),
        contributions=tuple(Contribution(feature=d, weight=w) for d, w in relevance),
        rule_ids=(test.test_id,),
        narrative=(
            f"{test.label} ({test.modality.value}) resulted immediately; its findings "
            f"carry evidence weight for {len(relevance)} disease(s) on the differential."
        ),
        elapsed=_elapsed_ms(t0),
    )
    return AgentResponse(
        agent_id=AgentId.DIAGNOSTIC,
        content=guarded_content(test.result_text, case),
        revealed_findings=new,
        explanation=explanation,
    )


def score_evidence(case: ClinicalCase, observations) -> list[DiseaseScore]:
    """Additive evidence score per differential disease.

    score(d) = exact sum of weight(d, f) over observed findings with links.
    Sorted by score descending, ties by disease id ascending. Pure.
    """
    observed = sorted(set(observations))
    scores = []
    for disease in case.differential:
        contributions = tuple(
            ScoreContribution(finding=f, weight=w)
            for f in observed
            if (w := case.weight(disease, f)) is not None
        )
        score = math.fsum(c.weight for c in contributions)
        scores.append(
            DiseaseScore(
                disease=disease,
                score=score,
                contributions=contributions,
                status="ruled_out" if score < case.rule_out_threshold else "candidate",
            )
        )
    scores.sort(key=lambda s: (-s.score, s.disease))
    return scores


def explain_diagnosis(case: ClinicalCase, observations, disease: DiseaseId) -> ExplanationRecord:
    """Feature-importance record for one disease: contributions by |weight|."""
    if disease not in case.differential:
        raise UnknownDisease(f"unknown disease {disease!r}", disease=disease)
    by_disease = {s.disease: s for s in score_evidence(case, observations)}
    score = by_disease[disease]
    ranked = sorted(score.contributions, key=lambda c: (-abs(c.weight), c.finding))

    if not ranked:
        reason_codes: tuple[str, ...] = ("no_evidence_observed",)
    else:
        reason_codes = (f"status:{score.status}",) + tuple(
            f"{'negative' if c.weight < 0 else 'positive'}:{c.finding}" for c in ranked
        )
    return ExplanationRecord(
        decision_id=f"dx-{disease}",
        agent_id=AgentId.DIAGNOSTIC,
        kind=ExplanationKind.TEST_UTILITY,
        reason_codes=reason_codes,
        contributions=tuple(Contribution(feature=c.finding, weight=c.weight) for c in ranked),
        rule_ids=(disease,),
        narrative=(
            f"Evidence total {score.score:+.3f} for '{disease}' ({score.status}); "
            f"{sum(1 for c in ranked if c.weight < 0)} negative and "
            f"{sum(1 for c in ranked if c.weight > 0)} positive contribution(s)."
        ),
    )


# ---------------------------------------------------------------------------
# intervention agent
# ---------------------------------------------------------------------------


def apply_intervention(
    case: ClinicalCase, observations: ObservationSet, intervention_id: str
) -> AgentResponse:
    """Safety check first, then indication check, else 'not indicated yet'."""
    t0 = time.perf_counter_ns()
    rule = case.intervention(intervention_id)
    if rule is None:
        raise UnknownIntervention(
            f"unknown intervention {intervention_id!r}", intervention_id=intervention_id
        )
    decision_id = observations.allocate_decision_id()
    observed = observations.as_set()

    flagged = sorted(rule.contraindicated_if & observed)
    if flagged:
        explanation = ExplanationRecord(
            decision_id=decision_id,
            agent_id=AgentId.INTERVENTION,
            kind=ExplanationKind.GUIDELINE_RATIONALE,
            reason_codes=(rule.reason_code,) + tuple(f"contraindicated_by:{f}" for f in flagged),
            rule_ids=(rule.intervention_id,),
            narrative=f"Safety flag: {rule.label} is contraindicated by {len(flagged)} observed finding(s).",
            elapsed=_elapsed_ms(t0),
        )
        content = (
            f"Safety flag: {rule.label} was not carried out: "
            f"contraindicated by {', '.join(flagged)}."
        )
    elif rule.indicated_if <= observed:
        explanation = ExplanationRecord(
            decision_id=decision_id,
            agent_id=AgentId.INTERVENTION,
            kind=ExplanationKind.GUIDELINE_RATIONALE,
            reason_codes=tuple(f"indicated_by:{f}" for f in sorted(rule.indicated_if))
            or ("indicated_unconditionally",),
            rule_ids=(rule.intervention_id,),
            narrative=f"{rule.label} is indicated by the protocol; outcome reported.",
            elapsed=_elapsed_ms(t0),
        )
        content = rule.outcome_text
    else:
        missing = sorted(rule.indicated_if - observed)
        explanation = ExplanationRecord(
            decision_id=decision_id,
            agent_id=AgentId.INTERVENTION,
            kind=ExplanationKind.GUIDELINE_RATIONALE,
            reason_codes=tuple(f"missing:{f}" for f in missing),
            rule_ids=(rule.intervention_id,),
            narrative=f"{rule.label} is not indicated yet: {len(missing)} required finding(s) not observed.",
            elapsed=_elapsed_ms(t0),
        )
        content = (
            f"{rule.label} is not indicated yet. Required findings not yet observed: "
            f"{', '.join(missing)}."
        )
    return AgentResponse(
        agent_id=AgentId.INTERVENTION,
        content=guarded_content(content, case),
        revealed_findings=(),
        explanation=explanation,
    )
