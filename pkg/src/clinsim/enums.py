"""Closed vocabularies shared by the case model, agents, and supervisor."""

from __future__ import annotations

from enum import Enum


class AgentId(str, Enum):
    """The six simulated agents."""

    PATIENT = "patient"
    PHYSICAL_EXAM = "physical_exam"
    DIAGNOSTIC = "diagnostic"
    INTERVENTION = "intervention"
    EVALUATION = "evaluation"
    SUPERVISOR = "supervisor"


class ActionKind(str, Enum):
    """Everything a student can do during a session."""

    ASK_PATIENT = "ask_patient"
    REQUEST_EXAM = "request_exam"
    ORDER_TEST = "order_test"
    INTERVENE = "intervene"
    ASK_SUPERVISOR = "ask_supervisor"
    REQUEST_EXPLANATION = "request_explanation"
    END_CASE = "end_case"


class ExplanationKind(str, Enum):
    """One explanation style per agent; see the persona registry."""

    INTERACTION_HISTORY = "interaction_history"
    PROCEDURAL = "procedural"
    TEST_UTILITY = "test_utility"
    GUIDELINE_RATIONALE = "guideline_rationale"
    RUBRIC_BASED = "rubric_based"
    SCENARIO_FLOW = "scenario_flow"


class MatcherKind(str, Enum):
    """How a rubric item recognizes a required event in the log."""

    ACTION_OF_KIND = "action_of_kind"
    PATIENT_QUESTION_CONTAINING = "patient_question_containing"
    FINDING_OBSERVED = "finding_observed"
    DIAGNOSIS_SUBMITTED = "diagnosis_submitted"


class Modality(str, Enum):
    LABORATORY = "laboratory"
    IMAGING = "imaging"
    PROCEDURE = "procedure"


class RubricCategory(str, Enum):
    HISTORY = "history"
    EXAM = "exam"
    DIAGNOSTICS = "diagnostics"
    INTERVENTION = "intervention"
    COMMUNICATION = "communication"


class SessionState(str, Enum):
    CREATED = "created"
    ACTIVE = "active"
    CONCLUDED = "concluded"
    EVALUATED = "evaluated"


# Legal lifecycle edges; anything else is a bug.
SESSION_TRANSITIONS = {
    SessionState.CREATED: {SessionState.ACTIVE},
    SessionState.ACTIVE: {SessionState.CONCLUDED},
    SessionState.CONCLUDED: {SessionState.EVALUATED},
    SessionState.EVALUATED: set(),
}
