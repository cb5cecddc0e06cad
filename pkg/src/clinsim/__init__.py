"""Multi-agent clinical scenario simulator with explained decisions.

Six rule-based agents (patient, physical exam, diagnostic, intervention,
evaluation, supervisor) run scripted clinical encounters; every decision
carries a structured explanation record. A companion toolkit lints the
persona/story/requirement corpus that motivated the system.
"""

from importlib import resources

from .agent_core import (
    AgentPersona,
    AgentRegistry,
    AgentResponse,
    Contribution,
    ExplanationRecord,
    GuardResult,
    build_agent_registry,
    format_persona_card,
    guard_disclosure,
)
from .case_model import (
    ClinicalCase,
    Diagnostic,
    EventMatcher,
    load_case,
    parse_case,
    serialize_case,
    validate_case,
)
from .clinical_agents import (
    DiseaseScore,
    ObservationSet,
    apply_intervention,
    exam_perform,
    explain_diagnosis,
    order_test,
    patient_reply,
    score_evidence,
)
from .evaluation import FeedbackReport, explain_evaluation, score_transcript
from .re_toolkit import (
    Corpus,
    load_corpus,
    parse_user_story,
    prioritize_stories,
    render_user_story,
    validate_traceability,
)
from .supervisor import LogEntry, Session, SessionManager, StudentAction, make_action

__version__ = "0.1.0"


def data_path(*parts: str):
    """Path to a bundled data file (reference case, scripts, RE corpus)."""
    return resources.files("clinsim").joinpath("data", *parts)
