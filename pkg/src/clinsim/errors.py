"""Exception hierarchy shared across the simulator.

Every error carries a machine-readable ``code`` so service responses and
logged error entries can name what went wrong without parsing prose.
"""

from __future__ import annotations


class ClinSimError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str, **details: object):
        super().__init__(message)
        self.message = message
        self.details = details


class CaseParseError(ClinSimError):
    """Malformed case document (syntax, shape, or structural invariant)."""

    code = "case_parse_error"

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        super().__init__(message, path=path, line=line)
        self.path = path
        self.line = line

    def __str__(self) -> str:
        where = self.path if self.path else (f"line {self.line}" if self.line else None)
        return f"{self.message} (at {where})" if where else self.message


class CaseReferenceError(CaseParseError):
    """A case document references an id that is not defined anywhere."""

    code = "case_reference_error"


class InvalidCaseError(ClinSimError):
    """A parsed case failed validation; carries the full diagnostic list."""

    code = "invalid_case"

    def __init__(self, case_id: str, diagnostics):
        super().__init__(f"case {case_id!r} failed validation with {len(diagnostics)} error(s)")
        self.case_id = case_id
        self.diagnostics = list(diagnostics)


class UnknownCase(ClinSimError):
    code = "unknown_case"


class UnknownExam(ClinSimError):
    code = "unknown_exam"


class UnknownTest(ClinSimError):
    code = "unknown_test"


class UnknownIntervention(ClinSimError):
    code = "unknown_intervention"


class UnknownDisease(ClinSimError):
    code = "unknown_disease"


class UnknownAgent(ClinSimError):
    code = "unknown_agent"


class UnknownItem(ClinSimError):
    code = "unknown_item"


class UnknownSession(ClinSimError):
    code = "unknown_session"


class SessionNotActive(ClinSimError):
    code = "session_not_active"


class MalformedAction(ClinSimError):
    """An action document is structurally invalid; names the offending field."""

    code = "malformed_action"

    def __init__(self, message: str, *, field: str):
        super().__init__(message, field=field)
        self.field = field


class StoryParseError(ClinSimError):
    """A user story sentence does not fit the story grammar."""

    code = "story_parse_error"

    def __init__(self, message: str, *, slot: str):
        super().__init__(message, slot=slot)
        self.slot = slot


class UnknownPersona(ClinSimError):
    code = "unknown_persona"
