"""HTTP API for live sessions plus export/replay plumbing.

Every response body is a WireEnvelope: {"ok": true, "data": ...} or
{"ok": false, "error": {code, message, details}}. The session store is
in-memory; exports make sessions portable and replayable.

Error mapping: 404 unknown session/case, 409 wrong session state,
422 malformed or unresolvable input. Agent-level failures (say, an unknown
test id) are not HTTP errors: they come back 200 as logged error entries so
the UI can show the explanation.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import wire
from .agent_core import DialogueBackend, backend_from_env
from .case_model import ClinicalCase, case_to_doc, load_case
from .errors import (
    ClinSimError,
    InvalidCaseError,
    MalformedAction,
    SessionNotActive,
    UnknownCase,
    UnknownDisease,
    UnknownSession,
)
from .evaluation import explain_evaluation
from .supervisor import Session, SessionManager, make_action

EXPORT_FORMAT = 1


class SessionStore:
    """Cases plus live sessions; the one stateful object behind the API."""

    def __init__(self, cases: dict[str, ClinicalCase] | None = None,
                 backend: DialogueBackend | None = None):
        self.manager = SessionManager(cases or {}, backend=backend)
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    @property
    def cases(self) -> dict[str, ClinicalCase]:
        return self.manager.cases

    def add_case(self, case: ClinicalCase) -> None:
        self.manager.cases[case.case_id] = case

    def load_case_dir(self, directory: str | Path) -> list[str]:
        """Load every *.json case; returns warnings for files that fail."""
        warnings = []
        for path in sorted(Path(directory).glob("*.json")):
            try:
                self.add_case(load_case(path.read_text(encoding="utf-8")))
            except ClinSimError as e:
                warnings.append(f"{path.name}: {e}")
        return warnings

    def create_session(self, case_id: str, session_id: str | None = None) -> Session:
        session = self.manager.start_session(case_id, session_id=session_id)
        with self._lock:
            self.sessions[session.session_id] = session
        return session

    def get_session(self, session_id: str) -> Session:
        with self._lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"unknown session {session_id!r}", session_id=session_id)
        return session


def session_summary(session: Session) -> dict:
    log = session.log_snapshot()
    return {
        "session_id": session.session_id,
        "case_id": session.case_id,
        "state": session.state.value,
        "started_at": session.started_at,
        "ended_at": session.ended_at,
        "entries": len(log),
        "submitted_diagnosis": session.submitted_diagnosis,
        "total_score": session.report.total_score if session.report else None,
    }


def export_session(store: SessionStore, session_id: str) -> dict:
    """Full replayable document: log plus report. Byte-stable per session."""
    session = store.get_session(session_id)
    with session.lock:
        entries = [wire.log_entry_to_wire(e) for e in session.log]
        report = wire.report_to_wire(session.report) if session.report else None
        return {
            "format": EXPORT_FORMAT,
            "kind": "session_export",
            "session_id": session.session_id,
            "case_id": session.case_id,
            "state": session.state.value,
            "started_at": session.started_at,
            "ended_at": session.ended_at,
            "entries": entries,
            "report": report,
        }


def extract_actions(doc: dict) -> list[dict]:
    """Action list from either an action script or a full session export."""
    if not isinstance(doc, dict):
        raise MalformedAction("script document must be an object", field="$")
    if isinstance(doc.get("actions"), list):
        return [a for a in doc["actions"]]
    if isinstance(doc.get("entries"), list):
        return [e["action"] for e in doc["entries"] if isinstance(e, dict) and e.get("action")]
    raise MalformedAction("script needs an 'actions' or 'entries' list", field="actions")


def replay_script(store: SessionStore, doc: dict, *, reuse_session_id: bool = True) -> Session:
    """Run a script against a fresh session over the script's case."""
    case_id = doc.get("case_id")
    if not isinstance(case_id, str):
        raise MalformedAction("script needs a 'case_id'", field="case_id")
    session_id = doc.get("session_id") if reuse_session_id else None
    session = store.create_session(case_id, session_id=session_id)
    for action_doc in extract_actions(doc):
        action = wire.action_from_wire(action_doc)
        store.manager.route_action(session, action)
    return session


# ---------------------------------------------------------------------------
# HTTP app
# ---------------------------------------------------------------------------

_HTTP_STATUS = {
    UnknownSession: 404,
    UnknownCase: 404,
    SessionNotActive: 409,
    MalformedAction: 422,
    UnknownDisease: 422,
    InvalidCaseError: 422,
}


def _error_response(error: ClinSimError) -> JSONResponse:
    status = _HTTP_STATUS.get(type(error), 422)
    details: Any = {k: v for k, v in error.details.items() if v is not None} or None
    if isinstance(error, InvalidCaseError):
        details = [str(d) for d in error.diagnostics]
    return JSONResponse(
        wire.envelope_error(error.code, error.message, details), status_code=status
    )


def create_app(store: SessionStore, educator_token: str | None = None) -> FastAPI:
    app = FastAPI(title="clinsim", docs_url=None, redoc_url=None)

    @app.exception_handler(ClinSimError)
    async def _handle_domain_error(_request: Request, error: ClinSimError):
        return _error_response(error)

    @app.exception_handler(RequestValidationError)
    async def _handle_validation_error(_request: Request, error: RequestValidationError):
        return JSONResponse(
            wire.envelope_error("invalid_request", "request validation failed", error.errors()),
            status_code=422,
        )

    def _ok(data: Any) -> JSONResponse:
        return JSONResponse(wire.envelope_ok(data))

    async def _body(request: Request) -> dict:
        try:
            doc = json.loads(await request.body() or b"{}")
        except json.JSONDecodeError:
            raise MalformedAction("request body is not valid JSON", field="$") from None
        if not isinstance(doc, dict):
            raise MalformedAction("request body must be a JSON object", field="$")
        return doc

    @app.get("/cases")
    async def list_cases():
        return _ok(
            [
                {
                    "case_id": c.case_id,
                    "title": c.title,
                    "chief_complaint": c.chief_complaint,
                    "differential": list(c.differential),
                }
                for _, c in sorted(store.cases.items())
            ]
        )

    @app.get("/cases/{case_id}")
    async def get_case(case_id: str):
        case = store.cases.get(case_id)
        if case is None:
            raise UnknownCase(f"unknown case {case_id!r}", case_id=case_id)
        doc = case_to_doc(case)
        # the student-facing case view must not name the answer
        doc.pop("hidden_diagnosis")
        doc.pop("forbidden_terms")
        doc.pop("evidence_links")
        return _ok(doc)

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await _body(request)
        case_id = body.get("case_id")
        if not isinstance(case_id, str):
            raise MalformedAction("missing string field 'case_id'", field="case_id")
        session = store.create_session(case_id)
        return _ok(session_summary(session))

    @app.post("/sessions/{session_id}/actions")
    async def post_action(session_id: str, request: Request):
        session = store.get_session(session_id)
        action = wire.action_from_wire(await _body(request))
        entry = store.manager.route_action(session, action)
        return _ok(wire.log_entry_to_wire(entry))

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        return _ok(session_summary(store.get_session(session_id)))

    @app.get("/sessions/{session_id}/log")
    async def get_log(session_id: str, since: int = 0):
        session = store.get_session(session_id)
        entries = [e for e in session.log_snapshot() if e.seq > since]
        return _ok([wire.log_entry_to_wire(e) for e in entries])

    @app.get("/sessions/{session_id}/explanations")
    async def get_explanations(session_id: str):
        session = store.get_session(session_id)
        return _ok(
            [wire.explanation_to_wire(e.response.explanation) for e in session.log_snapshot()]
        )

    @app.post("/sessions/{session_id}/conclude")
    async def conclude(session_id: str, request: Request):
        session = store.get_session(session_id)
        body = await _body(request)
        diagnosis = body.get("diagnosis")
        if not isinstance(diagnosis, str):
            raise MalformedAction("missing string field 'diagnosis'", field="diagnosis")
        store.manager.conclude_session(session, diagnosis)
        data = session_summary(session)
        data["report"] = wire.report_to_wire(session.report)
        return _ok(data)

    @app.get("/sessions/{session_id}/report")
    async def get_report(session_id: str):
        session = store.get_session(session_id)
        if session.report is None:
            raise SessionNotActive(
                f"session {session_id} is {session.state.value}; no report yet"
            )
        return _ok(wire.report_to_wire(session.report))

    @app.get("/sessions/{session_id}/export")
    async def get_export(session_id: str):
        return _ok(export_session(store, session_id))

    @app.get("/dashboard/sessions/{session_id}")
    async def dashboard(session_id: str, request: Request):
        if educator_token is not None:
            if request.headers.get("x-educator-token") != educator_token:
                return JSONResponse(
                    wire.envelope_error("unauthorized", "educator token required", None),
                    status_code=401,
                )
        session = store.get_session(session_id)
        with session.lock:
            rows = [
                {
                    "seq": e.seq,
                    "decision_id": e.response.explanation.decision_id,
                    "agent_id": e.response.explanation.agent_id.value,
                    "trigger": wire.action_to_wire(e.action) if e.action else None,
                    "reason_codes": list(e.response.explanation.reason_codes),
                    "rule_ids": list(e.response.explanation.rule_ids),
                    "elapsed": e.response.explanation.elapsed,
                }
                for e in session.log
            ]
            report = wire.report_to_wire(session.report) if session.report else None
            item_explanations = (
                [
                    wire.explanation_to_wire(explain_evaluation(session.report, s.item_id))
                    for s in session.report.item_scores
                ]
                if session.report
                else None
            )
        return _ok(
            {
                "session": session_summary(session),
                "decisions": rows,
                "report": report,
                "item_explanations": item_explanations,
            }
        )

    return app


def build_store(cases_dir: str | Path | None = None,
                backend: DialogueBackend | None = None) -> tuple[SessionStore, list[str]]:
    store = SessionStore(backend=backend or backend_from_env())
    warnings = store.load_case_dir(cases_dir) if cases_dir else []
    return store, warnings
