"""Command-line interface: validation, headless runs, exports, RE tooling.

The dialogue backend is picked via CLINSIM_BACKEND ("script" by default, or
"external:<url>"); `session export` talks to a running server (CLINSIM_URL
or --url).
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from .case_model import load_case, parse_case, validate_case
from .errors import ClinSimError
from .re_toolkit import (
    PriorityWeights,
    load_corpus,
    parse_user_story,
    prioritize_stories,
    validate_traceability,
)
from .service import build_store, create_app, export_session, replay_script
from .wire import canonical_json


@click.group()
def main():
    """Clinical scenario simulator and RE toolkit."""


# -- case -------------------------------------------------------------------


@main.group()
def case():
    """Case file tools."""


@case.command("validate")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
def case_validate(file: str):
    """Parse FILE and print every diagnostic; exit 1 unless clean."""
    try:
        parsed = parse_case(Path(file).read_text(encoding="utf-8"))
    except ClinSimError as e:
        click.echo(f"error: {e}")
        sys.exit(1)
    diagnostics = validate_case(parsed)
    for diag in diagnostics:
        click.echo(str(diag))
    if any(d.severity == "error" for d in diagnostics):
        sys.exit(1)
    click.echo(f"ok: {parsed.case_id} is valid ({len(diagnostics)} warning(s))")


# -- simulate ----------------------------------------------------------------


@main.group()
def simulate():
    """Headless session runs."""


@simulate.command("run")
@click.option("--case", "case_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--script", "script_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_file", type=click.Path(dir_okay=False), default=None)
def simulate_run(case_file: str, script_file: str, out_file: str | None):
    """Run an action script against a case and print the outcome."""
    try:
        clinical_case = load_case(Path(case_file).read_text(encoding="utf-8"))
        script = json.loads(Path(script_file).read_text(encoding="utf-8"))
        store, _ = build_store()
        store.add_case(clinical_case)
        script.setdefault("case_id", clinical_case.case_id)
        session = replay_script(store, script)
    except ClinSimError as e:
        click.echo(f"error: {e}")
        sys.exit(1)

    doc = export_session(store, session.session_id)
    score = session.report.total_score if session.report else None
    click.echo(
        f"session {session.session_id}: {len(doc['entries'])} log entries, "
        f"state={session.state.value}"
        + (f", score={score:.4f}" if score is not None else "")
    )
    if out_file:
        Path(out_file).write_text(canonical_json(doc) + "\n", encoding="utf-8")
        click.echo(f"export written to {out_file}")


# -- session -------------------------------------------------------------------


@main.group()
def session():
    """Live-session tools (talk to a running server)."""


@session.command("export")
@click.argument("session_id")
@click.option("--url", default=None, help="server base URL (default CLINSIM_URL or http://127.0.0.1:8000)")
def session_export(session_id: str, url: str | None):
    """Fetch a session export from a running server and print it."""
    import httpx

    base = url or os.environ.get("CLINSIM_URL", "http://127.0.0.1:8000")
    resp = httpx.get(f"{base.rstrip('/')}/sessions/{session_id}/export", timeout=10.0)
    envelope = resp.json()
    if not envelope.get("ok"):
        click.echo(f"error: {envelope.get('error')}")
        sys.exit(1)
    click.echo(canonical_json(envelope["data"]))


# -- re --------------------------------------------------------------------------


@main.group()
def re():
    """Requirements-engineering toolkit."""


@re.command("lint")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
def re_lint(directory: str):
    """Lint a corpus directory with rules R1-R6; exit 1 on any diagnostic."""
    try:
        corpus = load_corpus(directory)
    except ClinSimError as e:
        click.echo(f"error: {e}")
        sys.exit(1)
    diagnostics = validate_traceability(corpus)
    for diag in diagnostics:
        click.echo(str(diag))
    if diagnostics:
        sys.exit(1)
    click.echo(
        f"ok: {len(corpus.stories)} stories, {len(corpus.requirements)} requirements, "
        f"{len(corpus.humans) + len(corpus.ai_specs)} personas, "
        f"{len(corpus.scenarios)} scenarios: fully traceable"
    )


@re.command("prioritize")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option(
    "--weights",
    default=None,
    help="risk,learning,complexity weights (default 0.5,0.3,0.2)",
)
def re_prioritize(directory: str, weights: str | None):
    """Print stories ranked by priority."""
    try:
        corpus = load_corpus(directory)
    except ClinSimError as e:
        click.echo(f"error: {e}")
        sys.exit(1)
    w = PriorityWeights()
    if weights:
        try:
            risk, learning, complexity = (float(x) for x in weights.split(","))
        except ValueError:
            click.echo("error: --weights needs three comma-separated numbers")
            sys.exit(1)
        w = PriorityWeights(risk, learning, complexity)
    stories = [r.story for r in corpus.stories if r.story is not None]
    for ranked in prioritize_stories(stories, w):
        s = ranked.story
        click.echo(
            f"{ranked.priority:5.2f}  {s.story_id}  [{s.question}] "
            f"{s.human_persona_id} -> {s.ai_persona_id}"
        )


@re.group()
def story():
    """User-story tools."""


@story.command("parse")
@click.argument("text")
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True, file_okay=False))
def story_parse(text: str, corpus_dir: str):
    """Parse one story sentence against the corpus personas."""
    try:
        corpus = load_corpus(corpus_dir)
        parsed = parse_user_story(text, corpus)
    except ClinSimError as e:
        click.echo(f"error: {e}")
        sys.exit(1)
    click.echo(
        canonical_json(
            {
                "human_persona_id": parsed.human_persona_id,
                "question": parsed.question,
                "ai_persona_id": parsed.ai_persona_id,
                "decision_clause": parsed.decision_clause,
                "goal_clause": parsed.goal_clause,
            }
        )
    )


# -- serve ----------------------------------------------------------------------


@main.command("serve")
@click.option("--port", default=8000, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--cases", "cases_dir", required=True, type=click.Path(exists=True, file_okay=False))
def serve(port: int, host: str, cases_dir: str):
    """Serve the session API over the cases in CASES_DIR."""
    import uvicorn

    store, warnings = build_store(cases_dir)
    for warning in warnings:
        click.echo(f"warning: skipped invalid case {warning}", err=True)
    if not store.cases:
        click.echo("error: no valid cases found", err=True)
        sys.exit(1)
    click.echo(f"serving {len(store.cases)} case(s) on {host}:{port}")
    app = create_app(store, educator_token=os.environ.get("CLINSIM_EDUCATOR_TOKEN"))
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
