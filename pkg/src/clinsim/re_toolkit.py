"""Requirements-engineering toolkit: personas, scenarios, stories, traceability.

A corpus is a directory with four subdirectories (personas/, scenarios/,
stories/, requirements/), one JSON document per file. Stories are stored as
the sentence itself and parsed against the grammar

    As a <human>, I want to understand <why|what|how> the <ai persona>
    <decision clause>, so that I can <goal clause>.

``validate_traceability`` lints the whole corpus with six rules (R1-R6);
an empty diagnostic list means every persona, story, and requirement is
connected the way the methodology demands.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .enums import AgentId
from .errors import ClinSimError, StoryParseError, UnknownPersona

QUESTION_WORDS = ("why", "what", "how")

HUMAN_ROLES = ("medical_student", "medical_educator")


@dataclass(frozen=True)
class HumanPersona:
    persona_id: str
    name: str
    role: str
    goals: tuple[str, ...]
    knowledge_level: str


@dataclass(frozen=True)
class AIPersonaSpec:
    persona_id: str
    agent_id: str
    name: str
    aliases: tuple[str, ...]
    role_goal: str
    model_architecture: str
    knowledge_base: str
    decision_triggers: str
    explainability_profile: str


@dataclass(frozen=True)
class ScenarioDoc:
    scenario_id: str
    title: str
    participants: tuple[str, ...]
    steps: tuple[str, ...]
    explainability_moments: tuple[int, ...]  # 1-based step indices


@dataclass(frozen=True)
class XaiUserStory:
    story_id: str
    human_persona_id: str
    human_name: str
    question: str
    ai_persona_id: str
    ai_name: str
    decision_clause: str
    goal_clause: str
    clinical_risk: int
    learning_value: int
    complexity: int


@dataclass(frozen=True)
class RequirementSpec:
    req_id: str
    kind: str  # "functional" | "non_functional"
    statement: str
    acceptance: str
    linked_stories: tuple[str, ...]


@dataclass(frozen=True)
class StoryRecord:
    """A story file as loaded: parsed when possible, else the failure reason."""

    story_id: str
    text: str
    clinical_risk: int
    learning_value: int
    complexity: int
    story: XaiUserStory | None
    error: str | None
    path: str


@dataclass(frozen=True)
class TraceLink:
    source: str
    target: str
    kind: str  # "persona_story" | "story_requirement" | "persona_scenario"


@dataclass(frozen=True)
class TraceGraph:
    nodes: dict[str, str]  # node id -> node kind
    edges: tuple[TraceLink, ...]


@dataclass(frozen=True)
class TraceDiagnostic:
    rule: str  # "R1".."R6"
    severity: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.rule} {self.severity}: {self.path}: {self.message}"


@dataclass
class Corpus:
    root: str = ""
    humans: dict[str, HumanPersona] = field(default_factory=dict)
    ai_specs: dict[str, AIPersonaSpec] = field(default_factory=dict)
    scenarios: dict[str, ScenarioDoc] = field(default_factory=dict)
    stories: list[StoryRecord] = field(default_factory=list)
    requirements: dict[str, RequirementSpec] = field(default_factory=dict)

    def human_by_name(self, name: str) -> HumanPersona | None:
        needle = name.strip().lower()
        for persona in self.humans.values():
            if persona.name.lower() == needle or persona.persona_id == needle:
                return persona
        return None

    def ai_aliases(self) -> list[tuple[str, AIPersonaSpec]]:
        """(lowercased alias, spec) pairs, longest alias first, deterministic."""
        pairs = []
        for spec in self.ai_specs.values():
            names = {spec.name, spec.persona_id, spec.agent_id, *spec.aliases}
            for alias in names:
                pairs.append((alias.lower(), spec))
        pairs.sort(key=lambda p: (-len(p[0]), p[0], p[1].persona_id))
        return pairs


# ---------------------------------------------------------------------------
# story grammar
# ---------------------------------------------------------------------------

_AS_A_RE = re.compile(r"^\s*as\s+an?\s+", re.IGNORECASE)
_WANT_RE = re.compile(r",\s*i\s+want\s+to\s+understand\s+", re.IGNORECASE)
_SO_THAT_RE = re.compile(r",\s*so\s+that\s+i\s+can\s+", re.IGNORECASE)


def parse_user_story(
    text: str,
    corpus: Corpus,
    *,
    story_id: str = "adhoc",
    clinical_risk: int = 3,
    learning_value: int = 3,
    complexity: int = 3,
) -> XaiUserStory:
    """Parse a story sentence; persona names resolve case-insensitively.

    Raises StoryParseError naming the first missing slot, or UnknownPersona.
    """
    m_as = _AS_A_RE.match(text)
    if not m_as:
        raise StoryParseError("story must start with 'As a <human persona>'", slot="human persona")
    m_want = _WANT_RE.search(text)
    if not m_want:
        raise StoryParseError("missing 'I want to understand' clause", slot="question")
    human_name = text[m_as.end() : m_want.start()].strip()
    if not human_name:
        raise StoryParseError("empty human persona", slot="human persona")

    rest = text[m_want.end() :]
    m_so = _SO_THAT_RE.search(rest)
    if not m_so:
        raise StoryParseError("missing 'so that I can' goal clause", slot="goal clause")
    head, goal = rest[: m_so.start()].strip(), rest[m_so.end() :].strip().rstrip(".").strip()
    if not goal:
        raise StoryParseError("empty goal clause", slot="goal clause")

    parts = head.split(None, 1)
    if not parts or parts[0].lower() not in QUESTION_WORDS:
        raise StoryParseError(
            f"question word must be one of {'/'.join(QUESTION_WORDS)}", slot="question"
        )
    question = parts[0].lower()
    if len(parts) < 2 or not parts[1].lower().startswith("the "):
        raise StoryParseError("expected 'the <AI persona>' after the question word", slot="ai persona")
    subject = parts[1][4:].strip()

    human = corpus.human_by_name(human_name)
    if human is None:
        raise UnknownPersona(f"unknown human persona {human_name!r}", persona=human_name)

    subject_lower = subject.lower()
    ai_spec = None
    ai_surface = ""
    for alias, spec in corpus.ai_aliases():
        if subject_lower == alias or subject_lower.startswith(alias + " "):
            ai_spec = spec
            ai_surface = subject[: len(alias)]
            break
    if ai_spec is None:
        raise UnknownPersona(f"no AI persona matches {subject!r}", persona=subject)
    decision = subject[len(ai_surface) :].strip()
    if not decision:
        raise StoryParseError("empty decision clause", slot="decision clause")

    return XaiUserStory(
        story_id=story_id,
        human_persona_id=human.persona_id,
        human_name=human.name,
        question=question,
        ai_persona_id=ai_spec.persona_id,
        ai_name=ai_surface,
        decision_clause=decision,
        goal_clause=goal,
        clinical_risk=clinical_risk,
        learning_value=learning_value,
        complexity=complexity,
    )


def render_user_story(story: XaiUserStory) -> str:
    """The canonical sentence; parse_user_story(render_user_story(s)) == s."""
    article = "an" if story.human_name[:1].lower() in "aeiou" else "a"
    return (
        f"As {article} {story.human_name}, I want to understand {story.question} "
        f"the {story.ai_name} {story.decision_clause}, so that I can {story.goal_clause}."
    )


# ---------------------------------------------------------------------------
# prioritization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PriorityWeights:
    clinical_risk: float = 0.5
    learning_value: float = 0.3
    complexity: float = 0.2


@dataclass(frozen=True)
class PrioritizedStory:
    story: XaiUserStory
    priority: float


def story_priority(story: XaiUserStory, weights: PriorityWeights = PriorityWeights()) -> float:
    """Risk and learning value push up; implementation complexity pushes down."""
    return (
        weights.clinical_risk * story.clinical_risk
        + weights.learning_value * story.learning_value
        + weights.complexity * (6 - story.complexity)
    )


def prioritize_stories(
    stories, weights: PriorityWeights = PriorityWeights()
) -> list[PrioritizedStory]:
    """Sort by priority descending, ties by story_id ascending. Total order."""
    ranked = [PrioritizedStory(story=s, priority=story_priority(s, weights)) for s in stories]
    ranked.sort(key=lambda p: (-p.priority, p.story.story_id))
    return ranked


# ---------------------------------------------------------------------------
# corpus loading
# ---------------------------------------------------------------------------


class CorpusFormatError(ClinSimError):
    code = "corpus_format_error"


def _req(doc: dict, key: str, path: str, kind=str):
    value = doc.get(key)
    if isinstance(value, bool) or not isinstance(value, kind):
        raise CorpusFormatError(f"{path}: field {key!r} must be {kind.__name__}")
    if kind is str and not value.strip():
        raise CorpusFormatError(f"{path}: field {key!r} must be non-empty")
    return value


def _rating(doc: dict, key: str, path: str) -> int:
    value = _req(doc, key, path, int)
    if not 1 <= value <= 5:
        raise CorpusFormatError(f"{path}: field {key!r} must be between 1 and 5")
    return value


def _str_list(doc: dict, key: str, path: str, *, required: bool = True) -> tuple[str, ...]:
    value = doc.get(key, None if required else [])
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        raise CorpusFormatError(f"{path}: field {key!r} must be a list of strings")
    return tuple(value)


def load_corpus(root: str | Path) -> Corpus:
    """Load a corpus directory; structural problems raise, linkage problems lint."""
    root = Path(root)
    corpus = Corpus(root=str(root))

    for path in sorted((root / "personas").glob("*.json")):
        doc = _read(path)
        kind = _req(doc, "kind", str(path))
        if kind == "human_persona":
            persona = HumanPersona(
                persona_id=_req(doc, "persona_id", str(path)),
                name=_req(doc, "name", str(path)),
                role=_req(doc, "role", str(path)),
                goals=_str_list(doc, "goals", str(path)),
                knowledge_level=_req(doc, "knowledge_level", str(path)),
            )
            if persona.role not in HUMAN_ROLES:
                raise CorpusFormatError(f"{path}: role must be one of {HUMAN_ROLES}")
            _no_dup(corpus.humans, persona.persona_id, path)
            corpus.humans[persona.persona_id] = persona
        elif kind == "ai_persona":
            spec = AIPersonaSpec(
                persona_id=_req(doc, "persona_id", str(path)),
                agent_id=_req(doc, "agent_id", str(path)),
                name=_req(doc, "name", str(path)),
                aliases=_str_list(doc, "aliases", str(path), required=False),
                role_goal=_req(doc, "role_goal", str(path)),
                model_architecture=_req(doc, "model_architecture", str(path)),
                knowledge_base=_req(doc, "knowledge_base", str(path)),
                decision_triggers=_req(doc, "decision_triggers", str(path)),
                explainability_profile=_req(doc, "explainability_profile", str(path)),
            )
            _no_dup(corpus.ai_specs, spec.persona_id, path)
            corpus.ai_specs[spec.persona_id] = spec
        else:
            raise CorpusFormatError(f"{path}: unknown persona kind {kind!r}")

    for path in sorted((root / "scenarios").glob("*.json")):
        doc = _read(path)
        steps = _str_list(doc, "steps", str(path))
        moments = doc.get("explainability_moments")
        if (
            not isinstance(moments, list)
            or not moments
            or any(isinstance(m, bool) or not isinstance(m, int) for m in moments)
        ):
            raise CorpusFormatError(
                f"{path}: explainability_moments must be a non-empty list of step numbers"
            )
        if any(not 1 <= m <= len(steps) for m in moments):
            raise CorpusFormatError(f"{path}: explainability_moments reference missing steps")
        scenario = ScenarioDoc(
            scenario_id=_req(doc, "scenario_id", str(path)),
            title=_req(doc, "title", str(path)),
            participants=_str_list(doc, "participants", str(path)),
            steps=steps,
            explainability_moments=tuple(moments),
        )
        _no_dup(corpus.scenarios, scenario.scenario_id, path)
        corpus.scenarios[scenario.scenario_id] = scenario

    for path in sorted((root / "stories").glob("*.json")):
        doc = _read(path)
        story_id = _req(doc, "story_id", str(path))
        text = _req(doc, "text", str(path))
        ratings = {
            "clinical_risk": _rating(doc, "clinical_risk", str(path)),
            "learning_value": _rating(doc, "learning_value", str(path)),
            "complexity": _rating(doc, "complexity", str(path)),
        }
        try:
            story = parse_user_story(text, corpus, story_id=story_id, **ratings)
            error = None
        except (StoryParseError, UnknownPersona) as e:
            story, error = None, e.message
        if any(r.story_id == story_id for r in corpus.stories):
            raise CorpusFormatError(f"{path}: duplicate id {story_id!r}")
        corpus.stories.append(
            StoryRecord(story_id=story_id, text=text, story=story, error=error,
                        path=str(path), **ratings)
        )

    for path in sorted((root / "requirements").glob("*.json")):
        doc = _read(path)
        req = RequirementSpec(
            req_id=_req(doc, "req_id", str(path)),
            kind=_req(doc, "kind", str(path)),
            statement=_req(doc, "statement", str(path)),
            acceptance=_req(doc, "acceptance", str(path)),
            linked_stories=_str_list(doc, "linked_stories", str(path)),
        )
        if req.kind not in ("functional", "non_functional"):
            raise CorpusFormatError(f"{path}: kind must be functional or non_functional")
        _no_dup(corpus.requirements, req.req_id, path)
        corpus.requirements[req.req_id] = req

    return corpus


def _read(path: Path) -> dict:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CorpusFormatError(f"{path}: invalid JSON: {e.msg}") from None
    if not isinstance(doc, dict):
        raise CorpusFormatError(f"{path}: document must be an object")
    return doc


def _no_dup(mapping: dict, key: str, path: Path) -> None:
    if key in mapping:
        raise CorpusFormatError(f"{path}: duplicate id {key!r}")


# ---------------------------------------------------------------------------
# traceability lint (R1-R6)
# ---------------------------------------------------------------------------


def validate_traceability(corpus: Corpus) -> list[TraceDiagnostic]:
    """Six lint rules over the corpus; empty list means fully traceable.

    R1 story personas resolve        R4 every agent has an AI persona spec
    R2 story linked from requirement R5 every AI persona used in a scenario
    R3 requirement links a story     R6 non-functional has a numeric bound
    """
    out: list[TraceDiagnostic] = []

    for record in corpus.stories:
        if record.error is not None:
            out.append(
                TraceDiagnostic("R1", "error", record.path,
                                f"story {record.story_id!r}: {record.error}")
            )

    linked = {sid for req in corpus.requirements.values() for sid in req.linked_stories}
    for record in corpus.stories:
        if record.story_id not in linked:
            out.append(
                TraceDiagnostic("R2", "error", record.path,
                                f"story {record.story_id!r} is not linked from any requirement")
            )

    story_ids = {r.story_id for r in corpus.stories}
    for req in corpus.requirements.values():
        if not any(sid in story_ids for sid in req.linked_stories):
            out.append(
                TraceDiagnostic("R3", "error", f"requirements/{req.req_id}",
                                f"requirement {req.req_id!r} links no existing story")
            )

    covered_agents = {spec.agent_id for spec in corpus.ai_specs.values()}
    for agent in AgentId:
        if agent.value not in covered_agents:
            out.append(
                TraceDiagnostic("R4", "error", "personas/",
                                f"agent {agent.value!r} has no AI persona spec")
            )

    in_scenarios = {
        pid for scenario in corpus.scenarios.values() for pid in scenario.participants
    }
    for pid in corpus.ai_specs:
        if pid not in in_scenarios:
            out.append(
                TraceDiagnostic("R5", "error", f"personas/{pid}",
                                f"AI persona {pid!r} appears in no scenario")
            )

    for req in corpus.requirements.values():
        if req.kind == "non_functional" and not re.search(r"\d", req.statement):
            out.append(
                TraceDiagnostic("R6", "error", f"requirements/{req.req_id}",
                                f"non-functional requirement {req.req_id!r} has no numeric bound")
            )

    out.sort(key=lambda d: (d.rule, d.path, d.message))
    return out


def build_trace_graph(corpus: Corpus) -> TraceGraph:
    """Typed link graph; refuses to build if any edge would dangle."""
    nodes: dict[str, str] = {}
    for pid in corpus.humans:
        nodes[pid] = "human_persona"
    for pid in corpus.ai_specs:
        nodes[pid] = "ai_persona"
    for sid in corpus.scenarios:
        nodes[sid] = "scenario"
    for record in corpus.stories:
        nodes[record.story_id] = "story"
    for rid in corpus.requirements:
        nodes[rid] = "requirement"

    edges: list[TraceLink] = []
    for record in corpus.stories:
        if record.story is None:
            raise ValueError(f"story {record.story_id!r} does not resolve; lint first")
        edges.append(TraceLink(record.story.human_persona_id, record.story_id, "persona_story"))
        edges.append(TraceLink(record.story.ai_persona_id, record.story_id, "persona_story"))
    for req in corpus.requirements.values():
        for sid in req.linked_stories:
            if sid not in nodes:
                raise ValueError(f"requirement {req.req_id!r} links missing story {sid!r}")
            edges.append(TraceLink(sid, req.req_id, "story_requirement"))
    for scenario in corpus.scenarios.values():
        for pid in scenario.participants:
            if pid not in nodes:
                raise ValueError(
                    f"scenario {scenario.scenario_id!r} references missing persona {pid!r}"
                )
            edges.append(TraceLink(pid, scenario.scenario_id, "persona_scenario"))
    return TraceGraph(nodes=nodes, edges=tuple(edges))
