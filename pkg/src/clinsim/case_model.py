"""Clinical case documents: the knowledge base every agent runs on.

A case is a single JSON document (format version 1) holding the patient
script, exam findings, test catalog, disease-evidence weights, intervention
protocol, scoring rubric, and the forbidden-disclosure terms. Findings are
the joining vocabulary: script entries reveal them, exams and tests report
them, evidence links weigh them, and rubric matchers can require them.

``parse_case`` rejects malformed documents outright; ``validate_case``
returns the full diagnostic list for an already-constructed case so
educator tooling can report every problem at once.
"""

from __future__ import annotations

import dataclasses
import json
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache

from .enums import ActionKind, MatcherKind, Modality, RubricCategory
from .errors import CaseParseError, CaseReferenceError, InvalidCaseError

DiseaseId = str
FindingId = str
ExamId = str
TestId = str
InterventionId = str

FORMAT_VERSION = 1

_ID_RE = re.compile(r"^[a-z][a-z0-9_]*$")
# Case ids are file-name-ish slugs; hyphens allowed ("chestpain-01").
_CASE_ID_RE = re.compile(r"^[a-z][a-z0-9_-]*$")

TOP_LEVEL_KEYS = frozenset(
    {
        "format",
        "case_id",
        "title",
        "demographics",
        "chief_complaint",
        "hidden_diagnosis",
        "differential",
        "symptom_script",
        "exam_findings",
        "test_catalog",
        "evidence_links",
        "intervention_protocol",
        "rubric",
        "forbidden_terms",
        "rule_out_threshold",
    }
)

SEXES = ("male", "female", "other")


@dataclass(frozen=True)
class Demographics:
    age: int
    sex: str
    history: tuple[str, ...]


@dataclass(frozen=True)
class SymptomScriptEntry:
    entry_id: str
    keywords: frozenset[str]
    response_text: str
    reveals: tuple[FindingId, ...]


@dataclass(frozen=True)
class VitalReading:
    value: float | str
    unit: str


@dataclass(frozen=True)
class ExamFinding:
    exam_id: ExamId
    label: str
    result_text: str
    finding_ids: tuple[FindingId, ...]
    vitals: tuple[tuple[str, VitalReading], ...] = ()


@dataclass(frozen=True)
class TestCatalogEntry:
    test_id: TestId
    modality: Modality
    label: str
    result_text: str
    finding_ids: tuple[FindingId, ...]
    turnaround: str = "immediate"


@dataclass(frozen=True)
class EvidenceLink:
    disease: DiseaseId
    finding: FindingId
    weight: float


@dataclass(frozen=True)
class InterventionRule:
    intervention_id: InterventionId
    label: str
    indicated_if: frozenset[FindingId]
    contraindicated_if: frozenset[FindingId]
    reason_code: str
    outcome_text: str


@dataclass(frozen=True)
class EventMatcher:
    """One required event of a rubric item.

    Exactly the fields for ``kind`` are set:
      action_of_kind             -> action (+ optional target)
      patient_question_containing-> keywords (any keyword is a substring hit)
      finding_observed           -> finding
      diagnosis_submitted        -> disease
    """

    kind: MatcherKind
    action: ActionKind | None = None
    target: str | None = None
    keywords: frozenset[str] = frozenset()
    finding: FindingId | None = None
    disease: DiseaseId | None = None

    def describe(self) -> str:
        """Stable one-token rendering used in reason codes."""
        if self.kind is MatcherKind.ACTION_OF_KIND:
            base = f"action:{self.action.value}"
            return f"{base}:{self.target}" if self.target else base
        if self.kind is MatcherKind.PATIENT_QUESTION_CONTAINING:
            return "question~" + "|".join(sorted(self.keywords))
        if self.kind is MatcherKind.FINDING_OBSERVED:
            return f"finding:{self.finding}"
        return f"diagnosis:{self.disease}"


@dataclass(frozen=True)
class RubricItem:
    item_id: str
    description: str
    category: RubricCategory
    required_events: tuple[EventMatcher, ...]
    weight: float


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.path}: {self.message}"


@dataclass(frozen=True)
class ClinicalCase:
    case_id: str
    title: str
    demographics: Demographics
    chief_complaint: str
    hidden_diagnosis: DiseaseId
    differential: tuple[DiseaseId, ...]
    symptom_script: tuple[SymptomScriptEntry, ...]
    exam_findings: dict[ExamId, ExamFinding] = field(default_factory=dict)
    test_catalog: dict[TestId, TestCatalogEntry] = field(default_factory=dict)
    evidence_links: tuple[EvidenceLink, ...] = ()
    intervention_protocol: tuple[InterventionRule, ...] = ()
    rubric: tuple[RubricItem, ...] = ()
    forbidden_terms: tuple[str, ...] = ()
    rule_out_threshold: float = -1.0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClinicalCase):
            return NotImplemented
        return _case_key(self) == _case_key(other)

    def __hash__(self) -> int:
        return hash(self.case_id)

    def discoverable_findings(self) -> frozenset[FindingId]:
        """Every finding a student can surface through script, exam, or test."""
        out: set[FindingId] = set()
        for entry in self.symptom_script:
            out.update(entry.reveals)
        for exam in self.exam_findings.values():
            out.update(exam.finding_ids)
        for test in self.test_catalog.values():
            out.update(test.finding_ids)
        return frozenset(out)

    def intervention(self, intervention_id: str) -> InterventionRule | None:
        for rule in self.intervention_protocol:
            if rule.intervention_id == intervention_id:
                return rule
        return None

    def weight(self, disease: DiseaseId, finding: FindingId) -> float | None:
        return _link_index(self).get((disease, finding))

    def hidden_display_name(self) -> str:
        return self.hidden_diagnosis.replace("_", " ")


def _case_key(case: ClinicalCase) -> tuple:
    # dict field ordering is insertion order; compare as sorted item tuples
    return (
        case.case_id,
        case.title,
        case.demographics,
        case.chief_complaint,
        case.hidden_diagnosis,
        case.differential,
        case.symptom_script,
        tuple(sorted(case.exam_findings.items())),
        tuple(sorted(case.test_catalog.items())),
        case.evidence_links,
        case.intervention_protocol,
        case.rubric,
        case.forbidden_terms,
        case.rule_out_threshold,
    )


@lru_cache(maxsize=64)
def _link_index(case: ClinicalCase) -> dict[tuple[DiseaseId, FindingId], float]:
    return {(l.disease, l.finding): l.weight for l in case.evidence_links}


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _fail(message: str, path: str) -> CaseParseError:
    return CaseParseError(message, path=path)


def _expect(value, kind, path: str, what: str):
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise _fail(f"{what} expected, got {type(value).__name__}", path)
    return value


def _string(value, path: str, *, allow_empty: bool = False) -> str:
    s = _expect(value, str, path, "string")
    if not allow_empty and not s.strip():
        raise _fail("string must be non-empty", path)
    return s


def _ident(value, path: str, *, pattern: re.Pattern = _ID_RE) -> str:
    s = _string(value, path)
    if not pattern.match(s):
        raise _fail(f"id {s!r} is not lowercase snake_case", path)
    return s


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(f"number expected, got {type(value).__name__}", path)
    out = float(value)
    if not math.isfinite(out):
        raise _fail("number must be finite", path)
    return out


def _array(value, path: str, *, allow_empty: bool = True) -> list:
    arr = _expect(value, list, path, "array")
    if not allow_empty and not arr:
        raise _fail("array must be non-empty", path)
    return arr


def _obj(value, path: str) -> dict:
    return _expect(value, dict, path, "object")


def _enum(value, enum_cls, path: str):
    s = _string(value, path)
    try:
        return enum_cls(s)
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)
        raise _fail(f"{s!r} is not one of: {allowed}", path) from None


def _string_list(value, path: str, *, ident: bool = False, allow_empty: bool = True) -> tuple[str, ...]:
    arr = _array(value, path, allow_empty=allow_empty)
    out = []
    for i, item in enumerate(arr):
        p = f"{path}[{i}]"
        out.append(_ident(item, p) if ident else _string(item, p))
    return tuple(out)


def _parse_script_entry(doc, path: str) -> SymptomScriptEntry:
    obj = _obj(doc, path)
    keywords = _string_list(obj.get("keywords"), f"{path}.keywords", allow_empty=False)
    return SymptomScriptEntry(
        entry_id=_ident(obj.get("entry_id"), f"{path}.entry_id"),
        keywords=frozenset(k.lower() for k in keywords),
        response_text=_string(obj.get("response_text"), f"{path}.response_text"),
        reveals=_string_list(obj.get("reveals", []), f"{path}.reveals", ident=True),
    )


def _parse_vitals(doc, path: str) -> tuple[tuple[str, VitalReading], ...]:
    obj = _obj(doc, path)
    out = []
    for name, reading in obj.items():
        p = f"{path}.{name}"
        r = _obj(reading, p)
        value = r.get("value")
        if not isinstance(value, (int, float, str)) or isinstance(value, bool):
            raise _fail("vital value must be a number or string", f"{p}.value")
        out.append((name, VitalReading(value=value, unit=_string(r.get("unit"), f"{p}.unit"))))
    return tuple(out)


def _parse_exam(doc, path: str, exam_id: str) -> ExamFinding:
    obj = _obj(doc, path)
    declared = _ident(obj.get("exam_id"), f"{path}.exam_id")
    if declared != exam_id:
        raise _fail(f"exam_id {declared!r} does not match its key {exam_id!r}", f"{path}.exam_id")
    vitals = _parse_vitals(obj["vitals"], f"{path}.vitals") if "vitals" in obj else ()
    return ExamFinding(
        exam_id=declared,
        label=_string(obj.get("label"), f"{path}.label"),
        result_text=_string(obj.get("result_text"), f"{path}.result_text"),
        finding_ids=_string_list(obj.get("finding_ids", []), f"{path}.finding_ids", ident=True),
        vitals=vitals,
    )


def _parse_test(doc, path: str, test_id: str) -> TestCatalogEntry:
    obj = _obj(doc, path)
    declared = _ident(obj.get("test_id"), f"{path}.test_id")
    if declared != test_id:
        raise _fail(f"test_id {declared!r} does not match its key {test_id!r}", f"{path}.test_id")
    turnaround = _string(obj.get("turnaround", "immediate"), f"{path}.turnaround")
    if turnaround != "immediate":
        raise _fail("only 'immediate' turnaround is supported", f"{path}.turnaround")
    return TestCatalogEntry(
        test_id=declared,
        modality=_enum(obj.get("modality"), Modality, f"{path}.modality"),
        label=_string(obj.get("label"), f"{path}.label"),
        result_text=_string(obj.get("result_text"), f"{path}.result_text"),
        finding_ids=_string_list(obj.get("finding_ids", []), f"{path}.finding_ids", ident=True),
        turnaround=turnaround,
    )


def _parse_link(doc, path: str) -> EvidenceLink:
    obj = _obj(doc, path)
    return EvidenceLink(
        disease=_ident(obj.get("disease"), f"{path}.disease"),
        finding=_ident(obj.get("finding"), f"{path}.finding"),
        weight=_number(obj.get("weight"), f"{path}.weight"),
    )


def _parse_intervention(doc, path: str) -> InterventionRule:
    obj = _obj(doc, path)
    indicated = frozenset(_string_list(obj.get("indicated_if", []), f"{path}.indicated_if", ident=True))
    contra = frozenset(_string_list(obj.get("contraindicated_if", []), f"{path}.contraindicated_if", ident=True))
    overlap = indicated & contra
    if overlap:
        raise _fail(
            f"indicated_if and contraindicated_if overlap on {sorted(overlap)}", path
        )
    return InterventionRule(
        intervention_id=_ident(obj.get("intervention_id"), f"{path}.intervention_id"),
        label=_string(obj.get("label"), f"{path}.label"),
        indicated_if=indicated,
        contraindicated_if=contra,
        reason_code=_ident(obj.get("reason_code"), f"{path}.reason_code"),
        outcome_text=_string(obj.get("outcome_text"), f"{path}.outcome_text"),
    )


def _parse_matcher(doc, path: str) -> EventMatcher:
    obj = _obj(doc, path)
    kind = _enum(obj.get("kind"), MatcherKind, f"{path}.kind")
    if kind is MatcherKind.ACTION_OF_KIND:
        action = _enum(obj.get("action"), ActionKind, f"{path}.action")
        target = None
        if obj.get("target") is not None:
            target = _ident(obj.get("target"), f"{path}.target")
        return EventMatcher(kind=kind, action=action, target=target)
    if kind is MatcherKind.PATIENT_QUESTION_CONTAINING:
        keywords = _string_list(obj.get("keywords"), f"{path}.keywords", allow_empty=False)
        return EventMatcher(kind=kind, keywords=frozenset(k.lower() for k in keywords))
    if kind is MatcherKind.FINDING_OBSERVED:
        return EventMatcher(kind=kind, finding=_ident(obj.get("finding"), f"{path}.finding"))
    return EventMatcher(kind=kind, disease=_ident(obj.get("disease"), f"{path}.disease"))


def _parse_rubric_item(doc, path: str) -> RubricItem:
    obj = _obj(doc, path)
    events = _array(obj.get("required_events"), f"{path}.required_events", allow_empty=False)
    weight = _number(obj.get("weight"), f"{path}.weight")
    if weight <= 0:
        raise _fail("weight must be positive", f"{path}.weight")
    return RubricItem(
        item_id=_ident(obj.get("item_id"), f"{path}.item_id"),
        description=_string(obj.get("description"), f"{path}.description"),
        category=_enum(obj.get("category"), RubricCategory, f"{path}.category"),
        required_events=tuple(
            _parse_matcher(m, f"{path}.required_events[{i}]") for i, m in enumerate(events)
        ),
        weight=weight,
    )


def _unique(ids, path: str, what: str) -> None:
    seen = set()
    for i in ids:
        if i in seen:
            raise _fail(f"duplicate {what} {i!r}", path)
        seen.add(i)


def parse_case(source: str) -> ClinicalCase:
    """Parse a case document into a fully cross-referenced ClinicalCase.

    Raises CaseParseError for malformed syntax or structural violations and
    CaseReferenceError naming the first dangling id. Pure and deterministic.
    """
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as e:
        raise CaseParseError(f"invalid JSON: {e.msg}", line=e.lineno) from None
    if not isinstance(doc, dict):
        raise _fail("top-level value must be an object", "$")

    missing = TOP_LEVEL_KEYS - doc.keys()
    if missing:
        raise _fail(f"missing required key {sorted(missing)[0]!r}", "$")
    unknown = doc.keys() - TOP_LEVEL_KEYS
    if unknown:
        raise _fail(f"unknown key {sorted(unknown)[0]!r}", "$")
    if doc["format"] != FORMAT_VERSION:
        raise _fail(f"unsupported format version {doc['format']!r}", "format")

    demo_obj = _obj(doc["demographics"], "demographics")
    age = demo_obj.get("age")
    if isinstance(age, bool) or not isinstance(age, int) or age < 0:
        raise _fail("age must be a non-negative integer", "demographics.age")
    sex = _string(demo_obj.get("sex"), "demographics.sex")
    if sex not in SEXES:
        raise _fail(f"sex must be one of: {', '.join(SEXES)}", "demographics.sex")
    demographics = Demographics(
        age=age,
        sex=sex,
        history=_string_list(demo_obj.get("history", []), "demographics.history"),
    )

    script = tuple(
        _parse_script_entry(e, f"symptom_script[{i}]")
        for i, e in enumerate(_array(doc["symptom_script"], "symptom_script", allow_empty=False))
    )
    _unique((e.entry_id for e in script), "symptom_script", "entry_id")

    exams = {}
    for key, val in _obj(doc["exam_findings"], "exam_findings").items():
        exams[key] = _parse_exam(val, f"exam_findings.{key}", key)

    tests = {}
    for key, val in _obj(doc["test_catalog"], "test_catalog").items():
        tests[key] = _parse_test(val, f"test_catalog.{key}", key)

    links = tuple(
        _parse_link(l, f"evidence_links[{i}]")
        for i, l in enumerate(_array(doc["evidence_links"], "evidence_links"))
    )
    _unique(((l.disease, l.finding) for l in links), "evidence_links", "(disease, finding) pair")

    protocol = tuple(
        _parse_intervention(r, f"intervention_protocol[{i}]")
        for i, r in enumerate(_array(doc["intervention_protocol"], "intervention_protocol"))
    )
    _unique((r.intervention_id for r in protocol), "intervention_protocol", "intervention_id")

    rubric_arr = _array(doc["rubric"], "rubric")
    if not rubric_arr:
        raise _fail("rubric must be non-empty", "rubric")
    rubric = tuple(_parse_rubric_item(r, f"rubric[{i}]") for i, r in enumerate(rubric_arr))
    _unique((r.item_id for r in rubric), "rubric", "item_id")

    differential = _string_list(doc["differential"], "differential", ident=True, allow_empty=False)
    _unique(differential, "differential", "disease id")

    forbidden = tuple(t.lower() for t in _string_list(doc["forbidden_terms"], "forbidden_terms"))

    case = ClinicalCase(
        case_id=_ident(doc["case_id"], "case_id", pattern=_CASE_ID_RE),
        title=_string(doc["title"], "title"),
        demographics=demographics,
        chief_complaint=_string(doc["chief_complaint"], "chief_complaint"),
        hidden_diagnosis=_ident(doc["hidden_diagnosis"], "hidden_diagnosis"),
        differential=differential,
        symptom_script=script,
        exam_findings=exams,
        test_catalog=tests,
        evidence_links=links,
        intervention_protocol=protocol,
        rubric=rubric,
        forbidden_terms=forbidden,
        rule_out_threshold=_number(doc["rule_out_threshold"], "rule_out_threshold"),
    )

    # Normalization: the hidden diagnosis display name is always forbidden.
    display = case.hidden_display_name()
    if display not in case.forbidden_terms:
        case = _replace_forbidden(case, case.forbidden_terms + (display,))

    dangling = [d for d in validate_case(case) if d.severity == "error" and _is_reference(d)]
    if dangling:
        first = dangling[0]
        raise CaseReferenceError(first.message, path=first.path)
    return case


def _replace_forbidden(case: ClinicalCase, terms: tuple[str, ...]) -> ClinicalCase:
    return dataclasses.replace(case, forbidden_terms=terms)


def _is_reference(diag: Diagnostic) -> bool:
    # every dangling-id message produced by validate_case starts with "unknown"
    return diag.message.startswith("unknown")


def load_case(source: str) -> ClinicalCase:
    """Parse and validate; raise InvalidCaseError unless the case is clean."""
    case = parse_case(source)
    errors = [d for d in validate_case(case) if d.severity == "error"]
    if errors:
        raise InvalidCaseError(case.case_id, errors)
    return case


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def validate_case(case: ClinicalCase) -> list[Diagnostic]:
    """Report every invariant violation; empty list iff the case is valid.

    Ordering is deterministic: diagnostics sort by (path, message).
    """
    out: list[Diagnostic] = []
    err = lambda path, msg: out.append(Diagnostic("error", path, msg))
    warn = lambda path, msg: out.append(Diagnostic("warning", path, msg))

    differential = set(case.differential)
    vocabulary = case.discoverable_findings()

    if case.hidden_diagnosis not in differential:
        err("hidden_diagnosis", f"unknown disease {case.hidden_diagnosis!r}: not in differential")
    if case.hidden_display_name() not in case.forbidden_terms:
        err("forbidden_terms", f"must contain the hidden diagnosis display name {case.hidden_display_name()!r}")
    if not (case.rule_out_threshold < 0):
        err("rule_out_threshold", "must be negative (rule-out is evidence against)")

    for i, link in enumerate(case.evidence_links):
        if link.disease not in differential:
            err(f"evidence_links[{i}].disease", f"unknown disease {link.disease!r}: not in differential")
        if link.finding not in vocabulary:
            err(f"evidence_links[{i}].finding", f"unknown finding {link.finding!r}")
        if not math.isfinite(link.weight):
            err(f"evidence_links[{i}].weight", "weight must be finite")

    linked_diseases = {l.disease for l in case.evidence_links}
    for d in sorted(differential - linked_diseases):
        warn("evidence_links", f"disease {d!r} has no evidence links")

    for i, entry in enumerate(case.symptom_script):
        if not entry.keywords:
            err(f"symptom_script[{i}].keywords", "keywords must be non-empty")
        for term in case.forbidden_terms:
            if term in entry.response_text.lower():
                err(
                    f"symptom_script[{i}].response_text",
                    f"entry {entry.entry_id!r} leaks forbidden term {term!r}",
                )
        for f in entry.reveals:
            if f not in vocabulary:  # unreachable via parse; guards direct construction
                err(f"symptom_script[{i}].reveals", f"unknown finding {f!r}")

    for key in sorted(case.exam_findings):
        exam = case.exam_findings[key]
        if not exam.result_text.strip():
            err(f"exam_findings.{key}.result_text", "result_text must be non-empty")
        for term in case.forbidden_terms:
            if term in exam.result_text.lower():
                err(f"exam_findings.{key}.result_text", f"exam leaks forbidden term {term!r}")

    for key in sorted(case.test_catalog):
        test = case.test_catalog[key]
        if not test.result_text.strip():
            err(f"test_catalog.{key}.result_text", "result_text must be non-empty")
        for term in case.forbidden_terms:
            if term in test.result_text.lower():
                err(f"test_catalog.{key}.result_text", f"test leaks forbidden term {term!r}")

    for i, rule in enumerate(case.intervention_protocol):
        if rule.indicated_if & rule.contraindicated_if:
            err(
                f"intervention_protocol[{i}]",
                "indicated_if and contraindicated_if must be disjoint",
            )
        if not rule.reason_code.strip():
            err(f"intervention_protocol[{i}].reason_code", "reason_code must be non-empty")
        for f in sorted((rule.indicated_if | rule.contraindicated_if) - vocabulary):
            err(f"intervention_protocol[{i}]", f"unknown finding {f!r}")
        for term in case.forbidden_terms:
            if term in rule.outcome_text.lower():
                err(f"intervention_protocol[{i}].outcome_text", f"intervention leaks forbidden term {term!r}")

    if not case.rubric:
        err("rubric", "rubric must be non-empty")
    elif not sum(item.weight for item in case.rubric) > 0:
        err("rubric", "rubric weights must sum to a positive number")
    for i, item in enumerate(case.rubric):
        if not item.required_events:
            err(f"rubric[{i}].required_events", "required_events must be non-empty")
        for j, m in enumerate(item.required_events):
            path = f"rubric[{i}].required_events[{j}]"
            if m.kind is MatcherKind.ACTION_OF_KIND and m.target is not None:
                catalog = {
                    ActionKind.REQUEST_EXAM: case.exam_findings.keys(),
                    ActionKind.ORDER_TEST: case.test_catalog.keys(),
                    ActionKind.INTERVENE: {r.intervention_id for r in case.intervention_protocol},
                }.get(m.action)
                if catalog is not None and m.target not in catalog:
                    err(path, f"unknown target {m.target!r} for {m.action.value}")
            elif m.kind is MatcherKind.PATIENT_QUESTION_CONTAINING and not m.keywords:
                err(path, "keywords must be non-empty")
            elif m.kind is MatcherKind.FINDING_OBSERVED and m.finding not in vocabulary:
                err(path, f"unknown finding {m.finding!r}")
            elif m.kind is MatcherKind.DIAGNOSIS_SUBMITTED and m.disease not in differential:
                err(path, f"unknown disease {m.disease!r}: not in differential")

    out.sort(key=lambda d: (d.path, d.message))
    return out


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _matcher_to_doc(m: EventMatcher) -> dict:
    if m.kind is MatcherKind.ACTION_OF_KIND:
        doc: dict = {"kind": m.kind.value, "action": m.action.value}
        if m.target is not None:
            doc["target"] = m.target
        return doc
    if m.kind is MatcherKind.PATIENT_QUESTION_CONTAINING:
        return {"kind": m.kind.value, "keywords": sorted(m.keywords)}
    if m.kind is MatcherKind.FINDING_OBSERVED:
        return {"kind": m.kind.value, "finding": m.finding}
    return {"kind": m.kind.value, "disease": m.disease}


def case_to_doc(case: ClinicalCase) -> dict:
    """The JSON-ready document form of a case (format version 1)."""
    return {
        "format": FORMAT_VERSION,
        "case_id": case.case_id,
        "title": case.title,
        "demographics": {
            "age": case.demographics.age,
            "sex": case.demographics.sex,
            "history": list(case.demographics.history),
        },
        "chief_complaint": case.chief_complaint,
        "hidden_diagnosis": case.hidden_diagnosis,
        "differential": list(case.differential),
        "symptom_script": [
            {
                "entry_id": e.entry_id,
                "keywords": sorted(e.keywords),
                "response_text": e.response_text,
                "reveals": list(e.reveals),
            }
            for e in case.symptom_script
        ],
        "exam_findings": {
            key: {
                "exam_id": exam.exam_id,
                "label": exam.label,
                "result_text": exam.result_text,
                "finding_ids": list(exam.finding_ids),
                **(
                    {
                        "vitals": {
                            name: {"value": v.value, "unit": v.unit} for name, v in exam.vitals
                        }
                    }
                    if exam.vitals
                    else {}
                ),
            }
            for key, exam in case.exam_findings.items()
        },
        "test_catalog": {
            key: {
                "test_id": t.test_id,
                "modality": t.modality.value,
                "label": t.label,
                "result_text": t.result_text,
                "finding_ids": list(t.finding_ids),
                "turnaround": t.turnaround,
            }
            for key, t in case.test_catalog.items()
        },
        "evidence_links": [
            {"disease": l.disease, "finding": l.finding, "weight": l.weight}
            for l in case.evidence_links
        ],
        "intervention_protocol": [
            {
                "intervention_id": r.intervention_id,
                "label": r.label,
                "indicated_if": sorted(r.indicated_if),
                "contraindicated_if": sorted(r.contraindicated_if),
                "reason_code": r.reason_code,
                "outcome_text": r.outcome_text,
            }
            for r in case.intervention_protocol
        ],
        "rubric": [
            {
                "item_id": item.item_id,
                "description": item.description,
                "category": item.category.value,
                "required_events": [_matcher_to_doc(m) for m in item.required_events],
                "weight": item.weight,
            }
            for item in case.rubric
        ],
        "forbidden_terms": list(case.forbidden_terms),
        "rule_out_threshold": case.rule_out_threshold,
    }


def serialize_case(case: ClinicalCase) -> str:
    """Human-diffable document text; parse_case(serialize_case(c)) == c."""
    return json.dumps(case_to_doc(case), indent=2, ensure_ascii=False) + "\n"
