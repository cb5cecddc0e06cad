"""Shared fixtures: the bundled reference case, scripts, and case builders."""

from __future__ import annotations

import json
import random

import pytest

from clinsim import data_path, load_case, parse_case
from clinsim.case_model import ClinicalCase
from clinsim.service import SessionStore


@pytest.fixture(scope="session")
def reference_case() -> ClinicalCase:
    return load_case(data_path("cases", "chestpain-01.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def reference_case_doc() -> dict:
    return json.loads(data_path("cases", "chestpain-01.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def good_script() -> dict:
    return json.loads(
        data_path("scripts", "chestpain-01-good-student.json").read_text(encoding="utf-8")
    )


@pytest.fixture()
def store(reference_case) -> SessionStore:
    s = SessionStore()
    s.add_case(reference_case)
    return s


@pytest.fixture(scope="session")
def corpus_root():
    return data_path("re_corpus")


def minimal_case_doc(**overrides) -> dict:
    """A tiny but fully valid case document; override any top-level key."""
    doc = {
        "format": 1,
        "case_id": "mini-01",
        "title": "Minimal case",
        "demographics": {"age": 40, "sex": "female", "history": []},
        "chief_complaint": "Headache",
        "hidden_diagnosis": "migraine",
        "differential": ["migraine", "tension_headache"],
        "symptom_script": [
            {
                "entry_id": "onset",
                "keywords": ["when", "start"],
                "response_text": "It started this morning.",
                "reveals": ["onset_today"],
            }
        ],
        "exam_findings": {
            "neuro": {
                "exam_id": "neuro",
                "label": "Neurological exam",
                "result_text": "No focal deficits.",
                "finding_ids": ["neuro_normal"],
            }
        },
        "test_catalog": {
            "ct_head": {
                "test_id": "ct_head",
                "modality": "imaging",
                "label": "CT head",
                "result_text": "No acute intracranial abnormality.",
                "finding_ids": ["ct_normal"],
                "turnaround": "immediate",
            }
        },
        "evidence_links": [
            {"disease": "migraine", "finding": "onset_today", "weight": 0.5},
            {"disease": "tension_headache", "finding": "neuro_normal", "weight": 0.25},
        ],
        "intervention_protocol": [
            {
                "intervention_id": "analgesia",
                "label": "Simple analgesia",
                "indicated_if": ["onset_today"],
                "contraindicated_if": [],
                "reason_code": "symptom_control",
                "outcome_text": "The headache improves.",
            }
        ],
        "rubric": [
            {
                "item_id": "hx_any",
                "description": "Asked any history question",
                "category": "history",
                "required_events": [{"kind": "action_of_kind", "action": "ask_patient"}],
                "weight": 1,
            }
        ],
        "forbidden_terms": ["migraine"],
        "rule_out_threshold": -2.0,
    }
    doc.update(overrides)
    return doc


def parse_doc(doc: dict) -> ClinicalCase:
    return parse_case(json.dumps(doc))


def random_case(rng: random.Random, index: int = 0, extreme_weights: bool = True) -> ClinicalCase:
    """A synthetic case with random weights, for scoring fuzz."""
    n_diseases = rng.randint(2, 5)
    n_findings = rng.randint(3, 8)
    diseases = [f"d{i}" for i in range(n_diseases)]
    findings = [f"f{i}" for i in range(n_findings)]
    links = []
    for d in diseases:
        for f in findings:
            if rng.random() < 0.7:
                weight = rng.uniform(-3.0, 3.0)
                if extreme_weights and rng.random() < 0.05:
                    weight *= 1e6  # occasional extreme magnitude
                links.append({"disease": d, "finding": f, "weight": weight})
    if not links:
        links.append({"disease": diseases[0], "finding": findings[0], "weight": 1.0})
    doc = minimal_case_doc(
        case_id=f"fuzz-{index:04d}",
        hidden_diagnosis=diseases[0],
        differential=diseases,
        symptom_script=[
            {
                "entry_id": "all",
                "keywords": ["tell"],
                "response_text": "Everything at once.",
                "reveals": findings,
            }
        ],
        evidence_links=links,
        forbidden_terms=[diseases[0]],
        rule_out_threshold=-rng.uniform(0.5, 5.0),
        intervention_protocol=[],
    )
    return parse_doc(doc)
