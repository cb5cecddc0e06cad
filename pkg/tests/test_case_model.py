"""Case file parsing, validation, and round-trip serialization."""

from __future__ import annotations

import dataclasses
import json

import pytest

from clinsim.case_model import (
    EvidenceLink,
    parse_case,
    serialize_case,
    validate_case,
)
from clinsim.errors import CaseParseError, CaseReferenceError, InvalidCaseError
from clinsim import load_case

from conftest import minimal_case_doc, parse_doc


def test_reference_case_shape(reference_case):
    assert len(reference_case.test_catalog) >= 2
    assert "mi" in reference_case.differential
    assert reference_case.hidden_diagnosis in reference_case.differential
    assert reference_case.case_id == "chestpain-01"


def test_reference_case_validates_clean(reference_case):
    assert validate_case(reference_case) == []


def test_round_trip_identity(reference_case):
    doc = serialize_case(reference_case)
    again = parse_case(doc)
    assert again == reference_case
    assert serialize_case(again) == doc


def test_empty_rubric_is_parse_error():
    doc = minimal_case_doc(rubric=[])
    with pytest.raises(CaseParseError, match="rubric must be non-empty"):
        parse_doc(doc)


def test_missing_key_rejected():
    doc = minimal_case_doc()
    del doc["title"]
    with pytest.raises(CaseParseError, match="missing required key 'title'"):
        parse_doc(doc)


def test_unknown_key_rejected():
    doc = minimal_case_doc(extra_field=1)
    with pytest.raises(CaseParseError, match="unknown key 'extra_field'"):
        parse_doc(doc)


def test_unknown_format_version_rejected():
    doc = minimal_case_doc(format=2)
    with pytest.raises(CaseParseError, match="unsupported format version"):
        parse_doc(doc)


def test_invalid_json_names_line():
    with pytest.raises(CaseParseError, match="invalid JSON"):
        parse_case("{not json")


def test_bad_modality_rejected():
    doc = minimal_case_doc()
    doc["test_catalog"]["ct_head"]["modality"] = "telepathy"
    with pytest.raises(CaseParseError, match="laboratory, imaging, procedure"):
        parse_doc(doc)


def test_delayed_turnaround_rejected():
    doc = minimal_case_doc()
    doc["test_catalog"]["ct_head"]["turnaround"] = "next_day"
    with pytest.raises(CaseParseError, match="immediate"):
        parse_doc(doc)


def test_dangling_evidence_disease_is_reference_error():
    doc = minimal_case_doc()
    doc["evidence_links"].append({"disease": "ghost", "finding": "onset_today", "weight": 1.0})
    with pytest.raises(CaseReferenceError, match="ghost"):
        parse_doc(doc)


def test_dangling_matcher_target_is_reference_error():
    doc = minimal_case_doc()
    doc["rubric"][0]["required_events"] = [
        {"kind": "action_of_kind", "action": "order_test", "target": "nonexistent_test"}
    ]
    with pytest.raises(CaseReferenceError, match="nonexistent_test"):
        parse_doc(doc)


def test_duplicate_evidence_pair_rejected():
    doc = minimal_case_doc()
    doc["evidence_links"].append(dict(doc["evidence_links"][0]))
    with pytest.raises(CaseParseError, match="duplicate"):
        parse_doc(doc)


def test_overlapping_intervention_sets_rejected():
    doc = minimal_case_doc()
    doc["intervention_protocol"][0]["contraindicated_if"] = ["onset_today"]
    with pytest.raises(CaseParseError, match="overlap"):
        parse_doc(doc)


def test_hidden_display_name_auto_added():
    doc = minimal_case_doc(forbidden_terms=[])
    case = parse_doc(doc)
    assert "migraine" in case.forbidden_terms
    # and the augmented case still round-trips
    assert parse_case(serialize_case(case)) == case


def test_validator_flags_script_leak(reference_case):
    leaky = dataclasses.replace(
        reference_case,
        symptom_script=reference_case.symptom_script[:-1]
        + (
            dataclasses.replace(
                reference_case.symptom_script[-1],
                response_text="The doctor said it is GERD, probably.",
            ),
        ),
    )
    diagnostics = [d for d in validate_case(leaky) if d.severity == "error"]
    assert len(diagnostics) == 1
    assert "relief" in diagnostics[0].message  # cites the entry id
    assert "gerd" in diagnostics[0].message


def test_validator_names_dangling_disease(reference_case):
    broken = dataclasses.replace(
        reference_case,
        evidence_links=reference_case.evidence_links
        + (EvidenceLink(disease="aliens", finding="troponin_normal", weight=1.0),),
    )
    diagnostics = [d for d in validate_case(broken) if d.severity == "error"]
    assert len(diagnostics) == 1
    assert "aliens" in diagnostics[0].message


def test_validator_flags_positive_threshold(reference_case):
    broken = dataclasses.replace(reference_case, rule_out_threshold=1.0)
    messages = [d.message for d in validate_case(broken) if d.severity == "error"]
    assert any("negative" in m for m in messages)


def test_diagnostics_sorted_by_path(reference_case):
    broken = dataclasses.replace(
        reference_case,
        rule_out_threshold=1.0,
        evidence_links=reference_case.evidence_links
        + (EvidenceLink(disease="aliens", finding="troponin_normal", weight=1.0),),
    )
    diagnostics = validate_case(broken)
    assert [(d.path, d.message) for d in diagnostics] == sorted(
        (d.path, d.message) for d in diagnostics
    )


def test_load_case_raises_on_validation_errors():
    doc = minimal_case_doc(rule_out_threshold=5.0)
    with pytest.raises(InvalidCaseError) as excinfo:
        load_case(json.dumps(doc))
    assert excinfo.value.diagnostics


def test_load_time_leak_check(reference_case):
    """No student-visible case text contains a forbidden term."""
    texts = [e.response_text for e in reference_case.symptom_script]
    texts += [x.result_text for x in reference_case.exam_findings.values()]
    texts += [t.result_text for t in reference_case.test_catalog.values()]
    texts += [r.outcome_text for r in reference_case.intervention_protocol]
    for text in texts:
        low = text.lower()
        assert not any(term in low for term in reference_case.forbidden_terms)


def test_valid_case_makes_agent_ops_total(reference_case):
    """validate_case == [] implies every agent operation works on the case."""
    from clinsim import ObservationSet, apply_intervention, exam_perform, order_test

    obs = ObservationSet()
    for exam_id in reference_case.exam_findings:
        exam_perform(reference_case, obs, exam_id)
    for test_id in reference_case.test_catalog:
        order_test(reference_case, obs, test_id)
    for rule in reference_case.intervention_protocol:
        apply_intervention(reference_case, obs, rule.intervention_id)
