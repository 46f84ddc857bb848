import json

import pytest

from plead.errors import BadSelector, UnknownSubject, UnmappedItem
from plead.matcher import bind, compile_patterns, ico_coverage, load_coverage_map
from plead.provenance import ingest

APP = "applications_no/437"


def test_key_decision_points_pattern(gdpr, patterns):
    (p,) = compile_patterns(gdpr["key_decision_points"], patterns)
    assert p.item_id == "key_data_values"
    assert p.selector.types == {"score_factor"}
    assert {"value", "weight"} <= set(p.extract)


def test_pattern_per_item_in_order(gdpr, patterns):
    req = gdpr["verification_of_the_results"]
    assert [p.item_id for p in compile_patterns(req, patterns)] == list(req.classification.content.item_ids)


def test_every_requirement_is_mapped(gdpr, patterns):
    for req in gdpr:
        assert len(compile_patterns(req, patterns)) == len(req.classification.content.minimum)


def test_unmapped_item(gdpr, patterns):
    partial = {k: dict(v) for k, v in patterns.items()}
    del partial["verification_of_the_results"]["audit_trails"]
    with pytest.raises(UnmappedItem):
        compile_patterns(gdpr["verification_of_the_results"], partial)


@pytest.mark.parametrize(
    "spec, reason",
    [
        ({"selector": {"kind": "thing"}, "extract": ["x"]}, "thing"),
        ({"selector": {}, "extract": []}, "extract"),
        ({"selector": {"bogus": 1}, "extract": ["x"]}, "bogus"),
        ({"selector": {}, "extract": ["x"], "required": "yes"}, "required"),
    ],
)
def test_bad_selector(gdpr, spec, reason):
    with pytest.raises(BadSelector) as exc:
        compile_patterns(gdpr["key_decision_points"], {"key_decision_points": {"key_data_values": spec}})
    assert reason in str(exc.value)


def test_bind_key_values(gdpr, patterns, trail):
    b = bind(compile_patterns(gdpr["key_decision_points"], patterns), trail, APP)
    values = {x.node_id: x.values["value"].value for x in b.bound("key_data_values")}
    assert values["credit_score/437"] == "715"
    assert values["factors/437/threshold"] == "750"
    assert not b.missing


def test_partition_and_determinism(gdpr, patterns, trail):
    for req in gdpr:
        pats = compile_patterns(req, patterns)
        b = bind(pats, trail, APP)
        assert set(b.bindings) | set(b.missing) == set(req.classification.content.item_ids)
        assert not set(b.bindings) & set(b.missing)
        assert bind(pats, trail, APP) == b


def test_lonely_subject_misses_required_items(gdpr, patterns):
    g = ingest([json.dumps({"rec": "node", "id": "solo", "kind": "entity"})])
    b = bind(compile_patterns(gdpr["key_decision_points"], patterns), g, "solo")
    assert b.missing == ("key_data_values",)
    assert not b.bindings


def test_optional_item_binds_empty(gdpr, patterns, trail):
    pats = compile_patterns(gdpr["business_rules_applied"], patterns)
    b = bind(pats, trail.restrict(n for n in trail.nodes if n != "processing/credit_screening"), APP)
    assert b.bound("processing_purposes") == ()
    assert "processing_purposes" in b.bindings and not b.missing


def test_unknown_subject(gdpr, patterns, trail):
    with pytest.raises(UnknownSubject):
        bind(compile_patterns(gdpr["key_decision_points"], patterns), trail, "applications_no/999")


def test_bind_does_not_mutate(gdpr, patterns, trail):
    before = trail.to_jsonl()
    bind(compile_patterns(gdpr["key_decision_points"], patterns), trail, APP)
    assert trail.to_jsonl() == before


def test_coverage_report(gdpr, patterns, trail, data_dir):
    cov = load_coverage_map((data_dir / "ico_coverage.json").read_text(encoding="utf-8"))
    runs = [bind(compile_patterns(r, patterns), trail, APP) for r in gdpr]
    report = ico_coverage(cov, runs)
    assert report.complete
    assert [e.number for e in report.entries] == [1, 2, 3, 4, 5, 6]
    empty = ico_coverage(cov, [])
    assert not empty.complete
