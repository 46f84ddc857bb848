import json
from dataclasses import replace
import random

import pytest

from plead.delivery import (
    DeliveryEngine,
    Event,
    EventKind,
    Timing,
    actions_to_jsonl,
    audience,
    fires,
    has_decision,
    read_events,
)
from plead.errors import MalformedEvent, StaleGraph, UnknownSubject
from plead.provenance import ingest
from plead.registry import build_registry
from plead.taxonomy import Autonomy, Confidentiality, Perspective

import gen
import world

SUBJECT = "applications_no/437"
CATEGORY = {"processing_announced": "processing", "decision_made": "decision", "request_received": "action", "action_performed": "action"}


def expected_pairs(registry, e):
    """Brute force over the registry, written without the engine's helpers."""
    out = []
    for req in registry:
        c = req.classification
        if c.trigger.kind.value != CATEGORY[e.kind.value] or c.trigger.event != e.event_name:
            continue
        if c.autonomy is Autonomy.REACTIVE and not (e.kind is EventKind.REQUEST_RECEIVED and e.requirement == req.id):
            continue
        for rc in c.recipients:
            if e.kind is EventKind.REQUEST_RECEIVED and e.requester not in (rc.name, rc.alias):
                continue
            if c.content.confidentiality is Confidentiality.CONFIDENTIAL and rc.is_outward:
                continue
            out.append((req.id, rc.name))
    return out


def pairs(actions):
    return [(a.requirement_id, a.recipients[0].name) for a in actions]


def test_ex_ante_schedule_fires_processing_rows(engine, gdpr, trail, events):
    announce = events[0]
    actions = engine.schedule_ex_ante(announce, trail)
    want = [
        r.id for r in gdpr
        if r.classification.perspective is Perspective.EX_ANTE and r.classification.autonomy is Autonomy.PROACTIVE
        and r.classification.trigger.event == announce.event_name
    ]
    assert len(want) == 7
    assert sorted({a.requirement_id for a in actions}) == sorted(want)
    assert all(a.timing is Timing.IMMEDIATE and a.explanation is not None for a in actions)


def test_ex_ante_bindings_exclude_decision_downstream(engine, trail, events):
    downstream = trail.decision_downstream()
    assert downstream
    for a in engine.schedule_ex_ante(events[0], trail):
        assert not (a.explanation.bindings.node_ids() & downstream)


def test_schedule_ex_ante_rejects_other_events(engine, trail, events):
    with pytest.raises(MalformedEvent):
        engine.schedule_ex_ante(events[1], trail)


def test_decision_made_reaches_data_subject(engine, trail, events):
    actions = engine.on_event(events[1], trail)
    assert ("explanation_about_the_decision_reached", "data_subject") in pairs(actions)
    assert "why_this_decision_was_reached" not in {a.requirement_id for a in actions}


def test_decision_made_matches_brute_force(engine, gdpr, trail, events):
    for e in events:
        assert pairs(engine.on_event(e, trail)) == expected_pairs(gdpr, e)


def test_reactive_request_fires_only_for_requester(engine, trail, events):
    request = events[2]
    actions = engine.on_event(request, trail)
    assert pairs(actions) == [("why_this_decision_was_reached", "data_subject")]
    assert actions[0].timing is Timing.ON_REQUEST_FULFILMENT
    assert "This is because of negative credit history." in actions[0].explanation.text


def test_request_by_alias(gdpr, patterns, templates, trail, events):
    req = gdpr["why_this_decision_was_reached"]
    c = req.classification
    aliased = replace(c, recipients=tuple(replace(rc, alias="consumer") for rc in c.recipients))
    reg = build_registry([replace(req, classification=aliased, parent=None)])
    e = replace(events[2], requester="consumer")
    actions = DeliveryEngine(reg, patterns, templates).on_event(e, trail)
    assert pairs(actions) == [("why_this_decision_was_reached", "data_subject")]


def test_request_for_other_requirement_fires_nothing(engine, trail, events):
    e = Event(EventKind.REQUEST_RECEIVED, events[2].event_name, SUBJECT, events[2].occurred_at, "data_subject", "nope")
    assert engine.on_event(e, trail) == []


def test_empty_registry_gives_no_actions(patterns, templates, trail, events):
    eng = DeliveryEngine(build_registry([]), patterns, templates)
    assert eng.replay(events, trail) == []


def test_stale_graph_without_decision(engine, trail, events):
    pre = trail.pre_decision()
    with pytest.raises(StaleGraph):
        engine.on_event(events[1], pre)


def test_unknown_subject(engine, trail, events):
    e = Event(EventKind.DECISION_MADE, events[1].event_name, "applications/none", events[1].occurred_at)
    with pytest.raises(UnknownSubject):
        engine.on_event(e, trail)


def test_no_confidential_to_outward(engine, gdpr, trail, events):
    actions = engine.replay(events, trail)
    for a in actions:
        if gdpr[a.requirement_id].classification.content.confidentiality is Confidentiality.CONFIDENTIAL:
            assert not any(rc.is_outward for rc in a.recipients)


def test_replay_deterministic(gdpr, patterns, templates, trail, events):
    runs = [actions_to_jsonl(DeliveryEngine(gdpr, patterns, templates, "2021-03-01T00:00:00Z").replay(events, trail)) for _ in range(2)]
    assert runs[0] == runs[1]


def test_generated_at_defaults_to_event_time(gdpr, patterns, templates, trail, events):
    actions = DeliveryEngine(gdpr, patterns, templates).on_event(events[1], trail)
    assert {a.explanation.generated_at for a in actions} == {"2021-01-03T02:10:00Z"}


def test_duplicates_flagged(engine, trail, events):
    first = engine.on_event(events[1], trail)
    second = engine.on_event(events[1], trail)
    assert not any(a.duplicate for a in first)
    assert all(a.duplicate for a in second)
    assert pairs(first) == pairs(second)


def test_actions_jsonl_shape(engine, trail, events):
    lines = actions_to_jsonl(engine.replay(events, trail)).splitlines()
    assert len(lines) == 24
    rec = json.loads(lines[0])
    assert {"requirement", "subject", "recipients", "timing", "priority", "event", "duplicate"} <= rec.keys()


def test_has_decision(trail):
    assert has_decision(trail, SUBJECT)
    assert not has_decision(trail.pre_decision(), SUBJECT)
    assert not has_decision(trail, "missing")


@pytest.mark.parametrize(
    "line",
    [
        "not json",
        "[1]",
        '{"kind": "nope", "event": "e", "subject": "s", "at": "2021-01-01T00:00:00Z"}',
        '{"kind": "decision_made", "subject": "s", "at": "2021-01-01T00:00:00Z"}',
        '{"kind": "decision_made", "event": "e", "subject": "s", "at": "yesterday"}',
        '{"kind": "decision_made", "event": "e", "subject": "s", "at": "2021-01-01T00:00:00"}',
        '{"kind": "request_received", "event": "e", "subject": "s", "at": "2021-01-01T00:00:00Z"}',
        '{"kind": "decision_made", "event": "e", "subject": "s", "at": "2021-01-01T00:00:00Z", "requester": 3}',
    ],
)
def test_malformed_events(line):
    with pytest.raises(MalformedEvent):
        read_events(line)


def test_event_json_round_trip(events):
    assert read_events("\n".join(json.dumps(e.to_json()) for e in events)) == events


@pytest.mark.parametrize("seed", range(40))
def test_random_streams_match_brute_force(seed):
    rng = random.Random(seed)
    reg = gen.registry(rng, rng.randint(0, 8))
    g, _ = world.trail(rng)
    eng = DeliveryEngine(reg, world.patterns(reg), world.templates(reg), "2021-03-01T00:00:00Z")
    seen = set()
    for _ in range(25):
        e = world.event(rng, reg)
        actions = eng.on_event(e, g)
        want = expected_pairs(reg, e)
        assert pairs(actions) == want
        assert [fires(r, e) for r in reg].count(True) >= len({p[0] for p in want})
        for a, key in zip(actions, want):
            assert a.duplicate == (key in seen)
            seen.add(key)
            assert a.explanation is not None
        assert all(set(audience(r, e)) <= set(r.classification.recipients) for r in reg)
