"""Decide which explanations fire for an event, for whom, and render them."""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import MalformedEvent, MissingContent, StaleGraph, UnknownSubject
from .matcher import ContentPattern, PatternMapping, bind, compile_patterns
from .provenance import DECISION_TYPE, NodeKind, ProvGraph, parse_instant
from .registry import ExplanationRequirement, Registry
from .render import ExplanationInstance, RenderMode, Template, check_confidentiality, render, select_template
from .taxonomy import Autonomy, Confidentiality, Perspective, Priority, RecipientClass, TriggerKind


class EventKind(str, Enum):
    PROCESSING_ANNOUNCED = "processing_announced"
    DECISION_MADE = "decision_made"
    REQUEST_RECEIVED = "request_received"
    ACTION_PERFORMED = "action_performed"

    @property
    def category(self) -> TriggerKind:
        return _CATEGORY[self]


# A request from a recipient is itself an action the trigger dimension can name.
_CATEGORY = {
    EventKind.PROCESSING_ANNOUNCED: TriggerKind.PROCESSING,
    EventKind.DECISION_MADE: TriggerKind.DECISION,
    EventKind.REQUEST_RECEIVED: TriggerKind.ACTION,
    EventKind.ACTION_PERFORMED: TriggerKind.ACTION,
}


class Timing(str, Enum):
    IMMEDIATE = "immediate"
    ON_REQUEST_FULFILMENT = "on_request_fulfilment"


@dataclass(frozen=True)
class Event:
    kind: EventKind
    event_name: str
    subject_id: str
    occurred_at: str
    requester: str | None = None
    requirement: str | None = None

    def __post_init__(self) -> None:
        if self.kind is EventKind.REQUEST_RECEIVED and not self.requester:
            raise MalformedEvent("a request_received event needs a requester")

    @classmethod
    def from_json(cls, rec: Mapping[str, Any]) -> Event:
        try:
            kind = EventKind(rec.get("kind"))
        except ValueError:
            raise MalformedEvent(f"unknown event kind {rec.get('kind')!r}") from None
        for key in ("event", "subject", "at"):
            if not isinstance(rec.get(key), str) or not rec[key]:
                raise MalformedEvent(f"missing or non-string {key!r}")
        try:
            parse_instant(rec["at"])
        except ValueError as exc:
            raise MalformedEvent(f"bad 'at': {exc}") from None
        for key in ("requester", "requirement"):
            if rec.get(key) is not None and not isinstance(rec[key], str):
                raise MalformedEvent(f"{key!r} must be a string")
        return cls(kind, rec["event"], rec["subject"], rec["at"], rec.get("requester"), rec.get("requirement"))

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind.value, "event": self.event_name, "subject": self.subject_id, "at": self.occurred_at}
        if self.requester is not None:
            out["requester"] = self.requester
        if self.requirement is not None:
            out["requirement"] = self.requirement
        return out


def read_events(lines: Iterable[str] | str) -> list[Event]:
    if isinstance(lines, str):
        lines = lines.splitlines()
    events = []
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            if not isinstance(rec, Mapping):
                raise MalformedEvent("event must be a JSON object")
            events.append(Event.from_json(rec))
        except json.JSONDecodeError as exc:
            raise MalformedEvent(f"line {n}: invalid JSON: {exc.msg}") from None
        except MalformedEvent as exc:
            raise MalformedEvent(f"line {n}: {exc}") from None
    return events


def read_events_file(path: str | Path) -> list[Event]:
    with open(path, encoding="utf-8") as fh:
        return read_events(fh)


@dataclass(frozen=True)
class DeliveryAction:
    requirement_id: str
    subject_id: str
    recipients: tuple[RecipientClass, ...]
    timing: Timing
    priority: Priority
    explanation: ExplanationInstance | None
    deferred: str | None = None
    event: str = ""
    duplicate: bool = False

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "requirement": self.requirement_id,
            "subject": self.subject_id,
            "recipients": [r.name for r in self.recipients],
            "timing": self.timing.value,
            "priority": self.priority.value,
            "event": self.event,
            "duplicate": self.duplicate,
        }
        if self.explanation is not None:
            out["template"] = self.explanation.template_id
            out["text"] = self.explanation.text
            out["gaps"] = list(self.explanation.gaps)
            out["generated_at"] = self.explanation.generated_at
        else:
            out["deferred"] = self.deferred
        return out


def fires(req: ExplanationRequirement, e: Event) -> bool:
    """Whether ``req`` is triggered by ``e``, before any recipient filtering."""
    c = req.classification
    if c.trigger.kind is not e.kind.category or c.trigger.event != e.event_name:
        return False
    if c.autonomy is Autonomy.PROACTIVE:
        return True
    return e.kind is EventKind.REQUEST_RECEIVED and e.requirement == req.id


def _matches(rc: RecipientClass, name: str) -> bool:
    return name in (rc.name, rc.alias)


def audience(req: ExplanationRequirement, e: Event) -> list[RecipientClass]:
    c = req.classification
    if e.kind is EventKind.REQUEST_RECEIVED:
        chosen = [rc for rc in c.recipients if _matches(rc, e.requester or "")]
    else:
        chosen = list(c.recipients)
    if c.content.confidentiality is Confidentiality.CONFIDENTIAL:
        chosen = [rc for rc in chosen if not rc.is_outward]
    return chosen


def has_decision(g: ProvGraph, subject: str) -> bool:
    if subject not in g:
        return False
    scope = g.subject_index(subject) | {subject}
    return any(g.nodes[n].kind is NodeKind.ENTITY and DECISION_TYPE in g.nodes[n].types for n in scope)


class DeliveryEngine:
    """Stateful front end: caches compiled patterns and remembers what was already delivered."""

    def __init__(
        self,
        registry: Registry,
        patterns: PatternMapping,
        templates: Sequence[Template],
        at: datetime | str | None = None,
    ) -> None:
        self.registry = registry
        self.patterns = patterns
        self.templates = tuple(templates)
        self.at = at
        self._compiled: dict[str, list[ContentPattern]] = {}
        self._delivered: set[tuple[str, str, str]] = set()

    def compiled(self, req: ExplanationRequirement) -> list[ContentPattern]:
        if req.id not in self._compiled:
            self._compiled[req.id] = compile_patterns(req, self.patterns)
        return self._compiled[req.id]

    def fired(self, e: Event) -> list[ExplanationRequirement]:
        return [req for req in self.registry if fires(req, e)]

    def _deliver(self, req: ExplanationRequirement, e: Event, g: ProvGraph) -> list[DeliveryAction]:
        c = req.classification
        if e.subject_id not in g:
            raise UnknownSubject(e.subject_id)
        if c.perspective is Perspective.EX_POST:
            if not has_decision(g, e.subject_id):
                raise StaleGraph(e.subject_id)
            view = g
        else:
            view = g.pre_decision()
        timing = Timing.IMMEDIATE if c.autonomy is Autonomy.PROACTIVE else Timing.ON_REQUEST_FULFILMENT
        actions = []
        for rc in audience(req, e):
            check_confidentiality(req, rc)
            bindings = bind(self.compiled(req), view, e.subject_id)
            template = select_template(self.templates, req, rc)
            mode = RenderMode.STRICT if rc.is_outward else RenderMode.GAP_MARKED
            explanation, deferred = None, None
            try:
                explanation = render(template, bindings, req, rc, mode, self.at or e.occurred_at)
            except MissingContent as exc:
                deferred = str(exc)
            key = (req.id, e.subject_id, rc.name)
            duplicate = key in self._delivered
            self._delivered.add(key)
            actions.append(
                DeliveryAction(req.id, e.subject_id, (rc,), timing, c.priority, explanation, deferred, e.event_name, duplicate)
            )
        return actions

    def on_event(self, e: Event, g: ProvGraph) -> list[DeliveryAction]:
        out: list[DeliveryAction] = []
        for req in self.fired(e):
            out.extend(self._deliver(req, e, g))
        return out

    def schedule_ex_ante(self, announce: Event, g: ProvGraph) -> list[DeliveryAction]:
        if announce.kind is not EventKind.PROCESSING_ANNOUNCED:
            raise MalformedEvent(f"expected processing_announced, got {announce.kind.value}")
        out: list[DeliveryAction] = []
        for req in self.fired(announce):
            c = req.classification
            if c.perspective is Perspective.EX_ANTE and c.autonomy is Autonomy.PROACTIVE:
                out.extend(self._deliver(req, announce, g))
        return out

    def replay(self, events: Iterable[Event], g: ProvGraph) -> list[DeliveryAction]:
        out: list[DeliveryAction] = []
        for e in events:
            out.extend(self.on_event(e, g))
        return out


def on_event(
    e: Event,
    r: Registry,
    g: ProvGraph,
    templates: Sequence[Template],
    patterns: PatternMapping,
    at: datetime | str | None = None,
) -> list[DeliveryAction]:
    return DeliveryEngine(r, patterns, templates, at).on_event(e, g)


def schedule_ex_ante(
    r: Registry,
    announce: Event,
    g: ProvGraph,
    templates: Sequence[Template],
    patterns: PatternMapping,
    at: datetime | str | None = None,
) -> list[DeliveryAction]:
    return DeliveryEngine(r, patterns, templates, at).schedule_ex_ante(announce, g)


def actions_to_jsonl(actions: Iterable[DeliveryAction]) -> str:
    return "".join(json.dumps(a.to_json(), ensure_ascii=False, sort_keys=True) + "\n" for a in actions)
