"""RDF encoding of the taxonomy vocabulary and of classified requirements."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CardinalityViolation, ParseError, UnserializableName
from .registry import ExplanationRequirement
from .taxonomy import (
    CORE_RECIPIENTS,
    Autonomy,
    Classification,
    Confidentiality,
    ContentItem,
    ContentSpec,
    Facing,
    Goal,
    Perspective,
    Priority,
    RecipientClass,
    Scope,
    Sensitivity,
    SourceKind,
    SourceRank,
    TriggerKind,
    TriggerSpec,
    vocabulary,
)
from .turtle import (
    DEFAULT_PREFIXES,
    IRI,
    OWL,
    PLEAD,
    RDF_TYPE,
    RDFS,
    XSD,
    Literal,
    Triple,
    TripleSet,
    TurtleWriter,
    local_name,
    parse_turtle,
)

EXPLANATION = "Explanation"
EXAMPLE = "example"

# Object properties in vocabulary order, keyed to their range class.
OBJECT_PROPERTIES: dict[str, str] = {d.rdf_property: d.rdf_class for d in vocabulary().dimensions}
SINGLE_VALUED = ("hasPerspective", "hasAutonomy", "hasScope", "hasPriority")

# Annotation properties carrying what the individual names alone cannot.
ANNOTATIONS = ("citation", "triggerKind", "facing", "recipientName", "recipientAlias", "itemId")

_SOURCE_STEMS = {
    SourceKind.PRIMARY_EXPLICIT: "explicit",
    SourceKind.PRIMARY_IMPLICIT: "implicit",
    SourceKind.SECONDARY: "secondary",
    SourceKind.TERTIARY: "tertiary",
}
_STEM_SOURCES = {v: k for k, v in _SOURCE_STEMS.items()}

ONTOLOGY_IRI = PLEAD.rstrip("#")


def plead(local: str) -> IRI:
    return IRI(PLEAD + local)


_TYPE = IRI(RDF_TYPE)
_LABEL = IRI(RDFS + "label")
_NAMED = IRI(OWL + "NamedIndividual")


def emit_vocabulary() -> TripleSet:
    """The light ontology: 10 classes, 9 object properties, plus annotations."""
    t: set[Triple] = set()
    t.add((IRI(ONTOLOGY_IRI), _TYPE, IRI(OWL + "Ontology")))
    t.add((plead(EXPLANATION), _TYPE, IRI(OWL + "Class")))
    t.add((plead(EXPLANATION), _LABEL, Literal("Explanation")))
    for dim in vocabulary().dimensions:
        cls = plead(dim.rdf_class)
        t.add((cls, _TYPE, IRI(OWL + "Class")))
        t.add((cls, _LABEL, Literal(dim.name)))
        prop = plead(dim.rdf_property)
        t.add((prop, _TYPE, IRI(OWL + "ObjectProperty")))
        t.add((prop, IRI(RDFS + "domain"), plead(EXPLANATION)))
        t.add((prop, IRI(RDFS + "range"), cls))
    ex = plead(EXAMPLE)
    t.add((ex, _TYPE, IRI(OWL + "DatatypeProperty")))
    t.add((ex, IRI(RDFS + "domain"), plead(EXPLANATION)))
    t.add((ex, IRI(RDFS + "range"), IRI(XSD + "string")))
    for name in ANNOTATIONS:
        t.add((plead(name), _TYPE, IRI(OWL + "AnnotationProperty")))
    return TripleSet(frozenset(t), dict(DEFAULT_PREFIXES))


def vocabulary_counts(ts: TripleSet) -> tuple[int, int]:
    classes = {s for s, p, o in ts.triples if p == _TYPE and o == IRI(OWL + "Class")}
    props = {s for s, p, o in ts.triples if p == _TYPE and o == IRI(OWL + "ObjectProperty")}
    return len(classes), len(props)


def vocabulary_turtle() -> str:
    ts = emit_vocabulary()
    return TurtleWriter(ts.prefixes).document(ts.triples)


# serialization -------------------------------------------------------------


def default_class_name(requirement_id: str) -> str:
    return "".join(part[:1].upper() + part[1:] for part in re.split(r"[^A-Za-z0-9]+", requirement_id) if part)


def _slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_")


def source_individual(s: SourceRank) -> str:
    stem = _SOURCE_STEMS[s.kind]
    slug = _slug(s.citation)
    return f"{stem}_{slug}" if slug else stem


class _Names:
    """Allocates individual names and rejects clashes between different meanings."""

    def __init__(self) -> None:
        self.meaning: dict[str, object] = {}
        self.counters: Counter[str] = Counter()

    def claim(self, name: str, meaning: object) -> str:
        local_name(name)
        prior = self.meaning.setdefault(name, meaning)
        if prior != meaning:
            raise UnserializableName(name, f"used for both {prior!r} and {meaning!r}")
        return name

    def numbered(self, stem: str, meaning: object) -> str:
        self.counters[stem] += 1
        return self.claim(f"{stem}{self.counters[stem]}", meaning)


def requirement_triples(reqs: Sequence[ExplanationRequirement]) -> tuple[set[Triple], list[IRI]]:
    names = _Names()
    t: set[Triple] = set()
    order: list[IRI] = []

    def individual(name: str, cls: str) -> IRI:
        node = plead(name)
        t.add((node, _TYPE, _NAMED))
        t.add((node, _TYPE, plead(cls)))
        return node

    for req in reqs:
        c = req.classification
        subj = plead(names.claim(req.id, ("requirement", req.id)))
        order.append(subj)
        cls_name = req.rdf_class or default_class_name(req.id)
        cls = plead(names.claim(cls_name, ("class", cls_name)))
        t.add((cls, _TYPE, IRI(OWL + "Class")))
        t.add((cls, IRI(RDFS + "subClassOf"), plead(EXPLANATION)))
        t.add((subj, _TYPE, _NAMED))
        t.add((subj, _TYPE, cls))
        t.add((subj, _LABEL, Literal(req.label)))

        def link(prop: str, obj: IRI) -> None:
            t.add((subj, plead(prop), obj))

        for s in c.sources:
            node = individual(names.claim(source_individual(s), ("source", s)), "Source")
            if s.citation:
                t.add((node, plead("citation"), Literal(s.citation)))
            link("hasSource", node)
        for prop, cls_, value in (
            ("hasPerspective", "Perspective", c.perspective.value),
            ("hasAutonomy", "Autonomy", c.autonomy.value),
            ("hasScope", "Scope", c.scope.value),
            ("hasPriority", "Priority", c.priority.value),
            ("hasContent", "Content", c.content.sensitivity.value),
            ("hasContent", "Content", c.content.confidentiality.value),
        ):
            link(prop, individual(names.claim(value, ("value", value)), cls_))

        trig = individual(names.claim(c.trigger.event, ("trigger", c.trigger)), "Trigger")
        t.add((trig, plead("triggerKind"), Literal(c.trigger.kind.value)))
        link("hasTrigger", trig)

        for item in c.content.minimum:
            node = individual(names.numbered("minimum", ("item", req.id, item.id)), "Content")
            t.add((node, plead("itemId"), Literal(item.id)))
            t.add((node, _LABEL, Literal(item.description)))
            link("hasContent", node)
        for g in c.goals:
            link("hasGoal", individual(names.numbered(g.value, ("goal", req.id, g)), "ExplainabilityGoal"))
        for rc in c.recipients:
            node = individual(names.numbered(rc.alias or rc.name, ("recipient", req.id, rc)), "IntendedRecipient")
            t.add((node, plead("recipientName"), Literal(rc.name)))
            t.add((node, plead("facing"), Literal(rc.facing.value)))
            if rc.alias:
                t.add((node, plead("recipientAlias"), Literal(rc.alias)))
            link("hasIntendedRecipient", node)
        if req.example_text is not None:
            t.add((subj, plead(EXAMPLE), Literal(req.example_text)))
    return t, order


def to_turtle(reqs: Iterable[ExplanationRequirement]) -> str:
    """Serialize requirements as named individuals.

    Requirement instances come first in input order, each preceded by a
    ``###`` comment with its IRI; every other subject follows in IRI order.
    """
    triples, order = requirement_triples(list(reqs))
    rest = sorted({s for s, _, _ in triples} - set(order))
    writer = TurtleWriter(DEFAULT_PREFIXES)
    if not order:
        return writer.header()
    head = writer.header()
    body = "".join("\n" + writer.block(s, triples, comment=True) for s in order)
    tail = "".join("\n" + writer.block(s, triples) for s in rest)
    return head + body + tail


# parsing -------------------------------------------------------------------


def _short(term) -> str:
    if isinstance(term, IRI) and term.value.startswith(PLEAD):
        return term.value[len(PLEAD) :]
    return term.value


@dataclass(frozen=True)
class ParsedInstance:
    name: str
    types: tuple[str, ...]
    properties: dict[str, tuple[str, ...]]
    example: str | None = None

    def values(self, prop: str) -> tuple[str, ...]:
        return self.properties.get(prop, ())


def instances(ts: TripleSet) -> list[ParsedInstance]:
    named = {s for s, p, o in ts.triples if p == _TYPE and o == _NAMED}
    out = []
    for subj in sorted(named):
        props: dict[str, list[str]] = {}
        for _, p, o in ts.match(s=subj):
            local = _short(p)
            if local in OBJECT_PROPERTIES and isinstance(o, IRI):
                props.setdefault(local, []).append(_short(o))
        if not props:
            continue
        for prop in SINGLE_VALUED:
            if len(props.get(prop, ())) > 1:
                raise CardinalityViolation(_short(subj), prop)
        examples = [o.value for o in ts.objects(subj, plead(EXAMPLE)) if isinstance(o, Literal)]
        types = tuple(_short(o) for o in ts.objects(subj, _TYPE) if o != _NAMED)
        out.append(
            ParsedInstance(
                _short(subj),
                types,
                {k: tuple(sorted(v)) for k, v in sorted(props.items())},
                examples[0] if examples else None,
            )
        )
    return out


def from_turtle(text: str) -> list[ParsedInstance]:
    return instances(parse_turtle(text))


_SUFFIX_RE = re.compile(r"^(.*?)(\d+)$")


def _literal(ts: TripleSet, subj: IRI, prop: IRI, where: str, default: str | None = None) -> str:
    values = [o.value for o in ts.objects(subj, prop) if isinstance(o, Literal)]
    if not values:
        if default is not None:
            return default
        raise ParseError(where, f"missing {_short(prop)}")
    return values[0]


def _enum_token(cls, values: Iterable[str], where: str):
    tokens = {m.value for m in cls}
    hits = [v for v in values if v in tokens]
    if len(hits) != 1:
        raise ParseError(where, f"expected exactly one {cls.__name__} value, got {hits}")
    return cls(hits[0])


def requirements_from_ttl(ts: TripleSet, recipient_extensions: Iterable[RecipientClass] = ()) -> list[ExplanationRequirement]:
    """Rebuild :class:`ExplanationRequirement` values from an instance document."""
    extensions = {e.name: e for e in recipient_extensions}
    out = []
    for inst in instances(ts):
        subj = plead(inst.name)
        where = f"plead:{inst.name}"
        sources = []
        for name in inst.values("hasSource"):
            stem = name.split("_", 1)[0]
            if stem not in _STEM_SOURCES:
                raise ParseError(where, f"unrecognised source individual {name!r}")
            sources.append(SourceRank(_STEM_SOURCES[stem], _literal(ts, plead(name), plead("citation"), where, "")))

        content_vals = inst.values("hasContent")
        items = []
        for name in content_vals:
            node = plead(name)
            if not ts.objects(node, plead("itemId")):
                continue
            m = _SUFFIX_RE.match(name)
            order = int(m.group(2)) if m else 0
            items.append(
                (order, ContentItem(_literal(ts, node, plead("itemId"), where), _literal(ts, node, _LABEL, where)))
            )
        items.sort(key=lambda pair: pair[0])

        goals = []
        for name in inst.values("hasGoal"):
            m = _SUFFIX_RE.match(name)
            token = m.group(1) if m else name
            try:
                goals.append(Goal(token))
            except ValueError:
                raise ParseError(where, f"unrecognised goal individual {name!r}") from None

        recipients = []
        for name in inst.values("hasIntendedRecipient"):
            node = plead(name)
            rname = _literal(ts, node, plead("recipientName"), where)
            facing = Facing(_literal(ts, node, plead("facing"), where))
            alias = _literal(ts, node, plead("recipientAlias"), where, "") or None
            if rname in extensions and extensions[rname].facing is not facing:
                raise ParseError(where, f"recipient {rname!r} is declared {extensions[rname].facing.value}")
            recipients.append(RecipientClass(facing, rname, is_extension=rname not in CORE_RECIPIENTS, alias=alias))

        triggers = inst.values("hasTrigger")
        if len(triggers) != 1:
            raise ParseError(where, "expected exactly one trigger")
        trigger = TriggerSpec(TriggerKind(_literal(ts, plead(triggers[0]), plead("triggerKind"), where)), triggers[0])

        classification = Classification(
            sources=tuple(sources),
            perspective=_enum_token(Perspective, inst.values("hasPerspective"), where),
            autonomy=_enum_token(Autonomy, inst.values("hasAutonomy"), where),
            trigger=trigger,
            content=ContentSpec(
                _enum_token(Sensitivity, content_vals, where),
                _enum_token(Confidentiality, content_vals, where),
                tuple(item for _, item in items),
            ),
            scope=_enum_token(Scope, inst.values("hasScope"), where),
            goals=tuple(goals),
            recipients=tuple(recipients),
            priority=_enum_token(Priority, inst.values("hasPriority"), where),
        )
        classes = [t for t in inst.types if t != EXPLANATION]
        rdf_class = classes[0] if classes else None
        if rdf_class == default_class_name(inst.name):
            rdf_class = None
        out.append(
            ExplanationRequirement(
                id=inst.name,
                label=_literal(ts, subj, _LABEL, where, inst.name),
                classification=classification,
                example_text=inst.example,
                rdf_class=rdf_class,
            )
        )
    return out


def requirements_from_turtle(text: str, recipient_extensions: Iterable[RecipientClass] = ()) -> list[ExplanationRequirement]:
    return requirements_from_ttl(parse_turtle(text), recipient_extensions)
