"""Corpus of classified explanation requirements: JSON I/O, lint, and the matrix view."""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import (
    CyclicParent,
    DanglingParent,
    DuplicateId,
    InvalidClassification,
    ParseError,
    UnknownGoal,
    UnknownRecipient,
)
from .taxonomy import (
    CORE_RECIPIENTS,
    Autonomy,
    Classification,
    Confidentiality,
    ContentItem,
    ContentSpec,
    Facing,
    Goal,
    GoalFamily,
    Perspective,
    Priority,
    RecipientClass,
    Scope,
    Sensitivity,
    SourceKind,
    SourceRank,
    TriggerKind,
    TriggerSpec,
    validate_classification,
    vocabulary,
)


@dataclass(frozen=True)
class ExplanationRequirement:
    id: str
    label: str
    classification: Classification
    parent: str | None = None
    example_text: str | None = None
    # Local name of the requirement-specific RDF class; derived from the id when unset.
    rdf_class: str | None = None
    note: str | None = None


@dataclass(frozen=True)
class Registry:
    requirements: Mapping[str, ExplanationRequirement] = field(default_factory=dict)
    recipient_extensions: tuple[RecipientClass, ...] = ()

    def __len__(self) -> int:
        return len(self.requirements)

    def __iter__(self) -> Iterator[ExplanationRequirement]:
        return iter(self.requirements.values())

    def __getitem__(self, id: str) -> ExplanationRequirement:
        return self.requirements[id]

    def __contains__(self, id: object) -> bool:
        return id in self.requirements

    def children(self, id: str) -> list[ExplanationRequirement]:
        return [r for r in self if r.parent == id]

    def resolve_recipient(self, name: str) -> RecipientClass:
        if name in CORE_RECIPIENTS:
            return RecipientClass(CORE_RECIPIENTS[name], name)
        for ext in self.recipient_extensions:
            if ext.name == name:
                return ext
        raise UnknownRecipient(name)


# parsing -------------------------------------------------------------------


def _enum(cls, token: Any, where: str):
    try:
        return cls(token)
    except ValueError:
        allowed = ", ".join(m.value for m in cls)
        raise ParseError(where, f"{token!r} is not one of {allowed}") from None


def _get(obj: Mapping, key: str, where: str, kind: type = str):
    if key not in obj:
        raise ParseError(where, f"missing key {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise ParseError(f"{where}.{key}", f"expected {kind.__name__}")
    return value


def _parse_source(raw: Any, where: str) -> SourceRank:
    if isinstance(raw, str):
        return SourceRank(_enum(SourceKind, raw, where))
    if isinstance(raw, Mapping):
        citation = raw.get("citation", "")
        if not isinstance(citation, str):
            raise ParseError(f"{where}.citation", "expected str")
        return SourceRank(_enum(SourceKind, _get(raw, "rank", where), where), citation)
    raise ParseError(where, "source must be a token or {rank, citation}")


def _parse_recipient(raw: Any, where: str, extensions: Mapping[str, RecipientClass]) -> RecipientClass:
    if not isinstance(raw, Mapping):
        raise ParseError(where, "recipient must be an object")
    name = _get(raw, "name", where)
    facing = _enum(Facing, _get(raw, "facing", where), f"{where}.facing")
    alias = raw.get("alias")
    if alias is not None and not isinstance(alias, str):
        raise ParseError(f"{where}.alias", "expected str")
    if name in CORE_RECIPIENTS:
        return RecipientClass(facing, name, alias=alias)
    if name in extensions:
        if extensions[name].facing is not facing:
            raise ParseError(f"{where}.facing", f"extension {name!r} is declared {extensions[name].facing.value}")
        return RecipientClass(facing, name, is_extension=True, alias=alias)
    raise UnknownRecipient(name)


def _parse_requirement(raw: Any, where: str, extensions: Mapping[str, RecipientClass]) -> ExplanationRequirement:
    if not isinstance(raw, Mapping):
        raise ParseError(where, "requirement must be an object")
    rid = _get(raw, "id", where)
    where = f"requirements[{rid}]"
    sources = tuple(_parse_source(s, f"{where}.source[{i}]") for i, s in enumerate(_get(raw, "source", where, list)))
    trig = _get(raw, "trigger", where, dict)
    trigger = TriggerSpec(
        _enum(TriggerKind, _get(trig, "kind", f"{where}.trigger"), f"{where}.trigger.kind"),
        _get(trig, "event", f"{where}.trigger"),
    )
    content_raw = _get(raw, "content", where, dict)
    items = []
    for i, it in enumerate(_get(content_raw, "minimum", f"{where}.content", list)):
        loc = f"{where}.content.minimum[{i}]"
        if not isinstance(it, Mapping):
            raise ParseError(loc, "item must be an object")
        items.append(ContentItem(_get(it, "id", loc), _get(it, "description", loc)))
    content = ContentSpec(
        _enum(Sensitivity, _get(content_raw, "sensitivity", f"{where}.content"), f"{where}.content.sensitivity"),
        _enum(Confidentiality, _get(content_raw, "confidentiality", f"{where}.content"), f"{where}.content.confidentiality"),
        tuple(items),
    )
    goals = []
    for g in _get(raw, "goals", where, list):
        try:
            goals.append(Goal(g))
        except ValueError:
            raise UnknownGoal(str(g)) from None
    recipients = tuple(
        _parse_recipient(r, f"{where}.recipients[{i}]", extensions)
        for i, r in enumerate(_get(raw, "recipients", where, list))
    )
    classification = Classification(
        sources=sources,
        perspective=_enum(Perspective, _get(raw, "perspective", where), f"{where}.perspective"),
        autonomy=_enum(Autonomy, _get(raw, "autonomy", where), f"{where}.autonomy"),
        trigger=trigger,
        content=content,
        scope=_enum(Scope, _get(raw, "scope", where), f"{where}.scope"),
        goals=tuple(goals),
        recipients=recipients,
        priority=_enum(Priority, _get(raw, "priority", where), f"{where}.priority"),
    )
    optional = {}
    for key, attr in (("parent", "parent"), ("example", "example_text"), ("class", "rdf_class"), ("note", "note")):
        if raw.get(key) is not None:
            if not isinstance(raw[key], str):
                raise ParseError(f"{where}.{key}", "expected str")
            optional[attr] = raw[key]
    return ExplanationRequirement(rid, _get(raw, "label", where), classification, **optional)


def _check_parents(reqs: Mapping[str, ExplanationRequirement]) -> None:
    for r in reqs.values():
        if r.parent is not None and r.parent not in reqs:
            raise DanglingParent(r.id, r.parent)
    for r in reqs.values():
        path = [r.id]
        cur = r.parent
        while cur is not None:
            path.append(cur)
            if cur == r.id:
                raise CyclicParent(path)
            if len(path) > len(reqs) + 1:  # pragma: no cover - cycle not through r
                break
            cur = reqs[cur].parent


def build_registry(
    requirements: Iterable[ExplanationRequirement],
    recipient_extensions: Iterable[RecipientClass] = (),
) -> Registry:
    """Validate already-constructed requirements into a :class:`Registry`."""
    reqs: dict[str, ExplanationRequirement] = {}
    for r in requirements:
        if r.id in reqs:
            raise DuplicateId(r.id)
        reqs[r.id] = r
    _check_parents(reqs)
    for r in reqs.values():
        report = validate_classification(r.classification)
        if report:
            raise InvalidClassification(r.id, report)
    return Registry(reqs, tuple(recipient_extensions))


def load_registry(document: str | bytes | Mapping) -> Registry:
    """Parse and fully validate a registry document. All-or-nothing."""
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    else:
        data = document
    if not isinstance(data, Mapping):
        raise ParseError("$", "registry document must be a JSON object")

    extensions: dict[str, RecipientClass] = {}
    for i, ext in enumerate(data.get("recipient_extensions", [])):
        loc = f"recipient_extensions[{i}]"
        if not isinstance(ext, Mapping):
            raise ParseError(loc, "extension must be an object")
        name = _get(ext, "name", loc)
        if name in CORE_RECIPIENTS:
            raise ParseError(loc, f"{name!r} is a core recipient")
        extensions[name] = RecipientClass(_enum(Facing, _get(ext, "facing", loc), f"{loc}.facing"), name, is_extension=True)

    raw_reqs = data.get("requirements", [])
    if not isinstance(raw_reqs, list):
        raise ParseError("requirements", "expected a list")
    reqs = [_parse_requirement(raw, f"requirements[{i}]", extensions) for i, raw in enumerate(raw_reqs)]
    return build_registry(reqs, extensions.values())


def load_registry_file(path: str | Path) -> Registry:
    return load_registry(Path(path).read_text(encoding="utf-8"))


def _requirement_json(r: ExplanationRequirement) -> dict[str, Any]:
    c = r.classification
    out: dict[str, Any] = {"id": r.id, "label": r.label}
    if r.parent is not None:
        out["parent"] = r.parent
    if r.rdf_class is not None:
        out["class"] = r.rdf_class
    out["source"] = [s.kind.value if not s.citation else {"rank": s.kind.value, "citation": s.citation} for s in c.sources]
    out["perspective"] = c.perspective.value
    out["autonomy"] = c.autonomy.value
    out["trigger"] = {"kind": c.trigger.kind.value, "event": c.trigger.event}
    out["content"] = {
        "sensitivity": c.content.sensitivity.value,
        "confidentiality": c.content.confidentiality.value,
        "minimum": [{"id": it.id, "description": it.description} for it in c.content.minimum],
    }
    out["scope"] = c.scope.value
    out["goals"] = [g.value for g in c.goals]
    recips = []
    for rc in c.recipients:
        d = {"facing": rc.facing.value, "name": rc.name}
        if rc.alias is not None:
            d["alias"] = rc.alias
        recips.append(d)
    out["recipients"] = recips
    out["priority"] = c.priority.value
    if r.example_text is not None:
        out["example"] = r.example_text
    if r.note is not None:
        out["note"] = r.note
    return out


def registry_to_json(r: Registry) -> dict[str, Any]:
    return {
        "requirements": [_requirement_json(req) for req in r],
        "recipient_extensions": [{"facing": e.facing.value, "name": e.name} for e in r.recipient_extensions],
    }


def serialize_registry(r: Registry) -> str:
    return json.dumps(registry_to_json(r), indent=2, ensure_ascii=False) + "\n"


# lint ----------------------------------------------------------------------


@dataclass(frozen=True)
class RankWarning:
    child: str
    parent: str
    child_rank: SourceKind
    parent_rank: SourceKind

    def __str__(self) -> str:
        return (
            f"{self.child} ({self.child_rank.value}) is more primary than its parent "
            f"{self.parent} ({self.parent_rank.value})"
        )


@dataclass(frozen=True)
class LintReport:
    streamlining_groups: tuple[tuple[str, ...], ...] = ()
    rank_warnings: tuple[RankWarning, ...] = ()
    conciseness_warnings: tuple[str, ...] = ()

    @property
    def empty(self) -> bool:
        return not (self.streamlining_groups or self.rank_warnings or self.conciseness_warnings)

    def to_json(self) -> dict[str, Any]:
        return {
            "streamlining_groups": [list(g) for g in self.streamlining_groups],
            "rank_warnings": [str(w) for w in self.rank_warnings],
            "conciseness_warnings": list(self.conciseness_warnings),
        }


def _streamline_key(c: Classification):
    c = c.canonical()
    return (
        c.sources,
        c.perspective,
        c.autonomy,
        c.trigger,
        c.content.sensitivity,
        c.content.confidentiality,
        c.scope,
        c.goals,
        tuple((r.facing, r.name) for r in c.recipients),
        c.priority,
    )


def lint_registry(r: Registry) -> LintReport:
    groups: dict[Any, list[str]] = {}
    for req in r:
        groups.setdefault(_streamline_key(req.classification), []).append(req.id)
    streamlining = tuple(tuple(ids) for ids in groups.values() if len(ids) >= 2)

    warnings = []
    for req in r:
        if req.parent is None:
            continue
        child_rank = req.classification.most_primary
        parent_rank = r[req.parent].classification.most_primary
        if child_rank is not None and parent_rank is not None and child_rank.rank < parent_rank.rank:
            warnings.append(RankWarning(req.id, req.parent, child_rank, parent_rank))

    concise = []
    limit = vocabulary().CONCISENESS_LIMIT
    for facing in Facing:
        core = [n for n, f in CORE_RECIPIENTS.items() if f is facing]
        ext = [e.name for e in r.recipient_extensions if e.facing is facing]
        if ext and len(core) + len(ext) > limit:
            concise.append(
                f"{facing.label} recipients extended to {len(core) + len(ext)} values (limit {limit})"
            )
    return LintReport(streamlining, tuple(warnings), tuple(concise))


# matrix --------------------------------------------------------------------

REQUIREMENT_COLUMN = "Explanation requirement"


@dataclass(frozen=True)
class MatrixRow:
    requirement_id: str
    cells: Mapping[str, str]

    def __getitem__(self, column: str) -> str:
        return self.cells[column]


@dataclass(frozen=True)
class ClassificationMatrix:
    header: tuple[str, ...]
    rows: tuple[MatrixRow, ...]

    def row(self, label: str) -> MatrixRow:
        for row in self.rows:
            if row.cells[REQUIREMENT_COLUMN] == label:
                return row
        raise KeyError(label)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([row.cells[col] for col in self.header])
        return buf.getvalue()


def _join(values: Iterable[str]) -> str:
    return "; ".join(values)


def _cells(req: ExplanationRequirement) -> dict[str, str]:
    c = req.classification
    goals = {fam: [g.label for g in c.goals if g.family is fam] for fam in GoalFamily}
    recips = {f: [rc.label for rc in c.recipients if rc.facing is f] for f in Facing}
    return {
        REQUIREMENT_COLUMN: req.label,
        "Source": _join(s.kind.label for s in c.sources),
        "Perspective": c.perspective.value.replace("_", " ").capitalize(),
        "Autonomy": c.autonomy.value.capitalize(),
        "Trigger": c.trigger.label,
        "Sensitivity": "Aggregated values" if c.content.sensitivity is Sensitivity.AGGREGATED else "Identifiable data",
        "Confidentiality": c.content.confidentiality.value.capitalize(),
        "Minimum content": _join(it.description for it in c.content.minimum),
        "Scope": c.scope.value.capitalize(),
        "Understandability": _join(goals[GoalFamily.UNDERSTANDABILITY]),
        "Intervenability": _join(goals[GoalFamily.INTERVENABILITY]),
        "Outward-facing": _join(recips[Facing.OUTWARD_FACING]),
        "Inward-facing": _join(recips[Facing.INWARD_FACING]),
        "Priority": c.priority.value.capitalize(),
    }


def matrix(r: Registry) -> ClassificationMatrix:
    header = (REQUIREMENT_COLUMN,) + vocabulary().columns
    return ClassificationMatrix(header, tuple(MatrixRow(req.id, _cells(req)) for req in r))
