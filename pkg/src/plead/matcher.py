"""Bind each requirement's minimum-content items to nodes of a provenance graph."""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import BadSelector, ParseError, UnknownSubject, UnmappedItem
from .provenance import Attribute, NodeSelector, ProvGraph, ProvNode, SelectorScope, query
from .registry import ExplanationRequirement
from .taxonomy import ICO_MINIMUM_CONTENT

PatternMapping = Mapping[str, Mapping[str, Mapping[str, Any]]]


@dataclass(frozen=True)
class ContentPattern:
    requirement_id: str
    item_id: str
    selector: NodeSelector
    extract: tuple[str, ...]
    required: bool = True


@dataclass(frozen=True)
class Binding:
    node_id: str
    types: frozenset[str]
    values: Mapping[str, Attribute]
    timestamp: str | None = None

    @classmethod
    def of(cls, node: ProvNode, extract: Iterable[str]) -> Binding:
        values = {k: node.attrs[k] for k in extract if k in node.attrs}
        return cls(node.id, node.types, values, node.timestamp)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"node": self.node_id, "values": {k: a.value for k, a in self.values.items()}}
        if self.timestamp:
            out["ts"] = self.timestamp
        return out


@dataclass(frozen=True)
class ContentBindings:
    requirement_id: str
    subject_id: str
    bindings: Mapping[str, tuple[Binding, ...]] = field(default_factory=dict)
    missing: tuple[str, ...] = ()

    def bound(self, item_id: str) -> tuple[Binding, ...]:
        return self.bindings.get(item_id, ())

    def node_ids(self) -> set[str]:
        return {b.node_id for bs in self.bindings.values() for b in bs}

    def to_json(self) -> dict[str, Any]:
        return {
            "requirement": self.requirement_id,
            "subject": self.subject_id,
            "bindings": {k: [b.to_json() for b in v] for k, v in self.bindings.items()},
            "missing": list(self.missing),
        }


def load_patterns(document: str | bytes | Mapping) -> PatternMapping:
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    if not isinstance(document, Mapping) or not all(isinstance(v, Mapping) for v in document.values()):
        raise ParseError("$", "pattern mapping must be an object of objects")
    return document


def load_patterns_file(path: str | Path) -> PatternMapping:
    return load_patterns(Path(path).read_text(encoding="utf-8"))


def _compile_item(req_id: str, item_id: str, spec: Any) -> ContentPattern:
    if not isinstance(spec, Mapping):
        raise BadSelector(item_id, "mapping entry must be an object")
    try:
        selector = NodeSelector.from_json(spec.get("selector", {}))
    except (ValueError, TypeError) as exc:
        raise BadSelector(item_id, str(exc)) from None
    extract = spec.get("extract")
    if not isinstance(extract, list) or not extract or not all(isinstance(k, str) and k for k in extract):
        raise BadSelector(item_id, "'extract' must be a nonempty list of attribute keys")
    required = spec.get("required", True)
    if not isinstance(required, bool):
        raise BadSelector(item_id, "'required' must be a boolean")
    return ContentPattern(req_id, item_id, selector, tuple(extract), required)


def compile_patterns(req: ExplanationRequirement, mapping: PatternMapping) -> list[ContentPattern]:
    """One pattern per minimum-content item, in the order the items are declared."""
    entries = mapping.get(req.id, {})
    declared = set(req.classification.content.item_ids)
    for extra in entries:
        if extra not in declared:
            raise BadSelector(extra, f"not a minimum-content item of {req.id!r}")
    patterns = []
    for item_id in req.classification.content.item_ids:
        if item_id not in entries:
            raise UnmappedItem(item_id)
        patterns.append(_compile_item(req.id, item_id, entries[item_id]))
    return patterns


def _anchored(sel: NodeSelector, subject: str) -> NodeSelector | None:
    """Resolve the anchor a pattern should query from, or None for an unscoped global scan."""
    if sel.anchor is not None:
        return sel
    if sel.scope is SelectorScope.GLOBAL:
        return None
    return replace(sel, anchor=subject)


def bind(patterns: Sequence[ContentPattern], g: ProvGraph, subject: str) -> ContentBindings:
    if subject not in g:
        raise UnknownSubject(subject)
    req_id = patterns[0].requirement_id if patterns else ""
    bindings: dict[str, tuple[Binding, ...]] = {}
    missing: list[str] = []
    for p in patterns:
        sel = _anchored(p.selector, subject)
        if sel is None:
            nodes = query(g, p.selector)
        elif sel.anchor not in g:
            # a fixed anchor outside this view simply yields nothing
            nodes = []
        else:
            nodes = query(g, sel)
        if nodes:
            bindings[p.item_id] = tuple(Binding.of(n, p.extract) for n in nodes)
        elif p.required:
            missing.append(p.item_id)
        else:
            bindings[p.item_id] = ()
    return ContentBindings(req_id, subject, bindings, tuple(missing))


# ICO coverage ---------------------------------------------------------------


@dataclass(frozen=True)
class CoverageEntry:
    number: int
    text: str
    mapped: tuple[tuple[str, str], ...]
    bound: tuple[tuple[str, str], ...]

    @property
    def covered(self) -> bool:
        return bool(self.bound)

    def to_json(self) -> dict[str, Any]:
        return {
            "item": self.number,
            "text": self.text,
            "mapped": [f"{r}/{i}" for r, i in self.mapped],
            "bound": [f"{r}/{i}" for r, i in self.bound],
            "covered": self.covered,
        }


@dataclass(frozen=True)
class CoverageReport:
    entries: tuple[CoverageEntry, ...]

    @property
    def complete(self) -> bool:
        return all(e.covered for e in self.entries)

    def to_json(self) -> dict[str, Any]:
        return {"complete": self.complete, "items": [e.to_json() for e in self.entries]}


def load_coverage_map(document: str | Mapping) -> dict[int, tuple[tuple[str, str], ...]]:
    """``{"1": ["req/item", ...], ...}`` keyed by the ICO item number."""
    if isinstance(document, str):
        document = json.loads(document)
    out = {}
    for key, refs in document.items():
        pairs = []
        for ref in refs:
            req, _, item = ref.partition("/")
            if not item:
                raise ParseError(f"coverage[{key}]", f"expected 'requirement/item', got {ref!r}")
            pairs.append((req, item))
        out[int(key)] = tuple(pairs)
    return out


def ico_coverage(
    coverage_map: Mapping[int, Sequence[tuple[str, str]]], runs: Iterable[ContentBindings]
) -> CoverageReport:
    """Check that every ICO item maps to at least one content item actually bound in ``runs``."""
    bound: set[tuple[str, str]] = set()
    for b in runs:
        bound.update((b.requirement_id, item) for item, nodes in b.bindings.items() if nodes)
    entries = []
    for n, text in enumerate(ICO_MINIMUM_CONTENT, start=1):
        mapped = tuple(coverage_map.get(n, ()))
        entries.append(CoverageEntry(n, text, mapped, tuple(p for p in mapped if p in bound)))
    return CoverageReport(tuple(entries))
