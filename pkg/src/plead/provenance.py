"""In-memory provenance audit trail: JSONL ingest, kind checks, selector queries."""

from __future__ import annotations

import json
import re
from collections import deque
from collections.abc import Mapping
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

from .errors import DanglingEdge, DuplicateNode, KindViolation, MalformedLine, UnknownSubject


class NodeKind(str, Enum):
    ENTITY = "entity"
    ACTIVITY = "activity"
    AGENT = "agent"


class Relation(str, Enum):
    USED = "used"
    WAS_GENERATED_BY = "was_generated_by"
    WAS_ASSOCIATED_WITH = "was_associated_with"
    WAS_DERIVED_FROM = "was_derived_from"
    WAS_ATTRIBUTED_TO = "was_attributed_to"
    WAS_INFORMED_BY = "was_informed_by"

    @classmethod
    def parse(cls, token: str) -> Relation:
        """Accept ``was_generated_by`` as well as the PROV spelling ``wasGeneratedBy``."""
        snake = re.sub(r"(?<!^)(?=[A-Z])", "_", token).lower()
        return cls(snake)


# (source kind, target kind) for each relation, edges pointing from the dependent node.
RELATION_KINDS: dict[Relation, tuple[NodeKind, NodeKind]] = {
    Relation.USED: (NodeKind.ACTIVITY, NodeKind.ENTITY),
    Relation.WAS_GENERATED_BY: (NodeKind.ENTITY, NodeKind.ACTIVITY),
    Relation.WAS_ASSOCIATED_WITH: (NodeKind.ACTIVITY, NodeKind.AGENT),
    Relation.WAS_DERIVED_FROM: (NodeKind.ENTITY, NodeKind.ENTITY),
    Relation.WAS_ATTRIBUTED_TO: (NodeKind.ENTITY, NodeKind.AGENT),
    Relation.WAS_INFORMED_BY: (NodeKind.ACTIVITY, NodeKind.ACTIVITY),
}

# Activities carrying this type label produce decisions; ex-ante views exclude them.
DECISION_TYPE = "decision"


def parse_instant(raw: str) -> datetime:
    text = raw[:-1] + "+00:00" if raw.endswith("Z") else raw
    value = datetime.fromisoformat(text)
    if value.tzinfo is None:
        raise ValueError(f"timestamp {raw!r} has no timezone")
    return value


@dataclass(frozen=True)
class Attribute:
    value: str
    pii: bool = False
    category: str = ""


@dataclass(frozen=True)
class ProvNode:
    id: str
    kind: NodeKind
    types: frozenset[str] = frozenset()
    attrs: Mapping[str, Attribute] = field(default_factory=dict)
    timestamp: str | None = None

    @property
    def instant(self) -> datetime | None:
        return parse_instant(self.timestamp) if self.timestamp else None

    def sort_key(self) -> tuple:
        inst = self.instant
        if inst is None:
            return (1, _EPOCH, self.id)
        return (0, inst, self.id)

    def to_json(self) -> dict[str, Any]:
        rec: dict[str, Any] = {"rec": "node", "id": self.id, "kind": self.kind.value, "types": sorted(self.types)}
        rec["attrs"] = {
            k: {"v": a.value, "pii": a.pii, **({"cat": a.category} if a.category else {})}
            for k, a in self.attrs.items()
        }
        if self.timestamp is not None:
            rec["ts"] = self.timestamp
        return rec


_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class ProvEdge:
    relation: Relation
    src: str
    dst: str

    def to_json(self) -> dict[str, Any]:
        return {"rec": "edge", "rel": self.relation.value, "from": self.src, "to": self.dst}


@dataclass(frozen=True)
class ProvGraph:
    nodes: Mapping[str, ProvNode] = field(default_factory=dict)
    edges: tuple[ProvEdge, ...] = ()

    def __post_init__(self) -> None:
        out: dict[str, list[ProvEdge]] = {}
        inc: dict[str, list[ProvEdge]] = {}
        for e in self.edges:
            out.setdefault(e.src, []).append(e)
            inc.setdefault(e.dst, []).append(e)
        object.__setattr__(self, "_out", out)
        object.__setattr__(self, "_in", inc)

    def __contains__(self, node_id: object) -> bool:
        return node_id in self.nodes

    def node(self, node_id: str) -> ProvNode:
        return self.nodes[node_id]

    def successors(self, node_id: str, relation: Relation | None = None) -> list[str]:
        return [e.dst for e in self._out.get(node_id, ()) if relation is None or e.relation is relation]

    def predecessors(self, node_id: str, relation: Relation | None = None) -> list[str]:
        return [e.src for e in self._in.get(node_id, ()) if relation is None or e.relation is relation]

    def subject_index(self, subject: str) -> frozenset[str]:
        """Nodes whose provenance leads back to ``subject`` (derived from it, directly or not)."""
        if subject not in self.nodes:
            raise UnknownSubject(subject)
        seen: set[str] = set()
        queue = deque([subject])
        while queue:
            cur = queue.popleft()
            for src in self.predecessors(cur):
                if src not in seen and src != subject:
                    seen.add(src)
                    queue.append(src)
        return frozenset(seen)

    def upstream(self, start: Iterable[str]) -> frozenset[str]:
        """Everything the given nodes were generated, derived or informed from."""
        seen = set(start)
        queue = deque(seen)
        while queue:
            for dst in self.successors(queue.popleft()):
                if dst not in seen:
                    seen.add(dst)
                    queue.append(dst)
        return frozenset(seen)

    def case_closure(self, subject: str) -> frozenset[str]:
        """The subject, what was derived from it, and every input to those nodes."""
        down = self.subject_index(subject) | {subject}
        return self.upstream(down)

    def restrict(self, keep: Iterable[str]) -> ProvGraph:
        keep = set(keep)
        nodes = {k: v for k, v in self.nodes.items() if k in keep}
        edges = tuple(e for e in self.edges if e.src in keep and e.dst in keep)
        return ProvGraph(nodes, edges)

    def decision_downstream(self) -> frozenset[str]:
        """Decision activities plus every node whose provenance includes one."""
        roots = [n.id for n in self.nodes.values() if n.kind is NodeKind.ACTIVITY and DECISION_TYPE in n.types]
        out: set[str] = set(roots)
        for root in roots:
            out |= self.subject_index(root)
        return frozenset(out)

    def pre_decision(self) -> ProvGraph:
        """The trail as it stood before any decision was taken."""
        excluded = self.decision_downstream()
        return self.restrict(k for k in self.nodes if k not in excluded)

    def to_jsonl(self) -> str:
        lines = [json.dumps(n.to_json(), ensure_ascii=False, sort_keys=True) for n in self.nodes.values()]
        lines += [json.dumps(e.to_json(), ensure_ascii=False, sort_keys=True) for e in self.edges]
        return "".join(line + "\n" for line in lines)


def _node_from_record(rec: Mapping[str, Any], n: int) -> ProvNode:
    node_id = rec.get("id")
    if not isinstance(node_id, str) or not node_id:
        raise MalformedLine(n, "node record needs a nonempty string 'id'")
    try:
        kind = NodeKind(rec.get("kind"))
    except ValueError:
        raise MalformedLine(n, f"unknown node kind {rec.get('kind')!r}") from None
    types = rec.get("types", [])
    if not isinstance(types, list) or not all(isinstance(t, str) for t in types):
        raise MalformedLine(n, "'types' must be a list of strings")
    attrs_raw = rec.get("attrs", {})
    if not isinstance(attrs_raw, Mapping):
        raise MalformedLine(n, "'attrs' must be an object")
    attrs = {}
    for key, spec in attrs_raw.items():
        if not isinstance(spec, Mapping) or "v" not in spec:
            raise MalformedLine(n, f"attribute {key!r} must be an object with 'v'")
        pii = spec.get("pii", False)
        cat = spec.get("cat", "")
        if not isinstance(pii, bool) or not isinstance(cat, str):
            raise MalformedLine(n, f"attribute {key!r}: 'pii' must be boolean and 'cat' a string")
        if pii and not cat:
            raise MalformedLine(n, f"identifiable attribute {key!r} needs a category label")
        attrs[key] = Attribute(str(spec["v"]), pii, cat)
    ts = rec.get("ts")
    if ts is not None:
        if not isinstance(ts, str):
            raise MalformedLine(n, "'ts' must be a string")
        try:
            parse_instant(ts)
        except ValueError as exc:
            raise MalformedLine(n, f"bad timestamp: {exc}") from None
    return ProvNode(node_id, kind, frozenset(types), attrs, ts)


def ingest(lines: Iterable[str] | str) -> ProvGraph:
    """Build a graph from JSONL node/edge records.

    Edges may precede the nodes they reference; endpoints and kind
    constraints are checked once the whole batch has been read.
    """
    if isinstance(lines, str):
        lines = lines.splitlines()
    nodes: dict[str, ProvNode] = {}
    edges: list[ProvEdge] = []
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLine(n, f"invalid JSON: {exc.msg}") from None
        if not isinstance(rec, Mapping):
            raise MalformedLine(n, "record must be a JSON object")
        kind = rec.get("rec")
        if kind == "node":
            node = _node_from_record(rec, n)
            if node.id in nodes:
                raise DuplicateNode(node.id)
            nodes[node.id] = node
        elif kind == "edge":
            try:
                rel = Relation.parse(str(rec.get("rel")))
            except ValueError:
                raise MalformedLine(n, f"unknown relation {rec.get('rel')!r}") from None
            src, dst = rec.get("from"), rec.get("to")
            if not isinstance(src, str) or not isinstance(dst, str):
                raise MalformedLine(n, "edge record needs string 'from' and 'to'")
            edges.append(ProvEdge(rel, src, dst))
        else:
            raise MalformedLine(n, f"'rec' must be 'node' or 'edge', got {kind!r}")

    for e in edges:
        if e.src not in nodes or e.dst not in nodes:
            raise DanglingEdge(e.src, e.dst)
        want_src, want_dst = RELATION_KINDS[e.relation]
        got_src, got_dst = nodes[e.src].kind, nodes[e.dst].kind
        if (got_src, got_dst) != (want_src, want_dst):
            raise KindViolation(
                e, f"expects {want_src.value} -> {want_dst.value}, got {got_src.value} -> {got_dst.value}"
            )
    return ProvGraph(nodes, tuple(edges))


def ingest_file(path: str | Path) -> ProvGraph:
    with open(path, encoding="utf-8") as fh:
        return ingest(fh)


# selectors -----------------------------------------------------------------


class Direction(str, Enum):
    OUT = "out"
    IN = "in"


@dataclass(frozen=True)
class PathStep:
    relation: Relation
    direction: Direction = Direction.OUT


_OPS = ("eq", "ne", "exists", "lt", "gt", "contains")


@dataclass(frozen=True)
class AttrPredicate:
    key: str
    op: str = "eq"
    value: str | None = None

    def test(self, node: ProvNode) -> bool:
        attr = node.attrs.get(self.key)
        if self.op == "exists":
            return attr is not None
        if attr is None:
            return False
        if self.op == "eq":
            return attr.value == self.value
        if self.op == "ne":
            return attr.value != self.value
        if self.op == "contains":
            return str(self.value) in attr.value
        try:
            lhs, rhs = float(attr.value), float(str(self.value))
        except ValueError:
            return False
        return lhs < rhs if self.op == "lt" else lhs > rhs


class SelectorScope(str, Enum):
    SUBJECT = "subject"
    GLOBAL = "global"


class Reach(str, Enum):
    DOWNSTREAM = "downstream"
    CASE = "case"


@dataclass(frozen=True)
class NodeSelector:
    """Which nodes a query returns.

    With no ``anchor`` every node is a candidate. With an anchor, the
    candidates are the nodes reached by walking ``path`` from it, or, when
    ``path`` is empty, the anchor together with its subject index
    (``reach="downstream"``) or its whole case closure (``reach="case"``).
    ``scope`` tells the content matcher whether to anchor at the subject.
    """

    kind: NodeKind | None = None
    types: frozenset[str] = frozenset()
    where: tuple[AttrPredicate, ...] = ()
    path: tuple[PathStep, ...] = ()
    anchor: str | None = None
    scope: SelectorScope = SelectorScope.SUBJECT
    reach: Reach = Reach.DOWNSTREAM

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> NodeSelector:
        if not isinstance(data, Mapping):
            raise ValueError("selector must be an object")
        unknown = set(data) - {"kind", "types", "type", "where", "path", "anchor", "scope", "reach"}
        if unknown:
            raise ValueError(f"unknown selector keys {sorted(unknown)}")
        kind = NodeKind(data["kind"]) if data.get("kind") is not None else None
        types = data.get("types", [])
        if "type" in data:
            types = [*types, data["type"]]
        if not isinstance(types, list) or not all(isinstance(t, str) for t in types):
            raise ValueError("'types' must be a list of strings")
        preds = []
        for key, spec in (data.get("where") or {}).items():
            if isinstance(spec, Mapping):
                op = spec.get("op", "eq")
                if op not in _OPS:
                    raise ValueError(f"unknown operator {op!r}")
                value = spec.get("value")
                preds.append(AttrPredicate(key, op, None if value is None else str(value)))
            else:
                preds.append(AttrPredicate(key, "eq", str(spec)))
        steps = []
        for step in data.get("path", []):
            if isinstance(step, str):
                steps.append(PathStep(Relation.parse(step)))
            elif isinstance(step, Mapping):
                steps.append(PathStep(Relation.parse(str(step.get("rel"))), Direction(step.get("dir", "out"))))
            else:
                raise ValueError("path steps must be relation names or {rel, dir} objects")
        anchor = data.get("anchor")
        if anchor is not None and not isinstance(anchor, str):
            raise ValueError("'anchor' must be a string")
        scope = SelectorScope(data.get("scope", "subject"))
        if scope is SelectorScope.GLOBAL and steps:
            raise ValueError("a global selector cannot walk a path")
        reach = Reach(data.get("reach", "downstream"))
        if reach is Reach.CASE and steps:
            raise ValueError("'reach' applies only to selectors without a path")
        return cls(kind, frozenset(types), tuple(preds), tuple(steps), anchor, scope, reach)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.kind is not None:
            out["kind"] = self.kind.value
        if self.types:
            out["types"] = sorted(self.types)
        if self.where:
            out["where"] = {p.key: {"op": p.op, "value": p.value} for p in self.where}
        if self.path:
            out["path"] = [{"rel": s.relation.value, "dir": s.direction.value} for s in self.path]
        if self.anchor is not None:
            out["anchor"] = self.anchor
        if self.scope is not SelectorScope.SUBJECT:
            out["scope"] = self.scope.value
        if self.reach is not Reach.DOWNSTREAM:
            out["reach"] = self.reach.value
        return out

    def matches(self, node: ProvNode) -> bool:
        if self.kind is not None and node.kind is not self.kind:
            return False
        if not self.types <= node.types:
            return False
        return all(p.test(node) for p in self.where)


def _walk(g: ProvGraph, start: str, path: tuple[PathStep, ...]) -> set[str]:
    frontier = {start}
    for step in path:
        nxt: set[str] = set()
        for node_id in frontier:
            if step.direction is Direction.OUT:
                nxt.update(g.successors(node_id, step.relation))
            else:
                nxt.update(g.predecessors(node_id, step.relation))
        frontier = nxt
    return frontier


def query(g: ProvGraph, sel: NodeSelector) -> list[ProvNode]:
    if sel.anchor is None:
        if sel.path:
            raise ValueError("a path query needs an anchor")
        candidates: Iterable[str] = g.nodes
    else:
        if sel.anchor not in g:
            raise UnknownSubject(sel.anchor)
        if sel.path:
            candidates = _walk(g, sel.anchor, sel.path)
        elif sel.reach is Reach.CASE:
            candidates = g.case_closure(sel.anchor)
        else:
            candidates = {sel.anchor} | g.subject_index(sel.anchor)
    hits = [g.nodes[c] for c in candidates if sel.matches(g.nodes[c])]
    return sorted(hits, key=ProvNode.sort_key)
