"""Slot templates that turn content bindings into explanation text.

Body syntax::

    {item}                 node ids bound to ``item``, as an English list
    {item.attr}            attribute of the first bound node
    {item[type].attr}      same, restricted to nodes carrying ``type``
    {#each item[type]}..{/each}
                           repeat for every bound node; inside, ``{.attr}``
                           reads the current node; pieces are joined as a list
    {{ and }}              literal braces

``id`` and ``ts`` work as attributes everywhere and give the node id and its
timestamp.
"""

from __future__ import annotations

import json
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

from .errors import (
    ConfidentialOutward,
    MissingCategoryLabel,
    MissingContent,
    NoTemplate,
    ParseError,
    TemplateSyntaxError,
    UnboundSlot,
)
from .matcher import Binding, ContentBindings
from .provenance import Attribute, ProvGraph
from .registry import ExplanationRequirement, Registry
from .taxonomy import Confidentiality, Goal, RecipientClass, Sensitivity

GAP = "⟨unavailable: {}⟩"
WILDCARD = "*"


class RenderMode(str, Enum):
    STRICT = "strict"
    GAP_MARKED = "gapmarked"


def english_list(parts: Sequence[str]) -> str:
    if len(parts) <= 1:
        return "".join(parts)
    return ", ".join(parts[:-1]) + " and " + parts[-1]


def redact(value: str, *, pii: bool = False, category: str = "", key: str = "") -> str:
    """Category label for identifiable values, the value itself otherwise."""
    if not pii:
        return value
    if not category:
        raise MissingCategoryLabel(key)
    return category


def redacted_attributes(g: ProvGraph) -> dict[str, dict[str, str]]:
    """Every attribute of every node, with identifiable values replaced by their category."""
    return {
        n.id: {k: redact(a.value, pii=a.pii, category=a.category, key=k) for k, a in n.attrs.items()}
        for n in g.nodes.values()
    }


# body AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Text:
    text: str


@dataclass(frozen=True)
class Slot:
    item: str
    type_filter: str | None = None
    attr: str | None = None


@dataclass(frozen=True)
class Local:
    attr: str


@dataclass(frozen=True)
class Each:
    item: str
    type_filter: str | None
    body: tuple[Union[Text, Local], ...]


Node = Union[Text, Slot, Each]

_TOKEN = re.compile(r"\{\{|\}\}|\{[^{}]*\}|[{}]")
_SLOT = re.compile(r"^(?P<item>[A-Za-z_]\w*)(?:\[(?P<type>[\w-]+)\])?(?:\.(?P<attr>\w+))?$")
_EACH = re.compile(r"^#each\s+(?P<item>[A-Za-z_]\w*)(?:\[(?P<type>[\w-]+)\])?$")
_LOCAL = re.compile(r"^\.(?P<attr>\w+)$")


def parse_body(body: str) -> tuple[Node, ...]:
    out: list[Node] = []
    stack: list[tuple[Each, list]] = []

    def emit(node) -> None:
        target = stack[-1][1] if stack else out
        if isinstance(node, Text) and target and isinstance(target[-1], Text):
            target[-1] = Text(target[-1].text + node.text)
        else:
            target.append(node)

    pos = 0
    for m in _TOKEN.finditer(body):
        if m.start() > pos:
            emit(Text(body[pos : m.start()]))
        pos = m.end()
        tok = m.group()
        if tok == "{{":
            emit(Text("{"))
            continue
        if tok == "}}":
            emit(Text("}"))
            continue
        if tok in ("{", "}"):
            raise TemplateSyntaxError(f"unbalanced brace at offset {m.start()}")
        inner = tok[1:-1].strip()
        if inner == "/each":
            if not stack:
                raise TemplateSyntaxError(f"{{/each}} without {{#each}} at offset {m.start()}")
            head, parts = stack.pop()
            emit(Each(head.item, head.type_filter, tuple(parts)))
        elif em := _EACH.match(inner):
            if stack:
                raise TemplateSyntaxError("nested {#each} blocks are not supported")
            stack.append((Each(em["item"], em["type"], ()), []))
        elif lm := _LOCAL.match(inner):
            if not stack:
                raise TemplateSyntaxError(f"{tok} outside an {{#each}} block")
            emit(Local(lm["attr"]))
        elif sm := _SLOT.match(inner):
            if stack:
                raise TemplateSyntaxError(f"{tok} inside {{#each}}; use {{.attr}}")
            emit(Slot(sm["item"], sm["type"], sm["attr"]))
        else:
            raise TemplateSyntaxError(f"cannot parse slot {tok!r}")
    if pos < len(body):
        emit(Text(body[pos:]))
    if stack:
        raise TemplateSyntaxError("unterminated {#each} block")
    return tuple(out)


def referenced_items(body: Iterable[Node]) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for node in body:
        if isinstance(node, (Slot, Each)):
            seen.setdefault(node.item)
    return tuple(seen)


# templates ------------------------------------------------------------------


@dataclass(frozen=True)
class Template:
    id: str
    requirement_id: str
    recipients: frozenset[str] | None
    goals: frozenset[Goal] | None
    body: str
    nodes: tuple[Node, ...] = field(default=(), compare=False, repr=False)

    @classmethod
    def build(
        cls,
        id: str,
        requirement_id: str,
        body: str,
        recipients: Iterable[str] | None = None,
        goals: Iterable[Goal | str] | None = None,
    ) -> Template:
        if not body:
            raise TemplateSyntaxError(f"template {id!r} has an empty body")
        return cls(
            id,
            requirement_id,
            None if recipients is None else frozenset(recipients),
            None if goals is None else frozenset(Goal(g) for g in goals),
            body,
            parse_body(body),
        )

    @property
    def specificity(self) -> int:
        return (self.recipients is not None) + (self.goals is not None)

    @property
    def items(self) -> tuple[str, ...]:
        return referenced_items(self.nodes)

    def admits(self, req: ExplanationRequirement, recipient: RecipientClass) -> bool:
        if self.requirement_id != req.id:
            return False
        if self.recipients is not None and not ({recipient.name, recipient.alias} & self.recipients):
            return False
        return self.goals is None or self.goals <= set(req.classification.goals)

    def check(self, req: ExplanationRequirement) -> None:
        declared = set(req.classification.content.item_ids)
        for item in self.items:
            if item not in declared:
                raise UnboundSlot(item)

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "requirement": self.requirement_id,
            "recipients": WILDCARD if self.recipients is None else sorted(self.recipients),
            "goals": WILDCARD if self.goals is None else sorted(g.value for g in self.goals),
            "body": self.body,
        }


def _selector(raw: Any, where: str) -> list[str] | None:
    if raw is None or raw == WILDCARD:
        return None
    if not isinstance(raw, list) or not all(isinstance(x, str) for x in raw):
        raise ParseError(where, "expected '*' or a list of strings")
    return raw


def load_templates(document: str | bytes | Sequence, registry: Registry | None = None) -> list[Template]:
    """Parse a template file; with ``registry`` also check every slot against its requirement."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    if not isinstance(document, list):
        raise ParseError("$", "template file must be a JSON array")
    out: list[Template] = []
    seen: set[str] = set()
    for i, raw in enumerate(document):
        where = f"templates[{i}]"
        if not isinstance(raw, Mapping):
            raise ParseError(where, "template must be an object")
        for key in ("id", "requirement", "body"):
            if not isinstance(raw.get(key), str):
                raise ParseError(f"{where}.{key}", "expected str")
        if raw["id"] in seen:
            raise ParseError(where, f"duplicate template id {raw['id']!r}")
        seen.add(raw["id"])
        try:
            goals = _selector(raw.get("goals"), f"{where}.goals")
            t = Template.build(raw["id"], raw["requirement"], raw["body"], _selector(raw.get("recipients"), f"{where}.recipients"), goals)
        except ValueError as exc:
            raise ParseError(f"{where}.goals", str(exc)) from None
        if registry is not None:
            if t.requirement_id not in registry:
                raise ParseError(f"{where}.requirement", f"unknown requirement {t.requirement_id!r}")
            t.check(registry[t.requirement_id])
        out.append(t)
    return out


def load_templates_file(path: str | Path, registry: Registry | None = None) -> list[Template]:
    return load_templates(Path(path).read_text(encoding="utf-8"), registry)


def select_template(
    templates: Iterable[Template], req: ExplanationRequirement, recipient: RecipientClass
) -> Template:
    admitted = [t for t in templates if t.admits(req, recipient)]
    if not admitted:
        raise NoTemplate(req.id, recipient.name)
    return min(admitted, key=lambda t: (-t.specificity, t.id))


# rendering ------------------------------------------------------------------


@dataclass(frozen=True)
class ExplanationInstance:
    requirement_id: str
    subject_id: str
    recipient: RecipientClass
    text: str
    bindings: ContentBindings
    generated_at: str
    gaps: tuple[str, ...] = ()
    template_id: str = ""

    def to_json(self) -> dict[str, Any]:
        return {
            "requirement": self.requirement_id,
            "subject": self.subject_id,
            "recipient": self.recipient.name,
            "template": self.template_id,
            "text": self.text,
            "generated_at": self.generated_at,
            "gaps": list(self.gaps),
            "bindings": self.bindings.to_json(),
        }


class _Renderer:
    def __init__(self, b: ContentBindings, aggregated: bool, gap_marked: bool) -> None:
        self.b = b
        self.aggregated = aggregated
        self.gap_marked = gap_marked
        self.gaps: list[str] = []

    def value(self, binding: Binding, attr: str) -> str:
        if attr == "id":
            return binding.node_id
        if attr == "ts":
            return binding.timestamp or ""
        a: Attribute | None = binding.values.get(attr)
        if a is None:
            return ""
        if self.aggregated:
            return redact(a.value, pii=a.pii, category=a.category, key=attr)
        return a.value

    def nodes(self, item: str, type_filter: str | None) -> tuple[Binding, ...]:
        bound = self.b.bound(item)
        if type_filter is None:
            return bound
        return tuple(x for x in bound if type_filter in x.types)

    def gap(self, item: str) -> str:
        if item not in self.gaps:
            self.gaps.append(item)
        return GAP.format(item)

    def render(self, body: Iterable[Node]) -> str:
        out = []
        for node in body:
            if isinstance(node, Text):
                out.append(node.text)
            elif node.item in self.b.missing:
                out.append(self.gap(node.item))
            elif isinstance(node, Slot):
                nodes = self.nodes(node.item, node.type_filter)
                if node.attr is None:
                    out.append(english_list([x.node_id for x in nodes]))
                elif nodes:
                    out.append(self.value(nodes[0], node.attr))
            else:
                pieces = [
                    "".join(p.text if isinstance(p, Text) else self.value(x, p.attr) for p in node.body)
                    for x in self.nodes(node.item, node.type_filter)
                ]
                out.append(english_list(pieces))
        return "".join(out)


def _stamp(at: datetime | str | None) -> str:
    if at is None:
        at = datetime.now(timezone.utc)
    if isinstance(at, datetime):
        return at.isoformat().replace("+00:00", "Z")
    return at


def check_confidentiality(req: ExplanationRequirement, recipient: RecipientClass) -> None:
    if req.classification.content.confidentiality is Confidentiality.CONFIDENTIAL and recipient.is_outward:
        raise ConfidentialOutward(recipient.name)


def render(
    t: Template,
    b: ContentBindings,
    req: ExplanationRequirement,
    recipient: RecipientClass,
    mode: RenderMode | str = RenderMode.STRICT,
    at: datetime | str | None = None,
) -> ExplanationInstance:
    mode = RenderMode(mode)
    check_confidentiality(req, recipient)
    if t.requirement_id != req.id:
        raise NoTemplate(req.id, recipient.name)
    t.check(req)
    if mode is RenderMode.STRICT:
        absent = [item for item in t.items if item in b.missing]
        if absent:
            raise MissingContent(absent)
    r = _Renderer(
        b,
        aggregated=req.classification.content.sensitivity is Sensitivity.AGGREGATED,
        gap_marked=mode is RenderMode.GAP_MARKED,
    )
    text = r.render(t.nodes)
    return ExplanationInstance(req.id, b.subject_id, recipient, text, b, _stamp(at), tuple(r.gaps), t.id)
