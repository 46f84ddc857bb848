"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations

from typing import Iterable


class PleadError(Exception):
    """Base class for every error raised by this package."""

    code = "PleadError"

    def to_json(self) -> dict[str, object]:
        return {"code": self.code, "message": str(self)}


# registry ------------------------------------------------------------------


class ParseError(PleadError):
    code = "ParseError"

    def __init__(self, location: str, reason: str = "") -> None:
        self.location = location
        self.reason = reason
        super().__init__(f"{location}: {reason}" if reason else location)


class UnknownGoal(PleadError):
    code = "UnknownGoal"

    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unknown goal {name!r}")


class UnknownRecipient(PleadError):
    code = "UnknownRecipient"

    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unknown recipient {name!r} (not core, not a declared extension)")


class DuplicateId(PleadError):
    code = "DuplicateId"

    def __init__(self, id: str) -> None:
        self.id = id
        super().__init__(f"duplicate requirement id {id!r}")


class DanglingParent(PleadError):
    code = "DanglingParent"

    def __init__(self, id: str, parent: str = "") -> None:
        self.id = id
        self.parent = parent
        super().__init__(f"requirement {id!r} names missing parent {parent!r}")


class CyclicParent(PleadError):
    code = "CyclicParent"

    def __init__(self, path: Iterable[str]) -> None:
        self.path = tuple(path)
        super().__init__("parent cycle: " + " -> ".join(self.path))


class InvalidClassification(PleadError):
    code = "InvalidClassification"

    def __init__(self, id: str, report) -> None:
        self.id = id
        self.report = report
        codes = ", ".join(v.code for v in report.violations)
        super().__init__(f"requirement {id!r} has an invalid classification: {codes}")

    def to_json(self) -> dict[str, object]:
        data = super().to_json()
        data["id"] = self.id
        data["violations"] = [{"code": v.code, "message": v.message} for v in self.report.violations]
        return data


# ontology-io ---------------------------------------------------------------


class UnserializableName(PleadError):
    code = "UnserializableName"

    def __init__(self, name: str, reason: str = "not a valid prefixed-name local part") -> None:
        self.name = name
        super().__init__(f"{name!r}: {reason}")


class TurtleSyntaxError(PleadError):
    code = "SyntaxError"

    def __init__(self, line: int, column: int, expected: str) -> None:
        self.line = line
        self.column = column
        self.expected = expected
        super().__init__(f"line {line}, column {column}: expected {expected}")


class UnknownPrefix(PleadError):
    code = "UnknownPrefix"

    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"undeclared prefix {name!r}")


class CardinalityViolation(PleadError):
    code = "CardinalityViolation"

    def __init__(self, subject: str, property: str) -> None:
        self.subject = subject
        self.property = property
        super().__init__(f"{subject} has more than one value for single-valued {property}")


# provenance-store ----------------------------------------------------------


class MalformedLine(PleadError):
    code = "MalformedLine"

    def __init__(self, n: int, reason: str) -> None:
        self.n = n
        self.reason = reason
        super().__init__(f"line {n}: {reason}")


class DuplicateNode(PleadError):
    code = "DuplicateNode"

    def __init__(self, id: str) -> None:
        self.id = id
        super().__init__(f"duplicate node {id!r}")


class DanglingEdge(PleadError):
    code = "DanglingEdge"

    def __init__(self, src: str, dst: str) -> None:
        self.src = src
        self.dst = dst
        super().__init__(f"edge {src!r} -> {dst!r} references an unknown node")


class KindViolation(PleadError):
    code = "KindViolation"

    def __init__(self, edge, detail: str = "") -> None:
        self.edge = edge
        super().__init__(f"{edge.relation.value} {edge.src!r} -> {edge.dst!r}: {detail}")


class UnknownSubject(PleadError):
    code = "UnknownSubject"

    def __init__(self, id: str) -> None:
        self.id = id
        super().__init__(f"unknown subject node {id!r}")


# content-matcher -----------------------------------------------------------


class UnmappedItem(PleadError):
    code = "UnmappedItem"

    def __init__(self, item_id: str) -> None:
        self.item_id = item_id
        super().__init__(f"no pattern mapped for minimum-content item {item_id!r}")


class BadSelector(PleadError):
    code = "BadSelector"

    def __init__(self, item_id: str, reason: str) -> None:
        self.item_id = item_id
        self.reason = reason
        super().__init__(f"item {item_id!r}: {reason}")


# renderer ------------------------------------------------------------------


class NoTemplate(PleadError):
    code = "NoTemplate"

    def __init__(self, requirement_id: str, recipient: str) -> None:
        self.requirement_id = requirement_id
        self.recipient = recipient
        super().__init__(f"no template admits requirement {requirement_id!r} for {recipient!r}")


class MissingContent(PleadError):
    code = "MissingContent"

    def __init__(self, item_ids: Iterable[str]) -> None:
        self.item_ids = tuple(item_ids)
        super().__init__("required content unavailable: " + ", ".join(self.item_ids))


class ConfidentialOutward(PleadError):
    code = "ConfidentialOutward"

    def __init__(self, recipient: str) -> None:
        self.recipient = recipient
        super().__init__(f"confidential explanation cannot go to outward-facing {recipient!r}")


class UnboundSlot(PleadError):
    code = "UnboundSlot"

    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"slot {{{name}}} cannot be bound")


class MissingCategoryLabel(PleadError):
    code = "MissingCategoryLabel"

    def __init__(self, key: str = "") -> None:
        super().__init__(f"identifiable attribute {key!r} has no category label".replace(" '' ", " "))


class TemplateSyntaxError(PleadError):
    code = "TemplateSyntaxError"


# delivery-engine -----------------------------------------------------------


class StaleGraph(PleadError):
    code = "StaleGraph"

    def __init__(self, subject: str) -> None:
        self.subject = subject
        super().__init__(f"ex-post requirement fired for {subject!r} but no decision node exists")


class MalformedEvent(PleadError):
    code = "MalformedEvent"
