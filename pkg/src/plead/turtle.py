"""A small Turtle subset: enough to read and write the explanation vocabulary.

Supported: ``@prefix`` / ``PREFIX`` directives, absolute ``<IRI>`` refs,
prefixed names, ``a``, predicate lists (``;``), object lists (``,``), plain
double-quoted string literals with backslash escapes, and ``#`` comments.
Blank nodes, collections, numeric/boolean literals, datatypes and language
tags are rejected with a :class:`TurtleSyntaxError`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Union

from .errors import TurtleSyntaxError, UnknownPrefix, UnserializableName

PLEAD = "https://openprovenance.org/ns/plead#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
XSD = "http://www.w3.org/2001/XMLSchema#"
DCTERMS = "http://purl.org/dc/terms/"

DEFAULT_PREFIXES: dict[str, str] = {
    "plead": PLEAD,
    "rdf": RDF,
    "rdfs": RDFS,
    "owl": OWL,
    "xsd": XSD,
    "dcterms": DCTERMS,
}

RDF_TYPE = RDF + "type"


@dataclass(frozen=True, order=True)
class IRI:
    value: str

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, order=True)
class Literal:
    value: str

    def __str__(self) -> str:
        return self.value


Term = Union[IRI, Literal]
Triple = tuple[IRI, IRI, Term]


@dataclass(frozen=True)
class TripleSet:
    triples: frozenset[Triple]
    prefixes: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_PREFIXES), hash=False, compare=False)

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self):
        return iter(sorted(self.triples, key=_triple_key))

    def subjects(self) -> list[IRI]:
        return sorted({s for s, _, _ in self.triples})

    def objects(self, subject: IRI, predicate: IRI) -> list[Term]:
        return sorted((o for s, p, o in self.triples if s == subject and p == predicate), key=_term_key)

    def match(self, s: IRI | None = None, p: IRI | None = None, o: Term | None = None) -> list[Triple]:
        return sorted(
            (t for t in self.triples if (s is None or t[0] == s) and (p is None or t[1] == p) and (o is None or t[2] == o)),
            key=_triple_key,
        )


def _term_key(t: Term) -> tuple[int, str]:
    return (0 if isinstance(t, IRI) else 1, t.value)


def _triple_key(t: Triple):
    return (t[0].value, t[1].value, _term_key(t[2]))


# lexer ---------------------------------------------------------------------

_PN_PREFIX = r"(?:[A-Za-z](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)?"
_PN_LOCAL = r"(?:[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)?"
LOCAL_NAME_RE = re.compile(r"[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?\Z")

_TOKEN_RE = re.compile(
    rf"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<iri><[^<>"{{}}|^`\\\x00-\x20]*>)
  | (?P<string>"(?:[^"\\\n\r]|\\.)*")
  | (?P<directive>@prefix\b)
  | (?P<sparql_prefix>PREFIX\b)
  | (?P<pname>{_PN_PREFIX}:{_PN_LOCAL})
  | (?P<a>a(?=[\s,;.<"\#]))
  | (?P<punct>[.;,])
    """,
    re.VERBOSE,
)

_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", '"': '"', "'": "'", "\\": "\\", "b": "\b", "f": "\f"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            snippet = text[pos : pos + 10].split("\n")[0]
            raise TurtleSyntaxError(line, col, f"a term, punctuation or directive (found {snippet!r})")
        kind = m.lastgroup
        assert kind is not None
        chunk = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


def _unescape(body: str, tok: _Tok) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        nxt = body[i + 1]
        if nxt in _ESCAPES:
            out.append(_ESCAPES[nxt])
            i += 2
        elif nxt in "uU":
            width = 4 if nxt == "u" else 8
            digits = body[i + 2 : i + 2 + width]
            if len(digits) != width or not re.fullmatch(r"[0-9A-Fa-f]+", digits):
                raise TurtleSyntaxError(tok.line, tok.col + i + 1, f"{width} hex digits after \\{nxt}")
            out.append(chr(int(digits, 16)))
            i += 2 + width
        else:
            raise TurtleSyntaxError(tok.line, tok.col + i + 1, "a valid string escape")
    return "".join(out)


# parser --------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str, prefixes: dict[str, str]) -> None:
        self.toks = _tokenize(text)
        self.i = 0
        self.prefixes = dict(prefixes)
        self.triples: set[Triple] = set()

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, expected: str):
        raise TurtleSyntaxError(self.tok.line, self.tok.col, expected)

    def take(self, kind: str, text: str | None = None, expected: str | None = None) -> _Tok:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            self.fail(expected or repr(text or kind))
        self.i += 1
        return t

    def parse(self) -> TripleSet:
        while self.tok.kind != "eof":
            if self.tok.kind == "directive":
                self.i += 1
                self.prefix_decl()
                self.take("punct", ".", "'.' after @prefix")
            elif self.tok.kind == "sparql_prefix":
                self.i += 1
                self.prefix_decl()
            else:
                self.statement()
        return TripleSet(frozenset(self.triples), self.prefixes)

    def prefix_decl(self) -> None:
        t = self.take("pname", expected="prefix name ending in ':'")
        name, _, local = t.text.partition(":")
        if local:
            raise TurtleSyntaxError(t.line, t.col, "prefix name ending in ':'")
        iri = self.take("iri", expected="<IRI> for prefix")
        self.prefixes[name] = iri.text[1:-1]

    def iri(self, expected: str) -> IRI:
        t = self.tok
        if t.kind == "iri":
            self.i += 1
            return IRI(t.text[1:-1])
        if t.kind == "pname":
            self.i += 1
            prefix, _, local = t.text.partition(":")
            if prefix not in self.prefixes:
                raise UnknownPrefix(prefix)
            return IRI(self.prefixes[prefix] + local)
        self.fail(expected)

    def statement(self) -> None:
        subject = self.iri("subject IRI or prefixed name")
        self.predicate_object_list(subject)
        self.take("punct", ".", "'.' to end the statement")

    def predicate_object_list(self, subject: IRI) -> None:
        while True:
            if self.tok.kind == "a":
                self.i += 1
                predicate = IRI(RDF_TYPE)
            else:
                predicate = self.iri("predicate")
            while True:
                self.triples.add((subject, predicate, self.object()))
                if self.tok.kind == "punct" and self.tok.text == ",":
                    self.i += 1
                    continue
                break
            if self.tok.kind == "punct" and self.tok.text == ";":
                # Repeated or trailing ';' are allowed before '.'.
                while self.tok.kind == "punct" and self.tok.text == ";":
                    self.i += 1
                if self.tok.kind == "punct" and self.tok.text == ".":
                    return
                continue
            return

    def object(self) -> Term:
        t = self.tok
        if t.kind == "string":
            self.i += 1
            return Literal(_unescape(t.text[1:-1], t))
        return self.iri("object IRI, prefixed name or string literal")


def parse_turtle(text: str, prefixes: dict[str, str] | None = None) -> TripleSet:
    """Parse ``text`` into a :class:`TripleSet`.

    The ``plead``, ``rdf``, ``rdfs``, ``owl``, ``xsd`` and ``dcterms`` prefixes
    are pre-bound so fragments without directives still parse; explicit
    ``@prefix`` lines override them.
    """
    return _Parser(text, DEFAULT_PREFIXES if prefixes is None else prefixes).parse()


# writer --------------------------------------------------------------------


def escape_literal(value: str) -> str:
    out = value.replace("\\", "\\\\").replace('"', '\\"')
    return out.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")


def local_name(name: str) -> str:
    if not LOCAL_NAME_RE.match(name):
        raise UnserializableName(name)
    return name


class TurtleWriter:
    """Deterministic serializer: subjects and predicates sorted, ``rdf:type`` first."""

    def __init__(self, prefixes: dict[str, str] | None = None) -> None:
        self.prefixes = dict(DEFAULT_PREFIXES if prefixes is None else prefixes)
        # Longest namespace first so nested namespaces pick the most specific prefix.
        self._by_ns = sorted(self.prefixes.items(), key=lambda kv: (-len(kv[1]), kv[0]))

    def term(self, t: Term) -> str:
        if isinstance(t, Literal):
            return f'"{escape_literal(t.value)}"'
        for prefix, ns in self._by_ns:
            if t.value.startswith(ns):
                local = t.value[len(ns) :]
                if local == "" or LOCAL_NAME_RE.match(local):
                    return f"{prefix}:{local}"
        return f"<{t.value}>"

    def header(self) -> str:
        return "".join(f"@prefix {p}: <{ns}> .\n" for p, ns in sorted(self.prefixes.items()))

    def block(self, subject: IRI, triples: Iterable[Triple], comment: bool = False) -> str:
        by_pred: dict[IRI, list[Term]] = {}
        for s, p, o in triples:
            if s == subject:
                by_pred.setdefault(p, []).append(o)
        preds = sorted(by_pred, key=lambda p: (p.value != RDF_TYPE, self.term(p)))
        lines = []
        if comment:
            lines.append(f"### {subject.value}")
        head = self.term(subject)
        for pi, p in enumerate(preds):
            objs = sorted(set(by_pred[p]), key=lambda o: (_term_key(o)[0], self.term(o)))
            lead = f"{head} " if pi == 0 else "    "
            first = f"{lead}{self.term(p)} {self.term(objs[0])}"
            rest = [f"        {self.term(o)}" for o in objs[1:]]
            chunk = [first] + rest
            for k in range(len(chunk) - 1):
                chunk[k] += " ,"
            chunk[-1] += " ." if pi == len(preds) - 1 else " ;"
            lines.extend(chunk)
        return "\n".join(lines) + "\n"

    def document(self, triples: Iterable[Triple], order: list[IRI] | None = None, comments: bool = False) -> str:
        triples = set(triples)
        subjects = order if order is not None else sorted({s for s, _, _ in triples})
        parts = [self.header()]
        for s in subjects:
            parts.append("\n" + self.block(s, triples, comment=comments))
        return "".join(parts)


def write_turtle(ts: TripleSet | Iterable[Triple], prefixes: dict[str, str] | None = None) -> str:
    triples = ts.triples if isinstance(ts, TripleSet) else ts
    if prefixes is None and isinstance(ts, TripleSet):
        prefixes = ts.prefixes
    return TurtleWriter(prefixes).document(triples)
