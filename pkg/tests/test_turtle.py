import pytest
from hypothesis import given, settings, strategies as st

from oracle import our_triples, rdflib_triples
from plead.errors import TurtleSyntaxError, UnknownPrefix, UnserializableName
from plead.turtle import IRI, PLEAD, RDF_TYPE, Literal, TripleSet, escape_literal, local_name, parse_turtle, write_turtle


def test_parse_prefixes_and_lists():
    ts = parse_turtle(
        "@prefix ex: <http://example.org/> .\n"
        "ex:a a ex:B ; ex:p ex:c , ex:d ; ex:q \"hi\" .  # trailing comment\n"
    )
    assert len(ts) == 4
    a = IRI("http://example.org/a")
    assert ts.objects(a, IRI(RDF_TYPE)) == [IRI("http://example.org/B")]
    assert Literal("hi") in ts.objects(a, IRI("http://example.org/q"))


def test_sparql_style_prefix_and_full_iris():
    ts = parse_turtle("PREFIX ex: <http://e/>\n<http://e/s> ex:p <http://e/o> .")
    assert list(ts)[0] == (IRI("http://e/s"), IRI("http://e/p"), IRI("http://e/o"))


def test_string_escapes():
    ts = parse_turtle('plead:s plead:p "a \\"quoted\\" \\\\ word\\n" .')
    (_, _, o), = ts
    assert o == Literal('a "quoted" \\ word\n')


def test_unknown_prefix():
    with pytest.raises(UnknownPrefix):
        parse_turtle("nope:a nope:b nope:c .")


@pytest.mark.parametrize("text", ["plead:a plead:b", "plead:a plead:b plead:c", "plead:a ; .", 'plead:a plead:b "open'])
def test_syntax_errors(text):
    with pytest.raises(TurtleSyntaxError):
        parse_turtle(text)


def test_syntax_error_location():
    with pytest.raises(TurtleSyntaxError) as exc:
        parse_turtle("plead:a plead:b plead:c .\nplead:d plead:e @ .")
    assert exc.value.line == 2


def test_local_name_rules():
    assert local_name("ex_ante") == "ex_ante"
    for bad in ("", "has space", "a/b", "trailing."):
        with pytest.raises(UnserializableName):
            local_name(bad)


def test_escape_literal_round_trip():
    for s in ['plain', 'with "quotes"', "back\\slash", "tab\tnew\nline", "€ ± é"]:
        ts = parse_turtle(f'plead:s plead:p "{escape_literal(s)}" .')
        assert list(ts)[0][2] == Literal(s)


def test_writer_output_parses_identically():
    text = open_fixture_ttl()
    ts = parse_turtle(text)
    again = parse_turtle(write_turtle(ts))
    assert again == ts


def open_fixture_ttl():
    from importlib.resources import files

    return (files("plead") / "data" / "xplain1.ttl").read_text(encoding="utf-8")


def test_parser_agrees_with_rdflib_on_fixture():
    text = open_fixture_ttl()
    assert our_triples(parse_turtle(text)) == rdflib_triples(text)


_names = st.from_regex(r"[a-z][a-z0-9_]{0,8}", fullmatch=True)
_literals = st.text(st.characters(blacklist_categories=("Cs", "Cc"), blacklist_characters="\x7f"), max_size=20) | st.sampled_from(
    ["a\nb", "t\tab", 'q"q', "b\\s"]
)


@settings(max_examples=200, deadline=None)
@given(st.sets(st.tuples(_names, _names, st.one_of(_names.map(lambda n: ("I", n)), _literals.map(lambda v: ("L", v)))), max_size=12))
def test_random_triples_round_trip(raw):
    triples = frozenset(
        (IRI(PLEAD + s), IRI(PLEAD + p), IRI(PLEAD + o[1]) if o[0] == "I" else Literal(o[1])) for s, p, o in raw
    )
    ts = TripleSet(triples, {"plead": PLEAD})
    text = write_turtle(ts)
    assert parse_turtle(text).triples == triples
    assert rdflib_triples(text) == our_triples(ts)
