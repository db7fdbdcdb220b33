"""Parser and expression-level behaviour."""

import pytest

from facadex.errors import QueryParseError
from facadex.rdf.terms import IRI, BNode, Literal
from facadex.rdf.vocab import XSD
from facadex.sparql.algebra import BGP, Bind, Optional_, Service, Union_, Values, Var
from facadex.sparql.expressions import Context, ExprError, cast, compare, ebv, equals, evaluate, order_key
from facadex.sparql.parser import parse_query

from conftest import FIXTURES, SPARQL_PREFIXES

INT = XSD + "integer"


def expr(text, **row):
    """Evaluate a SPARQL expression through a SELECT projection."""
    q = parse_query(SPARQL_PREFIXES + f"SELECT ({text} AS ?r) WHERE {{}}")
    e = q.projection[0][1]
    return evaluate(e, {k: v for k, v in row.items()}, Context({}))


def test_arts_and_subjects_has_two_services():
    q = parse_query((FIXTURES / "tate" / "arts-and-subjects.rq").read_text())
    services = q.services()
    assert len(services) == 2
    assert isinstance(services[0].target, IRI)
    assert isinstance(services[1].target, Var) and services[1].target.name == "artworkMetadata"
    assert q.form == "CONSTRUCT" and len(q.template) == 5


def test_ask_empty():
    q = parse_query("ASK {}")
    assert q.form == "ASK"
    assert q.where.operands in ([], [BGP([])])


def test_select_star():
    q = parse_query("SELECT * { ?s ?p ?o }")
    assert q.projection is None
    (bgp,) = q.where.operands
    assert len(bgp.triples) == 1


def test_group_structure():
    q = parse_query("""
        SELECT ?a WHERE {
          ?a <http://e/p> ?b .
          OPTIONAL { ?b <http://e/q> ?c }
          { ?a <http://e/r> 1 } UNION { ?a <http://e/r> 2 }
          BIND(?b AS ?d)
          VALUES ?e { 1 2 }
          SERVICE SILENT <x-sparql-anything:content=x> { ?x ?y ?z }
          FILTER(?a != ?b)
        } ORDER BY DESC(?a) LIMIT 5 OFFSET 2
    """)
    kinds = [type(op) for op in q.where.operands]
    assert kinds == [BGP, Optional_, Union_, Bind, Values, Service]
    assert q.where.operands[-1].silent
    assert len(q.where.filters) == 1
    assert q.order_by[0].descending and q.limit == 5 and q.offset == 2


def test_prefixed_names_and_a():
    q = parse_query(SPARQL_PREFIXES + "SELECT * { ?s a fx:root ; xyz:k [ rdf:_1 ?v ] }")
    triples = q.where.operands[0].triples
    assert any(t.o == IRI("http://sparql.xyz/facade-x/ns/root") for t in triples)
    assert any(isinstance(t.s, Var) and t.s.hidden for t in triples)


@pytest.mark.parametrize("text,fragment", [
    ("SELECT", "SELECT"),
    ("SELECT ?x WHERE { ?x ?p }", ""),
    ("SELECT (COUNT(?x) AS ?n) { ?x ?p ?o }", "aggregate"),
    ("SELECT * { ?s ?p ?o } GROUP BY ?s", "GROUP"),
    ("SELECT * { ?s <http://e/a>/<http://e/b> ?o }", "path"),
    ("SELECT * { GRAPH ?g { ?s ?p ?o } }", "GRAPH"),
    ("SELECT * { ?s ?p ?o MINUS { ?s ?p 1 } }", "MINUS"),
    ("SELECT * { ?s xyz:p ?o }", "xyz"),
    ("DESCRIBE <http://e/x>", "DESCRIBE"),
])
def test_out_of_subset_errors(text, fragment):
    with pytest.raises(QueryParseError) as info:
        parse_query(text)
    assert fragment.lower() in str(info.value).lower()


def test_parse_error_position():
    with pytest.raises(QueryParseError) as info:
        parse_query("SELECT * {\n  ?s ?p \n}")
    assert info.value.line >= 2


# -- expressions ----------------------------------------------------------------

def test_arithmetic_and_promotion():
    assert expr("1 + 2") == Literal("3", INT)
    assert expr("7 / 2") == Literal("3.5", XSD + "decimal")
    assert expr("1.5 * 2").datatype == XSD + "decimal"
    assert expr("1e0 + 1").datatype == XSD + "double"
    assert expr('"2"^^xsd:int + 1').datatype == INT


def test_division_by_zero_is_error():
    with pytest.raises(ExprError):
        expr("1 / 0")


def test_string_builtins():
    assert expr('CONCAT("a", "b", "c")') == Literal("abc")
    assert expr('STRLEN("héllo")') == Literal("5", INT)
    assert expr('SUBSTR("A00001", 2, 3)') == Literal("000")
    assert expr('SUBSTR("AR00001", 3)') == Literal("00001")
    assert expr('UCASE("ab")') == Literal("AB") and expr('LCASE("AB")') == Literal("ab")
    assert expr('STRSTARTS("AR001", "AR")') == Literal("true", XSD + "boolean")
    assert expr('STRENDS("file.json", ".csv")') == Literal("false", XSD + "boolean")
    assert expr('CONTAINS("abc", "b")') == Literal("true", XSD + "boolean")
    assert expr('REPLACE("a-b-c", "-", "+")') == Literal("a+b+c")
    assert expr('REPLACE("abc", "(b)", "[$1]")') == Literal("a[b]c")
    assert expr('REGEX("Hello", "^h", "i")') == Literal("true", XSD + "boolean")
    assert expr('STR(<http://e/x>)') == Literal("http://e/x")


def test_language_preserved_by_string_functions():
    assert expr('UCASE("ab"@en)') == Literal("AB", lang="en")


def test_node_builtins():
    assert expr('IRI(CONCAT("http://e/", "x"))') == IRI("http://e/x")
    assert expr('STRDT("5", xsd:int)') == Literal("5", XSD + "int")
    assert isinstance(expr("BNODE()"), BNode)
    assert expr('DATATYPE("x")') == IRI(XSD + "string")


def test_if_coalesce_bound():
    assert expr('IF(1 < 2, "yes", "no")') == Literal("yes")
    assert expr("COALESCE(?missing, 3)") == Literal("3", INT)
    assert expr("BOUND(?x)", x=Literal("1")) == Literal("true", XSD + "boolean")
    assert expr("BOUND(?x)") == Literal("false", XSD + "boolean")


def test_logic_with_errors():
    # error || true is true; error && false is false
    assert expr("?u || true") == Literal("true", XSD + "boolean")
    assert expr("?u && false") == Literal("false", XSD + "boolean")
    with pytest.raises(ExprError):
        expr("?u || false")


def test_in_and_not_in():
    assert expr("2 IN (1, 2, 3)") == Literal("true", XSD + "boolean")
    assert expr('"a" NOT IN ("b")') == Literal("true", XSD + "boolean")


def test_casts():
    assert cast(XSD + "integer", Literal(" 42 ")) == Literal("42", INT)
    assert cast(XSD + "boolean", Literal("1")) == Literal("true", XSD + "boolean")
    assert cast(XSD + "string", IRI("http://e/")) == Literal("http://e/")
    with pytest.raises(ExprError):
        cast(XSD + "integer", Literal("x"))
    assert expr('xsd:integer("7") + 1') == Literal("8", INT)


def test_ebv():
    assert ebv(Literal("x")) and not ebv(Literal(""))
    assert not ebv(Literal("0", INT)) and ebv(Literal("0.1", XSD + "decimal"))
    with pytest.raises(ExprError):
        ebv(IRI("http://e/"))


def test_equality_and_comparison():
    assert equals(Literal("1", INT), Literal("1.0", XSD + "decimal"))
    assert not equals(Literal("a"), Literal("b"))
    assert compare("<", Literal("a"), Literal("b"))
    with pytest.raises(ExprError):
        compare("<", Literal("a"), Literal("1", INT))


def test_order_key_total():
    terms = [Literal("b"), IRI("http://e/a"), None, BNode("x"), Literal("2", INT), Literal("10", INT)]
    ordered = sorted(terms, key=order_key)
    assert ordered[0] is None and isinstance(ordered[1], BNode) and isinstance(ordered[2], IRI)
    nums = [t for t in ordered if isinstance(t, Literal) and t.datatype == INT]
    assert [n.lexical for n in nums] == ["2", "10"]
