import random

import pytest

from facadex.errors import RdfSyntaxError
from facadex.rdf import (FORMATS, Dataset, Graph, InvalidIndexError, isomorphic, member, member_index,
                         parse_rdf, serialize_graph)
from facadex.rdf.terms import IRI, BNode, Literal, Triple, make_triple
from facadex.rdf.vocab import FX, RDF, RDF_LANGSTRING, XSD, XSD_INT, XYZ

from conftest import ttl
from gen import random_graph


def test_member_builds_rdf_n():
    assert member(1) == IRI(RDF + "_1")
    assert member(2) == IRI(RDF + "_2")
    assert member(1000).value.endswith("#_1000")


@pytest.mark.parametrize("n", [0, -3])
def test_member_rejects_non_positive(n):
    with pytest.raises(InvalidIndexError):
        member(n)


def test_member_index():
    assert member_index(IRI(RDF + "_3")) == 3
    assert member_index(IRI(XYZ + "id")) is None
    assert member_index(IRI(RDF + "_0")) is None
    assert member_index(IRI(RDF + "_01")) is None
    assert member_index(Literal("_1")) is None


def test_member_index_inverts_member():
    for n in (1, 2, 17, 10 ** 6):
        assert member_index(member(n)) == n


def test_iri_must_be_absolute():
    with pytest.raises(ValueError):
        IRI("relative/path")


def test_language_literal_datatype():
    lit = Literal("x", lang="EN")
    assert lit.lang == "en" and lit.datatype == RDF_LANGSTRING
    with pytest.raises(ValueError):
        Literal("x", RDF_LANGSTRING)


def test_triple_position_checks():
    with pytest.raises(ValueError):
        make_triple(Literal("a"), IRI(XYZ + "p"), Literal("b"))
    with pytest.raises(ValueError):
        make_triple(BNode("a"), BNode("p"), Literal("b"))


def test_graph_duplicates_are_noops():
    g = Graph()
    t = Triple(BNode("a"), IRI(XYZ + "id"), Literal("1"))
    g.add(t)
    g.add(t)
    assert len(g) == 1


def test_serialize_empty_nt():
    assert serialize_graph(Graph(), "NT") == ""


def test_serialize_single_root_triple():
    g = Graph([Triple(BNode("b0"), IRI(RDF + "type"), IRI(FX + "root"))])
    out = serialize_graph(g, "NT")
    assert out.count("\n") == 1 and out.endswith(" .\n")


def test_parse_empty_nt():
    assert len(parse_rdf("", "NT")) == 0


def test_json_example_turtle_has_seven_triples():
    # the worked JSON example, with its punctuation slips corrected
    g = ttl("""
    [ a fx:root ;
      xyz:fc "Kazimir Malevich" ;
      xyz:gender "Male" ;
      xyz:id "1561"^^xsd:int ;
      xyz:activePlaces [ rdf:_1 "Ukrayina" ; rdf:_2 "Moskov" ] ] .
    """)
    assert len(g) == 7
    ids = list(g.triples(None, IRI(XYZ + "id"), None))
    assert ids[0].o == Literal("1561", XSD_INT)


def test_turtle_literals_and_lists():
    g = ttl('<http://e/s> <http://e/p> 1, 2.5, true, "x"@it, "y"^^<http://e/dt> .')
    objects = {t.o for t in g}
    assert Literal("1", XSD + "integer") in objects
    assert Literal("2.5", XSD + "decimal") in objects
    assert Literal("true", XSD + "boolean") in objects
    assert Literal("x", lang="it") in objects
    assert Literal("y", "http://e/dt") in objects


def test_parse_error_reports_position():
    with pytest.raises(RdfSyntaxError) as info:
        parse_rdf("<http://e/s> <http://e/p> .\n", "NT")
    assert info.value.line == 1


def test_turtle_error_line():
    with pytest.raises(RdfSyntaxError) as info:
        parse_rdf("@prefix e: <http://e/> .\ne:s e:p e:o .\ne:s e:p ;\n", "TTL")
    assert info.value.line >= 3


def test_nq_promotes_bare_graph():
    g = ttl("[] a fx:root ; rdf:_1 \"x\" .")
    back = parse_rdf(serialize_graph(g, "NQ"), "NQ")
    assert isinstance(back, Dataset)
    assert isomorphic(back.union_graph(), g)


def test_nq_keeps_named_graphs():
    name = IRI("http://e/g")
    ds = Dataset(Graph([Triple(IRI("http://e/a"), IRI("http://e/p"), Literal("d"))]),
                 {name: Graph([Triple(BNode("x"), IRI("http://e/p"), Literal("n"))])})
    back = parse_rdf(serialize_graph(ds, "NQ"), "NQ")
    assert len(back.graph(None)) == 1 and len(back.graph(name)) == 1


def test_isomorphic_basics():
    a = Graph([Triple(BNode("a"), IRI(XYZ + "id"), Literal("1"))])
    z = Graph([Triple(BNode("z"), IRI(XYZ + "id"), Literal("1"))])
    two = Graph([Triple(BNode("a"), IRI(XYZ + "id"), Literal("2"))])
    assert isomorphic(a, a)
    assert isomorphic(a, z)
    assert not isomorphic(a, two)


def test_isomorphism_distinguishes_structure():
    chain = ttl("_:a rdf:_1 _:b . _:b rdf:_1 _:c .")
    star = ttl("_:a rdf:_1 _:b . _:a rdf:_1 _:c .")
    assert not isomorphic(chain, star)


def test_isomorphism_on_symmetric_cycles():
    # two 3-cycles versus one 6-cycle: same degree signature everywhere
    p = "<http://e/p>"
    two = ttl(f"_:a {p} _:b . _:b {p} _:c . _:c {p} _:a . _:d {p} _:e . _:e {p} _:f . _:f {p} _:d .")
    six = ttl(f"_:a {p} _:b . _:b {p} _:c . _:c {p} _:d . _:d {p} _:e . _:e {p} _:f . _:f {p} _:a .")
    assert not isomorphic(two, six)
    shuffled = ttl(f"_:x {p} _:y . _:y {p} _:z . _:z {p} _:x . _:u {p} _:v . _:v {p} _:w . _:w {p} _:u .")
    assert isomorphic(two, shuffled)


def _relabel(g: Graph, rng: random.Random) -> Graph:
    labels = {}
    out = Graph()

    def m(t):
        if isinstance(t, BNode):
            if t not in labels:
                labels[t] = BNode(f"q{rng.randrange(10 ** 9)}_{len(labels)}")
            return labels[t]
        return t

    for t in g:
        out.add(Triple(m(t.s), t.p, m(t.o)))
    return out


def test_isomorphism_is_an_equivalence_on_random_graphs():
    rng = random.Random(7)
    for _ in range(30):
        g = random_graph(rng, 30)
        h = _relabel(g, rng)
        k = _relabel(h, rng)
        assert isomorphic(g, g)
        assert isomorphic(g, h) and isomorphic(h, g)
        assert isomorphic(h, k) and isomorphic(g, k)


def test_isomorphism_detects_single_change():
    rng = random.Random(11)
    for _ in range(30):
        g = random_graph(rng, 30)
        if not len(g):
            continue
        h = _relabel(g, rng)
        victim = next(iter(h))
        h2 = Graph(t for t in h if t != victim)
        h2.add(Triple(victim.s, victim.p, Literal("changed-value")))
        assert not isomorphic(g, h2)


@pytest.mark.parametrize("fmt", FORMATS)
def test_round_trip_random(fmt):
    rng = random.Random(FORMATS.index(fmt))
    for _ in range(25):
        g = random_graph(rng, 50)
        back = parse_rdf(serialize_graph(g, fmt), fmt)
        if isinstance(back, Dataset):
            back = back.union_graph()
        assert isomorphic(back, g)


def test_turtle_uses_prefixes():
    g = ttl('[] a fx:root ; xyz:title "t" .')
    out = serialize_graph(g, "TTL")
    assert "fx:root" in out and "xyz:title" in out
    assert "fx:Root" not in out
