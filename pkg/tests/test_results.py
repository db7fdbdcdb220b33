import csv
import io
import json
import xml.etree.ElementTree as ET

import pytest

from facadex.rdf.terms import IRI, BNode, Literal
from facadex.rdf.vocab import XSD
from facadex.results import (FormatError, check_compatible, default_format, format_result, read_bindings,
                             read_csv_results, read_json_results, to_csv, to_json, to_text, to_xml)
from facadex.sparql.evaluator import Engine, QueryResult

from conftest import SPARQL_PREFIXES, facade

SR = "{http://www.w3.org/2005/sparql-results#}"

MIXED = QueryResult("SELECT", ["a", "b"], [
    {"a": IRI("http://e/x"), "b": Literal("1", XSD + "integer")},
    {"a": BNode("n1"), "b": Literal("hi, \"you\"", lang="en")},
    {"a": Literal("plain")},
])


def test_zero_rows_csv_is_header_only():
    r = Engine().query("SELECT ?x ?y WHERE { ?x <http://e/p> ?y }")
    assert to_csv(r) == "x,y\r\n"


def test_json_gender_row_read_by_json_module():
    g = facade('{"fc":"Kazimir Malevich","gender":"Male"}', "application/json")
    r = Engine(g).query(SPARQL_PREFIXES + "SELECT ?g WHERE { ?s xyz:gender ?g }")
    doc = json.loads(to_json(r))
    assert doc["head"]["vars"] == ["g"]
    assert doc["results"]["bindings"] == [{"g": {"type": "literal", "value": "Male"}}]


def test_json_round_trip():
    variables, rows = read_json_results(to_json(MIXED))
    assert variables == ["a", "b"] and rows == MIXED.rows


def test_ask_encodings():
    yes = QueryResult("ASK", boolean=True)
    assert json.loads(to_json(yes)) == {"head": {}, "boolean": True}
    assert to_text(yes) == "true\n"
    assert list(csv.reader(io.StringIO(to_csv(yes)))) == [["_askResult"], ["true"]]
    assert ET.fromstring(to_xml(QueryResult("ASK", boolean=False))).find(SR + "boolean").text == "false"


def test_xml_parses_with_elementtree():
    root = ET.fromstring(to_xml(MIXED))
    assert [v.get("name") for v in root.iter(SR + "variable")] == ["a", "b"]
    results = root.find(SR + "results").findall(SR + "result")
    assert len(results) == 3
    first = {b.get("name"): b[0] for b in results[0]}
    assert first["a"].tag == SR + "uri" and first["a"].text == "http://e/x"
    assert first["b"].get("datatype") == XSD + "integer"
    second = {b.get("name"): b[0] for b in results[1]}
    assert second["a"].tag == SR + "bnode"
    assert second["b"].get("{http://www.w3.org/XML/1998/namespace}lang") == "en"
    assert len(results[2]) == 1


def test_csv_quoting_and_plain_values():
    rows = list(csv.reader(io.StringIO(to_csv(MIXED))))
    assert rows == [["a", "b"], ["http://e/x", "1"], ["_:n1", 'hi, "you"'], ["plain", ""]]
    header, parsed = read_csv_results(to_csv(MIXED))
    assert header == ["a", "b"] and parsed[2] == {"a": Literal("plain")}


def test_text_layout():
    lines = to_text(MIXED).splitlines()
    assert lines[0].startswith("| ?a") and set(lines[1]) <= {"|", "-"}
    assert len({len(line) for line in lines}) == 1
    assert "<http://e/x>" in lines[2] and '"hi, \\"you\\""@en' in lines[3]


def test_defaults_and_compatibility():
    assert default_format("SELECT") == "TEXT" and default_format("CONSTRUCT") == "TTL"
    for form, fmt in (("CONSTRUCT", "CSV"), ("SELECT", "TTL"), ("ASK", "NT"), ("SELECT", "YAML")):
        with pytest.raises(FormatError):
            check_compatible(form, fmt)
    check_compatible("SELECT", "json")


def test_construct_formats():
    r = Engine().query("CONSTRUCT { <http://e/a> <http://e/p> 1 } WHERE {}")
    assert format_result(r, "NT").strip() == '<http://e/a> <http://e/p> "1"^^<http://www.w3.org/2001/XMLSchema#integer> .'


def test_read_bindings_sniffs_format():
    assert read_bindings('{"head":{"vars":["id"]},"results":{"bindings":[{"id":{"type":"literal","value":"1"}}]}}') \
        == (["id"], [{"id": Literal("1")}])
    assert read_bindings("id\n1\n2\n") == (["id"], [{"id": Literal("1")}, {"id": Literal("2")}])
