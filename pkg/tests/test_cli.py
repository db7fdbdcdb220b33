import json
import os
import subprocess
import sys

import pytest

from facadex.cli import (EXIT_FAILURE, EXIT_OK, EXIT_USAGE, MissingParameterError, expand_basil, fill_pattern,
                         find_parameters, main, parse_inline_values, substitute)
from facadex.rdf import parse_rdf
from facadex.rdf.terms import IRI, Literal
from facadex.results import read_bindings
from facadex.sparql.evaluator import Engine

from conftest import SPARQL_PREFIXES, assert_iso, multiset, run_fx, ttl

LOREM = "lorem ipsum dolor sit amet"


@pytest.fixture
def work(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


# -- parameter expansion ---------------------------------------------------------

def test_find_parameters():
    assert find_parameters("SELECT ?x { ?x ?_p ?__o . <x-sparql-anything:location=?_file> }") == ({"p", "file"}, {"o"})


def test_expand_two_rows_two_queries():
    text = "SELECT * { SERVICE <x-sparql-anything:location=?_file> { ?s ?p ?o } }"
    out = expand_basil(text, [{"file": Literal("a.csv")}, {"file": Literal("b.csv")}])
    assert out == [text.replace("?_file", "a.csv"), text.replace("?_file", "b.csv")]


def test_expand_without_parameters_is_identity():
    text = "SELECT * { ?s ?p ?o }"
    assert expand_basil(text, [{"file": Literal("x")}]) == [text]


def test_expand_quotes_outside_iris():
    assert substitute('FILTER(?x = ?_name)', {"name": Literal('say "hi"')}) == 'FILTER(?x = "say \\"hi\\"")'
    assert substitute("BIND(?_t_iri AS ?t)", {"t": Literal("http://e/t")}) == "BIND(<http://e/t> AS ?t)"
    assert substitute("BIND(?_t AS ?t)", {"t": IRI("http://e/t")}) == "BIND(<http://e/t> AS ?t)"


def test_optional_parameters():
    assert substitute("BIND(?__lang AS ?l)", {}) == 'BIND("" AS ?l)'
    assert substitute("<http://e/?__x>", {}) == "<http://e/>"
    assert expand_basil("ASK { FILTER(?__x = \"\") }", []) == ['ASK { FILTER("" = "") }']


def test_missing_required_parameter():
    with pytest.raises(MissingParameterError):
        expand_basil("SELECT * { ?s ?p ?_o }", [])
    with pytest.raises(MissingParameterError):
        expand_basil("SELECT * { ?s ?p ?_o }", [{"other": Literal("1")}])


def test_inline_values_match_values_file():
    text = "SELECT * { SERVICE <x-sparql-anything:location=?_file> { ?s ?p ?o } }"
    _, rows = read_bindings("file\nx.json\n")
    assert expand_basil(text, parse_inline_values(["file=x.json"])) == expand_basil(text, rows)
    assert parse_inline_values(["?_a=1", "b=2"]) == [{"a": Literal("1"), "b": Literal("2")}]


def test_fill_pattern():
    assert fill_pattern("out-?_id.ttl", {"id": Literal("1")}) == "out-1.ttl"
    with pytest.raises(MissingParameterError):
        fill_pattern("out-?_id.ttl", {})


# -- end to end ------------------------------------------------------------------------

TEXT_QUERY = SPARQL_PREFIXES + """CONSTRUCT { ?s ?p ?o } WHERE {
  SERVICE <x-sparql-anything:location=lorem.txt> { ?s ?p ?o } }"""


def test_text_fixture_as_nt(work):
    write(work / "lorem.txt", LOREM)
    write(work / "q.sparql", TEXT_QUERY)
    proc = run_fx("-q", "q.sparql", "-f", "NT", cwd=work)
    assert proc.returncode == EXIT_OK, proc.stderr
    graph = parse_rdf(proc.stdout, "NT")
    assert len(graph) == 2
    assert_iso(graph, ttl(f'[] a fx:root ; rdf:_1 "{LOREM}"^^xsd:string .'))


def test_output_pattern_creates_file(work):
    write(work / "lorem.txt", LOREM)
    write(work / "q.sparql", SPARQL_PREFIXES + """CONSTRUCT { ?s <http://e/id> ?_id } WHERE {
      SERVICE <x-sparql-anything:location=lorem.txt> { ?s a fx:root } }""")
    assert main(["-q", "q.sparql", "-v", "id=1", "-p", "out-?_id.ttl"]) == EXIT_OK
    out = work / "out-1.ttl"
    assert out.exists()
    graph = parse_rdf(out.read_text(), "TTL")
    assert [t.o for t in graph] == [Literal("1")]


def test_values_file_runs_once_per_row(work):
    write(work / "q.sparql", "SELECT ?v WHERE { BIND(?_x AS ?v) }")
    write(work / "vals.json", json.dumps({"head": {"vars": ["x"]}, "results": {"bindings": [
        {"x": {"type": "literal", "value": v}} for v in ("a", "b", "c")]}}))
    assert main(["-q", "q.sparql", "-i", "vals.json", "-f", "CSV", "-p", "r-?_x.csv"]) == EXIT_OK
    files = sorted(p.name for p in work.glob("r-*.csv"))
    assert files == ["r-a.csv", "r-b.csv", "r-c.csv"]
    assert (work / "r-b.csv").read_bytes() == b"v\r\nb\r\n"


def test_output_file(work, capsys):
    write(work / "q.sparql", "ASK {}")
    assert main(["-q", "q.sparql", "-f", "JSON", "-o", "res.json"]) == EXIT_OK
    assert json.loads((work / "res.json").read_text())["boolean"] is True
    assert capsys.readouterr().out == ""


@pytest.mark.parametrize("argv", [
    [],
    ["-q", "q.sparql", "-p", "x-?_a.csv"],
    ["-q", "q.sparql", "-f", "YAML"],
    ["-q", "q.sparql", "-f", "TTL"],
    ["-q", "missing.sparql"],
    ["-q", "q.sparql", "-l", "data.unknown"],
    ["-q", "q.sparql", "-v", "novalue"],
])
def test_usage_errors_exit_2(work, argv, capsys):
    write(work / "q.sparql", "SELECT * { ?s ?p ?o }")
    write(work / "data.unknown", "")
    assert main(argv) == EXIT_USAGE
    assert capsys.readouterr().out == ""


def test_missing_q_via_process(work):
    proc = run_fx(cwd=work)
    assert proc.returncode == 2 and "-q" in proc.stderr and proc.stdout == ""


def test_execution_error_exits_1(work, capsys):
    write(work / "q.sparql", "SELECT * { SERVICE <x-sparql-anything:location=nope.csv> { ?s ?p ?o } }")
    assert main(["-q", "q.sparql"]) == EXIT_FAILURE
    err = capsys.readouterr()
    assert "nope.csv" in err.err and err.out == ""


def test_parse_error_exits_1(work):
    write(work / "q.sparql", "SELECT * {")
    assert main(["-q", "q.sparql"]) == EXIT_FAILURE


def test_stdout_purity_with_verbose_logging(work):
    write(work / "lorem.txt", LOREM)
    write(work / "q.sparql", TEXT_QUERY)
    env = dict(os.environ, FX_LOG="DEBUG")
    proc = subprocess.run([sys.executable, "-m", "facadex.cli", "-q", "q.sparql", "-f", "NT"], cwd=work, env=env,
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert len(parse_rdf(proc.stdout, "NT")) == 2
    assert "run 1" in proc.stderr


def test_load_pipeline_closure(work):
    write(work / "data.json", '{"people": [{"name": "Ann", "age": 31}, {"name": "Bob", "age": 27}]}')
    write(work / "build.sparql", SPARQL_PREFIXES + """CONSTRUCT { ?p <http://e/name> ?n ; <http://e/age> ?a } WHERE {
      SERVICE <x-sparql-anything:location=data.json> { ?p xyz:name ?n ; xyz:age ?a } }""")
    write(work / "ask.sparql", "SELECT ?n ?a WHERE { ?p <http://e/name> ?n ; <http://e/age> ?a }")
    assert main(["-q", "build.sparql", "-f", "NT", "-o", "out.nt"]) == EXIT_OK
    proc = run_fx("-q", "ask.sparql", "-l", "out.nt", "-f", "JSON", cwd=work)
    _, rows = read_bindings(proc.stdout)
    direct = Engine(parse_rdf((work / "out.nt").read_text(), "NT")).query((work / "ask.sparql").read_text())
    assert len(rows) == 2 and multiset(rows) == multiset(direct.rows)


def test_default_formats(work, capsys):
    write(work / "s.sparql", 'SELECT ?x WHERE { BIND("a" AS ?x) }')
    assert main(["-q", "s.sparql"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0].startswith("| ?x")
    write(work / "c.sparql", "CONSTRUCT { <http://e/a> <http://e/p> <http://e/b> } WHERE {}")
    assert main(["-q", "c.sparql"]) == EXIT_OK
    assert len(parse_rdf(capsys.readouterr().out, "TTL")) == 1


def test_load_folder_merges_files(work, capsys):
    data = work / "rdf"
    data.mkdir()
    write(data / "a.nt", '_:b <http://e/p> "one" .\n')
    write(data / "b.ttl", '_:b <http://e/p> "two" .\n')
    write(data / "notes.txt", "ignored")
    write(work / "q.sparql", "SELECT DISTINCT ?s WHERE { ?s ?p ?o }")
    assert main(["-q", "q.sparql", "-l", "rdf", "-f", "CSV"]) == EXIT_OK
    # each file keeps its own blank node
    assert len(capsys.readouterr().out.splitlines()) == 3
