import json
import threading
import urllib.error
import urllib.parse
import urllib.request
from concurrent.futures import ThreadPoolExecutor

import pytest

from facadex.endpoint import CSV, JSON_RESULTS, NTRIPLES, TURTLE, EndpointConfig, make_server, negotiate
from facadex.rdf import isomorphic, parse_rdf
from facadex.rdf.graph import Graph
from facadex.rdf.terms import IRI, Literal, Triple
from facadex.results import read_csv_results, read_json_results

from conftest import FIXTURES, run_fx


@pytest.fixture
def serve():
    servers = []

    def start(dataset=None, **kw):
        server = make_server(EndpointConfig(port=0, **kw), dataset)
        threading.Thread(target=server.serve_forever, kwargs={"poll_interval": 0.05}, daemon=True).start()
        servers.append(server)
        return f"http://127.0.0.1:{server.server_address[1]}"

    yield start
    for s in servers:
        s.shutdown()
        s.server_close()


def call(url, query=None, *, method="GET", body=None, ctype=None, accept=None, path="/sparql"):
    headers = {}
    if accept:
        headers["Accept"] = accept
    if ctype:
        headers["Content-Type"] = ctype
    target = url + path
    if method == "GET" and query is not None:
        target += "?" + urllib.parse.urlencode({"query": query})
    if method == "POST" and body is None:
        body = query.encode()
        headers.setdefault("Content-Type", "application/sparql-query")
    req = urllib.request.Request(target, data=body, headers=headers, method=method)
    try:
        with urllib.request.urlopen(req, timeout=30) as resp:
            return resp.status, resp.headers.get("Content-Type"), resp.read().decode()
    except urllib.error.HTTPError as err:
        return err.code, err.headers.get("Content-Type"), err.read().decode()


def test_ask_get(serve):
    status, ctype, body = call(serve(), "ASK {}")
    assert status == 200 and ctype.startswith(JSON_RESULTS)
    assert json.loads(body)["boolean"] is True


def test_malformed_is_400(serve):
    status, _, body = call(serve(), "SELECT")
    assert status == 400 and "parse" in body


def test_form_post_and_csv(serve):
    g = Graph([Triple(IRI("http://e/a"), IRI("http://e/p"), Literal("v"))])
    url = serve(g)
    body = urllib.parse.urlencode({"query": "SELECT ?o WHERE { ?s ?p ?o }"}).encode()
    status, ctype, text = call(url, method="POST", body=body, ctype="application/x-www-form-urlencoded",
                               accept="text/csv")
    assert status == 200 and ctype.startswith(CSV)
    assert read_csv_results(text) == (["o"], [{"o": Literal("v")}])


def test_construct_ntriples(serve):
    status, ctype, text = call(serve(), "CONSTRUCT { <http://e/a> <http://e/p> 1 } WHERE {}", method="POST",
                               accept="application/n-triples")
    assert status == 200 and ctype.startswith(NTRIPLES)
    assert len(parse_rdf(text, "NT")) == 1


def test_arts_and_subjects_matches_cli(serve):
    tate = FIXTURES / "tate"
    query = (tate / "arts-and-subjects.rq").read_text()
    status, ctype, text = call(serve(base_dir=str(tate)), query, method="POST")
    assert status == 200 and ctype.startswith(TURTLE)
    proc = run_fx("-q", "arts-and-subjects.rq", "-f", "TTL", cwd=tate)
    assert proc.returncode == 0, proc.stderr
    served, cli = parse_rdf(text, "TTL"), parse_rdf(proc.stdout, "TTL")
    assert len(served) > 0 and isomorphic(served, cli)


def test_status_codes(serve):
    url = serve(max_body=64)
    assert call(url, "ASK {}", path="/elsewhere")[0] == 404
    assert call(url, method="POST", body=b"x" * 100, ctype="application/sparql-query")[0] == 413
    assert call(url, method="POST", body=b"ASK {}", ctype="text/plain")[0] == 415
    assert call(url, path="/sparql")[0] == 400


def test_execution_error_is_500(serve):
    status, _, body = call(serve(), "SELECT * { SERVICE <x-sparql-anything:location=/no/file.csv> { ?s ?p ?o } }")
    assert status == 500 and "/no/file.csv" in body


def test_no_local_files(serve, tmp_path):
    (tmp_path / "d.csv").write_text("a\n")
    url = serve(allow_local=False)
    query = f"SELECT * {{ SERVICE <x-sparql-anything:location={tmp_path / 'd.csv'}> {{ ?s ?p ?o }} }}"
    assert call(url, query)[0] == 500
    inline = "SELECT * { SERVICE <x-sparql-anything:content=a,media-type=text/csv> { ?s ?p ?o } }"
    assert call(url, inline)[0] == 200


def test_timeout_is_504(serve):
    g = Graph(Triple(IRI(f"http://e/{i}"), IRI("http://e/p"), Literal(str(i))) for i in range(300))
    status, _, _ = call(serve(g, timeout=0.2), "SELECT * WHERE { ?a ?p ?x . ?b ?p ?y . ?c ?p ?z }")
    assert status == 504


def test_concurrent_identical_requests(serve):
    url = serve()
    query = ("SELECT ?v WHERE { SERVICE <x-sparql-anything:content=x%2Cy%2Cz,media-type=text/csv> "
             "{ ?r ?p ?v FILTER(isLiteral(?v)) } } ORDER BY ?v")
    with ThreadPoolExecutor(8) as pool:
        answers = list(pool.map(lambda _: call(url, query), range(16)))
    assert {a[0] for a in answers} == {200}
    parsed = [read_json_results(a[2]) for a in answers]
    assert all(p == parsed[0] for p in parsed)
    assert [r["v"].lexical for r in parsed[0][1]] == ["x", "y", "z"]


def test_negotiation():
    assert negotiate("", "SELECT") == JSON_RESULTS
    assert negotiate("text/csv;q=0.5, application/json", "SELECT") == JSON_RESULTS
    assert negotiate("text/html, text/csv", "ASK") == CSV
    assert negotiate("*/*", "CONSTRUCT") == TURTLE
    assert negotiate("application/n-triples", "CONSTRUCT") == NTRIPLES


def test_config_validation():
    with pytest.raises(ValueError):
        EndpointConfig(port=70000)
    with pytest.raises(ValueError):
        EndpointConfig(timeout=0)
