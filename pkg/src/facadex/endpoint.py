"""A small SPARQL protocol endpoint (query operation only) at ``/sparql``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional, Tuple
from urllib.parse import parse_qs, urlsplit

from .errors import FacadeError, QueryParseError, QueryTimeoutError
from .rdf.graph import Dataset, Graph
from .rdf import serialize_graph
from .results import to_csv, to_json
from .sparql.evaluator import Engine
from .sparql.parser import parse_query

log = logging.getLogger(__name__)

JSON_RESULTS = "application/sparql-results+json"
CSV = "text/csv"
TURTLE = "text/turtle"
NTRIPLES = "application/n-triples"


@dataclass(frozen=True)
class EndpointConfig:
    host: str = "127.0.0.1"
    port: int = 3000
    load: Optional[str] = None
    max_body: int = 1 << 20
    timeout: float = 30.0
    allow_local: bool = True
    base_dir: Optional[str] = None

    def __post_init__(self):
        if not 0 <= self.port <= 65535:  # 0 lets the OS pick, which tests rely on
            raise ValueError(f"port out of range: {self.port}")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_body <= 0:
            raise ValueError("max_body must be positive")


def _accepts(header: str) -> list:
    """Media types from an Accept header, best first."""
    ranked = []
    for pos, part in enumerate(header.split(",")):
        fields = [f.strip() for f in part.split(";")]
        if not fields[0]:
            continue
        q = 1.0
        for f in fields[1:]:
            if f.startswith("q="):
                try:
                    q = float(f[2:])
                except ValueError:
                    q = 0.0
        if q > 0:
            ranked.append((-q, pos, fields[0].lower()))
    return [m for _, _, m in sorted(ranked)]


def negotiate(accept: str, form: str) -> str:
    offered = (TURTLE, NTRIPLES) if form == "CONSTRUCT" else (JSON_RESULTS, CSV)
    aliases = {"application/json": JSON_RESULTS, "text/plain": NTRIPLES, "application/x-turtle": TURTLE}
    for media in _accepts(accept or ""):
        media = aliases.get(media, media)
        if media in offered:
            return media
    return offered[0]


def render(result, media: str, prefixes: Optional[dict] = None) -> bytes:
    if media == TURTLE:
        return serialize_graph(result.graph, "TTL", prefixes).encode("utf-8")
    if media == NTRIPLES:
        return serialize_graph(result.graph, "NT").encode("utf-8")
    if media == CSV:
        return to_csv(result).encode("utf-8")
    return to_json(result).encode("utf-8")


class SparqlHandler(BaseHTTPRequestHandler):
    server_version = "facadex-endpoint"
    protocol_version = "HTTP/1.1"

    @property
    def state(self) -> "_State":
        return self.server.state  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):
        log.info("%s " + fmt, self.address_string(), *args)

    def _send(self, status: int, body: bytes, media: str = "text/plain; charset=utf-8") -> None:
        self.send_response(status)
        self.send_header("Content-Type", media)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if self.command != "HEAD":
            self.wfile.write(body)

    def _error(self, status: HTTPStatus, message: str) -> None:
        self._send(status, (message.rstrip() + "\n").encode("utf-8"))

    def _route_ok(self) -> bool:
        if urlsplit(self.path).path.rstrip("/") != "/sparql":
            self._error(HTTPStatus.NOT_FOUND, "not found; the endpoint lives at /sparql")
            return False
        return True

    def do_GET(self):
        if not self._route_ok():
            return
        params = parse_qs(urlsplit(self.path).query)
        if "query" not in params:
            self._error(HTTPStatus.BAD_REQUEST, "missing 'query' parameter")
            return
        self._answer(params["query"][0])

    def do_POST(self):
        if not self._route_ok():
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            self._error(HTTPStatus.BAD_REQUEST, "bad Content-Length")
            return
        if length > self.state.config.max_body:
            self.close_connection = True
            self._error(HTTPStatus.REQUEST_ENTITY_TOO_LARGE, f"body exceeds {self.state.config.max_body} bytes")
            return
        body = self.rfile.read(length).decode("utf-8", errors="replace")
        ctype = (self.headers.get("Content-Type") or "").split(";")[0].strip().lower()
        if ctype == "application/sparql-query":
            self._answer(body)
        elif ctype == "application/x-www-form-urlencoded":
            params = parse_qs(body)
            if "query" not in params:
                self._error(HTTPStatus.BAD_REQUEST, "missing 'query' field")
                return
            self._answer(params["query"][0])
        else:
            self._error(HTTPStatus.UNSUPPORTED_MEDIA_TYPE,
                        "use application/sparql-query or application/x-www-form-urlencoded")

    def _answer(self, text: str) -> None:
        status, body, media = self.state.execute(text, self.headers.get("Accept", ""))
        self._send(status, body, media)


class _State:
    def __init__(self, config: EndpointConfig, dataset: Optional[Graph]):
        self.config = config
        self.dataset = dataset

    def execute(self, text: str, accept: str) -> Tuple[int, bytes, str]:
        try:
            query = parse_query(text)
        except QueryParseError as exc:
            return HTTPStatus.BAD_REQUEST, f"query parse error: {exc}\n".encode(), "text/plain; charset=utf-8"
        engine = Engine(self.dataset, allow_local=self.config.allow_local, base_dir=self.config.base_dir,
                        timeout=self.config.timeout)
        try:
            result = engine.query(query)
        except QueryTimeoutError as exc:
            return HTTPStatus.GATEWAY_TIMEOUT, f"{exc}\n".encode(), "text/plain; charset=utf-8"
        except FacadeError as exc:
            return HTTPStatus.INTERNAL_SERVER_ERROR, f"{exc}\n".encode(), "text/plain; charset=utf-8"
        except Exception as exc:  # keep the server alive on unexpected failures
            log.exception("query failed")
            return HTTPStatus.INTERNAL_SERVER_ERROR, f"internal error: {exc}\n".encode(), "text/plain; charset=utf-8"
        media = negotiate(accept, result.form)
        charset = "; charset=utf-8"
        return HTTPStatus.OK, render(result, media, query.prefixes), media + charset


def make_server(config: EndpointConfig, dataset: Optional[Graph] = None) -> ThreadingHTTPServer:
    """Bind a server without starting it; call ``serve_forever`` to run."""
    if dataset is None and config.load:
        from .cli import load_dataset

        dataset = load_dataset(config.load)
    server = ThreadingHTTPServer((config.host, config.port), SparqlHandler)
    server.daemon_threads = True
    server.state = _State(config, dataset.union_graph() if isinstance(dataset, Dataset) else dataset)
    return server


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, os.environ.get("FX_LOG", "INFO").upper(),
                                                         logging.INFO))
    p = argparse.ArgumentParser(prog="fx-endpoint", description="Serve SPARQL queries over HTTP at /sparql.")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=3000)
    p.add_argument("-l", "--load", help="RDF file (.nt, .nq, .ttl), or a folder of them, used as the base dataset")
    p.add_argument("--timeout", type=float, default=30.0, help="per-query time limit in seconds")
    p.add_argument("--max-body", type=int, default=1 << 20, help="largest accepted request body in bytes")
    p.add_argument("--no-local-files", action="store_true",
                   help="refuse SERVICE sources that read local files or run commands")
    args = p.parse_args(argv)
    try:
        config = EndpointConfig(args.host, args.port, args.load, args.max_body, args.timeout,
                                allow_local=not args.no_local_files)
        server = make_server(config)
    except (ValueError, OSError, FacadeError) as exc:
        print(f"fx-endpoint: {exc}", file=sys.stderr)
        return 2
    host, port = server.server_address[:2]
    log.info("listening on http://%s:%d/sparql", host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
