"""Line-based N-Triples / N-Quads reader and writer."""

from __future__ import annotations

import re
from typing import Iterable, Union

from ..errors import RdfSyntaxError
from .graph import Dataset, Graph
from .lexer import unescape_string, unescape_uchars
from .terms import IRI, BNode, Literal, Triple, term_sort_key

_IRI = r"<((?:[^<>\"{}|^`\\\x00-\x20]|\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8})*)>"
_BNODE = r"_:([\w](?:[\w.\-]*[\w\-])?)"
_LIT = r'"((?:[^"\\\n\r]|\\.)*)"(?:@([A-Za-z]+(?:-[A-Za-z0-9]+)*)|\^\^' + _IRI + ")?"

_WS = re.compile(r"[ \t]*")
_TERM = re.compile(rf"{_IRI}|{_BNODE}|{_LIT}")


def _term(line: str, pos: int, lineno: int, allow_literal: bool):
    pos = _WS.match(line, pos).end()
    m = _TERM.match(line, pos)
    if m is None:
        raise RdfSyntaxError("expected an RDF term", lineno, pos + 1)
    iri, bnode, lex, lang, dt = m.groups()
    try:
        if iri is not None:
            term = IRI(unescape_uchars(iri))
        elif bnode is not None:
            term = BNode(bnode)
        else:
            if not allow_literal:
                raise RdfSyntaxError("literal not allowed here", lineno, pos + 1)
            value = unescape_string(lex)
            if lang:
                term = Literal(value, lang=lang)
            elif dt is not None:
                term = Literal(value, unescape_uchars(dt))
            else:
                term = Literal(value)
    except ValueError as exc:
        raise RdfSyntaxError(str(exc), lineno, pos + 1) from exc
    return term, m.end()


def parse_nquads(text: str, quads: bool = True) -> Dataset:
    ds = Dataset()
    for lineno, line in enumerate(text.split("\n"), 1):
        line = line.rstrip("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        s, pos = _term(line, 0, lineno, False)
        p, pos = _term(line, pos, lineno, False)
        if not isinstance(p, IRI):
            raise RdfSyntaxError("predicate must be an IRI", lineno, pos)
        o, pos = _term(line, pos, lineno, True)
        g = None
        pos = _WS.match(line, pos).end()
        if quads and pos < len(line) and line[pos] != ".":
            g, pos = _term(line, pos, lineno, False)
            pos = _WS.match(line, pos).end()
        if pos >= len(line) or line[pos] != ".":
            raise RdfSyntaxError("expected '.'", lineno, pos + 1)
        rest = line[pos + 1:].strip()
        if rest and not rest.startswith("#"):
            raise RdfSyntaxError("unexpected content after '.'", lineno, pos + 2)
        ds.graph(g).add(Triple(s, p, o))
    return ds


def parse_ntriples(text: str) -> Graph:
    return parse_nquads(text, quads=False).default


def _sorted(triples: Iterable[Triple]):
    return sorted(triples, key=lambda t: (term_sort_key(t.s), term_sort_key(t.p), term_sort_key(t.o)))


def serialize_ntriples(graph: Graph) -> str:
    return "".join(f"{t.s.n3()} {t.p.n3()} {t.o.n3()} .\n" for t in _sorted(graph))


def serialize_nquads(data: Union[Graph, Dataset]) -> str:
    if isinstance(data, Graph):
        return serialize_ntriples(data)
    out = [serialize_ntriples(data.default)]
    for name in sorted(data.named, key=lambda i: i.value):
        out.extend(f"{t.s.n3()} {t.p.n3()} {t.o.n3()} {name.n3()} .\n" for t in _sorted(data.named[name]))
    return "".join(out)
