"""RDF value model, serializers and parsers."""

from __future__ import annotations

from typing import Union

from .graph import Dataset, Graph
from .isomorphism import find_mapping, isomorphic
from .ntriples import parse_nquads, parse_ntriples, serialize_nquads, serialize_ntriples
from .terms import IRI, BNode, InvalidIndexError, Literal, Quad, Term, Triple, make_triple, member, member_index
from .turtle import parse_turtle, serialize_turtle

FORMATS = ("NT", "TTL", "NQ")

__all__ = [
    "IRI", "BNode", "Literal", "Term", "Triple", "Quad", "Graph", "Dataset",
    "member", "member_index", "make_triple", "InvalidIndexError",
    "isomorphic", "find_mapping", "serialize_graph", "parse_rdf", "FORMATS",
]


def serialize_graph(data: Union[Graph, Dataset], fmt: str, prefixes=None) -> str:
    fmt = fmt.upper()
    if fmt == "NQ":
        return serialize_nquads(data)
    graph = data.union_graph() if isinstance(data, Dataset) else data
    if fmt == "NT":
        return serialize_ntriples(graph)
    if fmt == "TTL":
        return serialize_turtle(graph, prefixes)
    raise ValueError(f"unsupported RDF format: {fmt}")


def parse_rdf(text: str, fmt: str) -> Union[Graph, Dataset]:
    fmt = fmt.upper()
    if fmt == "NT":
        return parse_ntriples(text)
    if fmt == "NQ":
        return parse_nquads(text)
    if fmt == "TTL":
        return parse_turtle(text)
    raise ValueError(f"unsupported RDF format: {fmt}")


def format_for_path(path: str):
    lower = str(path).lower()
    for ext, fmt in ((".nt", "NT"), (".nq", "NQ"), (".ttl", "TTL"), (".turtle", "TTL")):
        if lower.endswith(ext):
            return fmt
    return None
