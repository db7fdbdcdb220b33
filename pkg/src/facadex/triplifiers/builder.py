"""Façade-X emission: containers, slots and values.

Containers are addressed by their slot path from the root, e.g. ``(1, "title")``.
Node identity derives from ``(source identity, path)`` so the same source
always yields the same blank-node labels (or minted IRIs), whether it is
triplified whole, filtered, or one slice at a time.
"""

from __future__ import annotations

import hashlib
from typing import Callable, Optional, Tuple, Union

from ..config import FacadeOptions
from ..rdf.graph import Graph
from ..rdf.terms import IRI, BNode, Literal, Triple, member
from ..rdf.vocab import FX_ROOT, RDF_TYPE, XYZ

Path = Tuple[Union[int, str], ...]
SlotKey = Union[int, str, IRI]  # an IRI key is used verbatim as the predicate

_SAFE = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_-")
_TYPE = IRI(RDF_TYPE)
_ROOT = IRI(FX_ROOT)


def encode_key(key: str) -> str:
    """Percent-encode everything outside ``[A-Za-z0-9_-]`` (UTF-8 bytes)."""
    if all(c in _SAFE for c in key):
        return key
    return "".join(c if c in _SAFE else "".join(f"%{b:02X}" for b in c.encode("utf-8")) for c in key)


def _path_segment(key: SlotKey) -> str:
    if isinstance(key, int):
        return f"_{key}"
    enc = encode_key(key.value if isinstance(key, IRI) else key)
    # keep string keys distinct from index segments
    return "%5F" + enc[1:] if enc.startswith("_") else enc


class FacadeBuilder:
    def __init__(self, options: Optional[FacadeOptions] = None, source_id: str = "urn:facadex:anonymous",
                 triple_filter: Optional[Callable[[Triple], bool]] = None):
        self.options = options if options is not None else FacadeOptions()
        self.source_id = source_id
        self.namespace = self.options.get_option("namespace") or XYZ
        self.blank_nodes = self.options.flag("blank-nodes")
        self.trim = self.options.flag("trim-strings")
        self.null_string = self.options.get_option("null-string")
        self.triple_filter = triple_filter
        self.graph = Graph()
        self._nodes: dict = {}
        self._next_index: dict = {}
        self._slots: set = set()
        self._bnode_salt = hashlib.sha1(source_id.encode("utf-8")).hexdigest()[:10]

    # -- nodes and predicates -------------------------------------------------
    def node(self, path: Path):
        term = self._nodes.get(path)
        if term is None:
            if self.blank_nodes:
                digest = hashlib.sha1(("/".join(_path_segment(k) for k in path)).encode("utf-8")).hexdigest()[:12]
                term = BNode(f"fx{self._bnode_salt}{digest}")
            else:
                term = IRI(self.source_id + "#/" + "/".join(_path_segment(k) for k in path))
            self._nodes[path] = term
        return term

    def predicate(self, key: SlotKey) -> IRI:
        if isinstance(key, int):
            return member(key)
        if isinstance(key, IRI):
            return key
        return IRI(self.namespace + encode_key(key))

    def type_iri(self, name: str) -> IRI:
        return IRI(self.namespace + encode_key(name))

    # -- emission --------------------------------------------------------------
    def emit(self, s, p, o) -> None:
        t = Triple(s, p, o)
        if self.triple_filter is None or self.triple_filter(t):
            self.graph.add(t)

    def root(self) -> Path:
        self.emit(self.node(()), _TYPE, _ROOT)
        return ()

    def add_type(self, path: Path, type_iri: IRI) -> None:
        self.emit(self.node(path), _TYPE, type_iri)

    def _claim(self, path: Path) -> None:
        if path in self._slots:
            raise ValueError(f"slot {path[-1]!r} used twice in one container")
        self._slots.add(path)

    def container(self, parent: Path, key: SlotKey) -> Path:
        path = parent + (key,)
        self._claim(path)
        self.emit(self.node(parent), self.predicate(key), self.node(path))
        return path

    def value(self, parent: Path, key: SlotKey, value: Literal) -> None:
        self._claim(parent + (key,))
        if value.is_plain:
            lexical = value.lexical.strip() if self.trim else value.lexical
            if self.null_string is not None and lexical == self.null_string:
                return
            if lexical != value.lexical:
                value = Literal(lexical)
        self.emit(self.node(parent), self.predicate(key), value)

    def string(self, parent: Path, key: SlotKey, text: str) -> None:
        self.value(parent, key, Literal(text))

    def next_index(self, parent: Path) -> int:
        n = self._next_index.get(parent, 0) + 1
        self._next_index[parent] = n
        return n
