"""Turtle subset: prefixes, predicate-object and object lists, blank-node property lists.

Collections ``( ... )`` are not supported.
"""

from __future__ import annotations

from typing import Dict, List, Optional

from ..errors import RdfSyntaxError, SyntaxErrorWithPosition
from .graph import Graph
from .lexer import Token, split_pname, string_token_value, tokenize, unescape_uchars
from .terms import IRI, BNode, Literal, Triple, escape_string, member_index, term_sort_key
from .vocab import DEFAULT_PREFIXES, RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER, XSD_STRING

_NUMERIC = {"INTEGER": XSD_INTEGER, "DECIMAL": XSD_DECIMAL, "DOUBLE": XSD_DOUBLE}


class _TurtleParser:
    def __init__(self, text: str, base: Optional[str] = None):
        try:
            self.toks = tokenize(text)
        except SyntaxErrorWithPosition as exc:
            raise RdfSyntaxError(str(exc).split(": ", 1)[-1], exc.line, exc.col) from None
        self.i = 0
        self.prefixes: Dict[str, str] = {}
        self.base = base
        self.graph = Graph()
        self.bnodes: Dict[str, BNode] = {}

    # token helpers
    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        return RdfSyntaxError(msg, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            raise self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok)
        return tok

    def parse(self) -> Graph:
        while self.peek().kind != "EOF":
            tok = self.peek()
            if tok.kind == "LANGTAG" and tok.text in ("@prefix", "@base"):
                self.next()
                self.directive(tok.text[1:])
                self.expect(".")
            elif tok.kind == "NAME" and tok.text.upper() in ("PREFIX", "BASE"):
                self.next()
                self.directive(tok.text.lower())
            else:
                self.triples()
                self.expect(".")
        return self.graph

    def directive(self, kind: str) -> None:
        if kind == "prefix":
            tok = self.next()
            if tok.kind != "PNAME_NS":
                raise self.error("expected prefix name", tok)
            iri = self.next()
            if iri.kind != "IRIREF":
                raise self.error("expected IRI", iri)
            self.prefixes[tok.text[:-1]] = self.resolve(iri.text[1:-1])
        else:
            iri = self.next()
            if iri.kind != "IRIREF":
                raise self.error("expected IRI", iri)
            self.base = self.resolve(iri.text[1:-1])

    def resolve(self, ref: str) -> str:
        ref = unescape_uchars(ref)
        if self.base and ":" not in ref.split("/", 1)[0]:
            from urllib.parse import urljoin
            return urljoin(self.base, ref)
        return ref

    def triples(self) -> None:
        tok = self.peek()
        if tok.text == "[":
            subject = self.blank_property_list()
            if self.peek().text == ".":
                return
        else:
            subject = self.subject()
        self.predicate_object_list(subject)

    def subject(self):
        tok = self.next()
        if tok.kind in ("IRIREF", "PNAME_LN", "PNAME_NS"):
            return self.iri(tok)
        if tok.kind == "BLANK_NODE_LABEL":
            return self.bnode(tok.text[2:])
        if tok.text == "(":
            raise self.error("collections are not supported", tok)
        raise self.error(f"unexpected {tok.text or 'end of input'!r} in subject position", tok)

    def iri(self, tok: Token) -> IRI:
        try:
            if tok.kind == "IRIREF":
                return IRI(self.resolve(tok.text[1:-1]))
            prefix, local = split_pname(tok.text)
            if prefix not in self.prefixes:
                raise self.error(f"undeclared prefix {prefix!r}", tok)
            return IRI(self.prefixes[prefix] + local)
        except ValueError as exc:
            raise self.error(str(exc), tok) from None

    def bnode(self, label: str) -> BNode:
        node = self.bnodes.get(label)
        if node is None:
            node = self.bnodes[label] = BNode.fresh("t")
        return node

    def predicate_object_list(self, subject) -> None:
        while True:
            pred = self.verb()
            self.object_list(subject, pred)
            if self.peek().text != ";":
                return
            while self.peek().text == ";":
                self.next()
            if self.peek().text in (".", "]") or self.peek().kind == "EOF":
                return

    def verb(self) -> IRI:
        tok = self.next()
        if tok.kind == "NAME" and tok.text == "a":
            return IRI(RDF_TYPE)
        if tok.kind in ("IRIREF", "PNAME_LN", "PNAME_NS"):
            return self.iri(tok)
        raise self.error(f"expected predicate, found {tok.text or 'end of input'!r}", tok)

    def object_list(self, subject, pred) -> None:
        while True:
            obj = self.object()
            self.graph.add(Triple(subject, pred, obj))
            if self.peek().text != ",":
                return
            self.next()

    def blank_property_list(self) -> BNode:
        self.expect("[")
        node = BNode.fresh("t")
        if self.peek().text != "]":
            self.predicate_object_list(node)
        self.expect("]")
        return node

    def object(self):
        tok = self.peek()
        if tok.text == "[":
            return self.blank_property_list()
        if tok.text == "(":
            raise self.error("collections are not supported", tok)
        self.next()
        if tok.kind in ("IRIREF", "PNAME_LN", "PNAME_NS"):
            return self.iri(tok)
        if tok.kind == "BLANK_NODE_LABEL":
            return self.bnode(tok.text[2:])
        if tok.kind in ("STRING", "STRING_LONG"):
            try:
                lexical = string_token_value(tok)
            except ValueError as exc:
                raise self.error(str(exc), tok) from None
            nxt = self.peek()
            if nxt.kind == "LANGTAG":
                self.next()
                return Literal(lexical, lang=nxt.text[1:])
            if nxt.text == "^^":
                self.next()
                dt = self.next()
                if dt.kind not in ("IRIREF", "PNAME_LN", "PNAME_NS"):
                    raise self.error("expected datatype IRI", dt)
                return Literal(lexical, self.iri(dt).value)
            return Literal(lexical)
        if tok.text in ("+", "-") and self.peek().kind in _NUMERIC:
            num = self.next()
            return Literal(tok.text + num.text, _NUMERIC[num.kind])
        if tok.kind in _NUMERIC:
            return Literal(tok.text, _NUMERIC[tok.kind])
        if tok.kind == "NAME" and tok.text in ("true", "false"):
            return Literal(tok.text, XSD_BOOLEAN)
        raise self.error(f"unexpected {tok.text or 'end of input'!r} in object position", tok)


def parse_turtle(text: str, base: Optional[str] = None) -> Graph:
    return _TurtleParser(text, base).parse()


def _local_ok(local: str) -> bool:
    return bool(local) and all(c.isascii() and (c.isalnum() or c in "_-") for c in local) and local[0] != "-"


class _Abbreviator:
    def __init__(self, prefixes: Dict[str, str]):
        # longest namespace first so rdf: does not shadow a longer match
        self.items = sorted(prefixes.items(), key=lambda kv: -len(kv[1]))
        self.used: set = set()

    def iri(self, iri: IRI) -> str:
        for prefix, ns in self.items:
            if iri.value.startswith(ns) and _local_ok(iri.value[len(ns):]):
                self.used.add(prefix)
                return f"{prefix}:{iri.value[len(ns):]}"
        return iri.n3()

    def term(self, t) -> str:
        if isinstance(t, IRI):
            return self.iri(t)
        if isinstance(t, Literal) and t.lang is None and t.datatype != XSD_STRING:
            return '"' + escape_string(t.lexical) + '"^^' + self.iri(IRI(t.datatype))
        return t.n3()


def _predicate_key(p: IRI):
    idx = member_index(p)
    if p.value == RDF_TYPE:
        return (0, 0, "")
    if idx is not None:
        return (1, idx, "")
    return (2, 0, p.value)


def serialize_turtle(graph: Graph, prefixes: Optional[Dict[str, str]] = None) -> str:
    abbr = _Abbreviator({**DEFAULT_PREFIXES, **(prefixes or {})})
    by_subject: Dict = {}
    for t in graph:
        by_subject.setdefault(t.s, {}).setdefault(t.p, []).append(t.o)
    blocks: List[str] = []
    for s in sorted(by_subject, key=term_sort_key):
        preds = by_subject[s]
        lines = []
        for p in sorted(preds, key=_predicate_key):
            verb = "a" if p.value == RDF_TYPE else abbr.iri(p)
            objs = ", ".join(abbr.term(o) for o in sorted(preds[p], key=term_sort_key))
            lines.append(f"{verb} {objs}")
        blocks.append(abbr.term(s) + " " + " ;\n    ".join(lines) + " .\n")
    header = "".join(f"@prefix {p}: <{ns}> .\n" for p, ns in sorted(abbr.items) if p in abbr.used)
    if header and blocks:
        header += "\n"
    return header + "\n".join(blocks)
