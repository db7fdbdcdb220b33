"""RDF terms and the triple/quad tuples built from them."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

from .vocab import RDF, RDF_LANGSTRING, XSD_STRING

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_LANG = re.compile(r"^[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*$")
_MEMBER_PREFIX = RDF + "_"

_bnode_counter = itertools.count()


@dataclass(frozen=True, slots=True)
class IRI:
    value: str

    def __post_init__(self):
        if not _SCHEME.match(self.value):
            raise ValueError(f"not an absolute IRI: {self.value!r}")

    def __str__(self) -> str:
        return self.value

    def n3(self) -> str:
        return "<" + escape_iri(self.value) + ">"


@dataclass(frozen=True, slots=True)
class BNode:
    label: str

    @classmethod
    def fresh(cls, prefix: str = "b") -> "BNode":
        return cls(f"{prefix}{next(_bnode_counter)}")

    def __str__(self) -> str:
        return "_:" + self.label

    def n3(self) -> str:
        return "_:" + self.label


@dataclass(frozen=True, slots=True)
class Literal:
    """A literal. Simple literals carry ``xsd:string``; tagged ones ``rdf:langString``."""

    lexical: str
    datatype: str = XSD_STRING
    lang: Optional[str] = None

    def __post_init__(self):
        if self.lang is not None:
            if not _LANG.match(self.lang):
                raise ValueError(f"invalid language tag: {self.lang!r}")
            object.__setattr__(self, "lang", self.lang.lower())
            object.__setattr__(self, "datatype", RDF_LANGSTRING)
        elif self.datatype is None or self.datatype == RDF_LANGSTRING:
            raise ValueError("rdf:langString literal requires a language tag")

    @property
    def is_plain(self) -> bool:
        return self.lang is None and self.datatype == XSD_STRING

    def __str__(self) -> str:
        return self.lexical

    def n3(self) -> str:
        s = '"' + escape_string(self.lexical) + '"'
        if self.lang is not None:
            return s + "@" + self.lang
        if self.datatype != XSD_STRING:
            return s + "^^<" + escape_iri(self.datatype) + ">"
        return s


Term = Union[IRI, BNode, Literal]


class Triple(NamedTuple):
    s: Term
    p: IRI
    o: Term


class Quad(NamedTuple):
    s: Term
    p: IRI
    o: Term
    g: Optional[IRI]


def make_triple(s: Term, p: Term, o: Term) -> Triple:
    if isinstance(s, Literal):
        raise ValueError("literal in subject position")
    if not isinstance(p, IRI):
        raise ValueError("predicate must be an IRI")
    return Triple(s, p, o)


def member(n: int) -> IRI:
    """Container membership property ``rdf:_n``."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InvalidIndexError(n)
    return IRI(_MEMBER_PREFIX + str(n))


def member_index(p) -> Optional[int]:
    if not isinstance(p, IRI) or not p.value.startswith(_MEMBER_PREFIX):
        return None
    digits = p.value[len(_MEMBER_PREFIX):]
    # no leading zeros: rdf:_01 is not rdf:_1
    if not digits.isdigit() or not digits.isascii() or digits[0] == "0":
        return None
    return int(digits)


class InvalidIndexError(ValueError):
    def __init__(self, n):
        super().__init__(f"container membership index must be >= 1, got {n!r}")
        self.index = n


_STRING_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t", "\b": "\\b", "\f": "\\f"}


def escape_string(s: str) -> str:
    out = []
    for ch in s:
        esc = _STRING_ESCAPES.get(ch)
        if esc is not None:
            out.append(esc)
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


_IRI_FORBIDDEN = set('<>"{}|^`\\')


def escape_iri(s: str) -> str:
    if not any(ch in _IRI_FORBIDDEN or ord(ch) <= 0x20 for ch in s):
        return s
    out = []
    for ch in s:
        if ch in _IRI_FORBIDDEN or ord(ch) <= 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def term_sort_key(t) -> tuple:
    """Total order used for deterministic output: bnodes, IRIs, literals."""
    if isinstance(t, BNode):
        return (0, t.label, "", "")
    if isinstance(t, IRI):
        return (1, t.value, "", "")
    return (2, t.lexical, t.datatype, t.lang or "")
