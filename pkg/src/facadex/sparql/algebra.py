"""Query algebra for the supported SPARQL subset.

A group graph pattern becomes a :class:`Group`: an ordered list of operands
joined left to right (BGPs and SERVICE/VALUES/sub-groups join, ``Optional``
left-joins, ``Bind`` extends) followed by the group's filters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple, Union

from ..rdf.terms import IRI, BNode, Literal


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    @property
    def hidden(self) -> bool:
        # blank nodes in patterns become variables that SELECT * does not expose
        return self.name.startswith("_:")

    def __str__(self) -> str:
        return "?" + self.name


PatternTerm = Union[IRI, BNode, Literal, Var]


class TriplePattern(NamedTuple):
    s: PatternTerm
    p: PatternTerm
    o: PatternTerm

    def variables(self):
        return [x for x in self if isinstance(x, Var)]


@dataclass(frozen=True)
class Call:
    """Operator, builtin or extension-function call. ``name`` is an operator
    symbol, an upper-case builtin keyword, or a function IRI string."""

    name: str
    args: Tuple = ()


Expr = Union[Var, IRI, Literal, Call]


@dataclass
class BGP:
    triples: List[TriplePattern] = field(default_factory=list)


@dataclass
class Group:
    operands: List = field(default_factory=list)
    filters: List = field(default_factory=list)


@dataclass
class Optional_:
    pattern: Group


@dataclass
class Union_:
    branches: List[Group]


@dataclass
class Bind:
    expr: Expr
    var: Var


@dataclass
class Values:
    vars: List[Var]
    rows: List[List[Optional[object]]]


@dataclass
class Service:
    target: Union[IRI, Var]
    pattern: Group
    silent: bool = False


@dataclass
class OrderKey:
    expr: Expr
    descending: bool = False


@dataclass
class Query:
    form: str  # SELECT | CONSTRUCT | ASK
    where: Group
    projection: Optional[List[Tuple[Var, Optional[Expr]]]] = None  # None means SELECT *
    distinct: bool = False
    template: List[TriplePattern] = field(default_factory=list)
    order_by: List[OrderKey] = field(default_factory=list)
    limit: Optional[int] = None
    offset: int = 0
    prefixes: dict = field(default_factory=dict)

    def services(self) -> List[Service]:
        found: List[Service] = []
        _collect_services(self.where, found)
        return found


def _collect_services(node, out: List[Service]) -> None:
    if isinstance(node, Service):
        out.append(node)
        _collect_services(node.pattern, out)
    elif isinstance(node, Group):
        for op in node.operands:
            _collect_services(op, out)
    elif isinstance(node, Optional_):
        _collect_services(node.pattern, out)
    elif isinstance(node, Union_):
        for b in node.branches:
            _collect_services(b, out)


def triple_patterns(node) -> List[TriplePattern]:
    """Every triple pattern in ``node``, excluding those inside nested SERVICE clauses."""
    out: List[TriplePattern] = []

    def walk(n):
        if isinstance(n, BGP):
            out.extend(n.triples)
        elif isinstance(n, Group):
            for op in n.operands:
                walk(op)
        elif isinstance(n, Optional_):
            walk(n.pattern)
        elif isinstance(n, Union_):
            for b in n.branches:
                walk(b)

    walk(node)
    return out


def pattern_vars(node) -> List[Var]:
    """Variables a pattern may bind, in order of first appearance."""
    seen: dict = {}

    def add(v):
        if isinstance(v, Var):
            seen.setdefault(v, None)

    def walk(n):
        if isinstance(n, BGP):
            for tp in n.triples:
                for x in tp:
                    add(x)
        elif isinstance(n, Group):
            for op in n.operands:
                walk(op)
        elif isinstance(n, Optional_):
            walk(n.pattern)
        elif isinstance(n, Union_):
            for b in n.branches:
                walk(b)
        elif isinstance(n, Bind):
            add(n.var)
        elif isinstance(n, Values):
            for v in n.vars:
                add(v)
        elif isinstance(n, Service):
            walk(n.pattern)

    walk(node)
    return list(seen)
