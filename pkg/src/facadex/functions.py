"""Extension functions in the ``fx:`` namespace and the ``fx:anySlot`` magic property."""

from __future__ import annotations

from types import MappingProxyType
from typing import Iterator, Mapping, Optional

from .rdf.graph import Graph
from .rdf.terms import IRI, Literal, Triple, member, member_index
from .rdf.vocab import FX, FX_ANYSLOT, XSD_STRING
from .sparql.expressions import ExprError, boolean


def fx_entity(*args) -> IRI:
    """Concatenate IRI strings and literal lexical forms into one IRI."""
    if not args:
        raise ExprError("fx:entity needs at least one argument")
    parts = []
    for a in args:
        if isinstance(a, IRI):
            parts.append(a.value)
        elif isinstance(a, Literal):
            parts.append(a.lexical)
        else:
            raise ExprError("fx:entity arguments must be IRIs or literals")
    try:
        return IRI("".join(parts))
    except ValueError:
        raise ExprError(f"fx:entity produced a relative IRI: {''.join(parts)!r}") from None


def fx_literal(lexical, spec) -> Literal:
    if not isinstance(lexical, Literal):
        raise ExprError("fx:literal needs a literal lexical form")
    if isinstance(spec, IRI):
        return Literal(lexical.lexical, spec.value)
    if isinstance(spec, Literal) and spec.datatype == XSD_STRING:
        try:
            return Literal(lexical.lexical, lang=spec.lexical)
        except ValueError as exc:
            raise ExprError(str(exc)) from None
    raise ExprError("fx:literal needs a datatype IRI or a language tag")


def _index(p) -> int:
    n = member_index(p)
    if n is None:
        raise ExprError(f"not a container membership property: {p}")
    return n


def fx_next(p) -> IRI:
    return member(_index(p) + 1)


def fx_prev(p) -> IRI:
    n = _index(p)
    if n < 2:
        raise ExprError("rdf:_1 has no predecessor")
    return member(n - 1)


def fx_before(a, b) -> Literal:
    return boolean(_index(a) < _index(b))


def fx_after(a, b) -> Literal:
    return boolean(_index(a) > _index(b))


FUNCTIONS: Mapping[str, object] = MappingProxyType({
    FX + "entity": fx_entity,
    FX + "literal": fx_literal,
    FX + "next": fx_next,
    FX + "prev": fx_prev,
    FX + "before": fx_before,
    FX + "after": fx_after,
})

ANY_SLOT = IRI(FX_ANYSLOT)


def any_slot_match(graph: Graph, s: Optional[object] = None, o: Optional[object] = None) -> Iterator[Triple]:
    """Triples ``(s, rdf:_n, o)`` of ``graph`` for every n >= 1; None leaves a position open."""
    for t in graph.triples(s, None, o):
        if member_index(t.p) is not None:
            yield t


__all__ = ["FUNCTIONS", "ANY_SLOT", "any_slot_match", "fx_entity", "fx_literal", "fx_next", "fx_prev",
           "fx_before", "fx_after"]
