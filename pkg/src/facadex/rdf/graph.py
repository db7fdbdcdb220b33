"""In-memory graph with subject/predicate/object indexes."""

from __future__ import annotations

from typing import Dict, Iterable, Iterator, Optional, Set

from .terms import IRI, Term, Triple, make_triple


class Graph:
    __slots__ = ("_triples", "_s", "_p", "_o")

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples: Set[Triple] = set()
        self._s: Dict[Term, Set[Triple]] = {}
        self._p: Dict[Term, Set[Triple]] = {}
        self._o: Dict[Term, Set[Triple]] = {}
        for t in triples:
            self.add(t)

    def add(self, t: Triple) -> None:
        if t in self._triples:
            return
        if not isinstance(t, Triple):
            t = make_triple(*t)
        self._triples.add(t)
        self._s.setdefault(t.s, set()).add(t)
        self._p.setdefault(t.p, set()).add(t)
        self._o.setdefault(t.o, set()).add(t)

    def update(self, triples: Iterable[Triple]) -> None:
        for t in triples:
            self.add(t)

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, t) -> bool:
        return t in self._triples

    def __eq__(self, other) -> bool:
        # exact equality, labels included; see isomorphic() for the bnode-aware check
        if isinstance(other, Graph):
            return self._triples == other._triples
        return NotImplemented

    def __repr__(self) -> str:
        return f"<Graph with {len(self)} triples>"

    def triples(self, s: Optional[Term] = None, p: Optional[Term] = None,
                o: Optional[Term] = None) -> Iterable[Triple]:
        """Triples matching the pattern; ``None`` is a wildcard."""
        candidates = None
        for term, index in ((s, self._s), (p, self._p), (o, self._o)):
            if term is None:
                continue
            bucket = index.get(term)
            if not bucket:
                return ()
            if candidates is None or len(bucket) < len(candidates):
                candidates = bucket
        if candidates is None:
            return self._triples
        if (s is not None) + (p is not None) + (o is not None) == 1:
            return candidates
        return [t for t in candidates
                if (s is None or t.s == s) and (p is None or t.p == p) and (o is None or t.o == o)]

    def predicates(self) -> Iterable[IRI]:
        return self._p.keys()

    def subjects_with(self, p: Term) -> Iterable[Term]:
        return {t.s for t in self._p.get(p, ())}


class Dataset:
    """A default graph plus named graphs keyed by IRI."""

    def __init__(self, default: Optional[Graph] = None, named: Optional[Dict[IRI, Graph]] = None):
        self.default = default if default is not None else Graph()
        self.named: Dict[IRI, Graph] = dict(named or {})

    def graph(self, name: Optional[IRI]) -> Graph:
        if name is None:
            return self.default
        return self.named.setdefault(name, Graph())

    def quads(self):
        for t in self.default:
            yield (*t, None)
        for name, g in self.named.items():
            for t in g:
                yield (*t, name)

    def union_graph(self) -> Graph:
        """Default and named graphs merged into one graph."""
        if not self.named:
            return self.default
        g = Graph(self.default)
        for named in self.named.values():
            g.update(named)
        return g

    def __len__(self) -> int:
        return len(self.default) + sum(len(g) for g in self.named.values())
