"""Blank-node aware graph equality.

Blank nodes are first partitioned by an iterated signature (colour refinement
over their ground neighbourhood); a backtracking search then tries bijections
only within equally coloured classes and verifies every mapped triple.
"""

from __future__ import annotations

from collections import Counter
from typing import Dict, List, Optional

from .graph import Graph
from .terms import BNode


def _ground_key(term, colours: Dict[BNode, int]):
    if isinstance(term, BNode):
        return ("b", colours[term])
    return ("g", term)


def _refine(graph: Graph, nodes: List[BNode]) -> Dict[BNode, int]:
    colours = {b: 0 for b in nodes}
    incident: Dict[BNode, list] = {b: [] for b in nodes}
    for t in graph:
        if isinstance(t.s, BNode):
            incident[t.s].append(("out", t))
        if isinstance(t.o, BNode):
            incident[t.o].append(("in", t))
    n_classes = 1
    for _ in range(len(nodes) + 1):
        sigs = {}
        for b in nodes:
            parts = []
            for direction, t in incident[b]:
                other = t.o if direction == "out" else t.s
                self_loop = other == b
                parts.append((direction, t.p, "self" if self_loop else _ground_key(other, colours)))
            sigs[b] = (colours[b], tuple(sorted(parts, key=repr)))
        ids: Dict = {}
        for sig in sorted(set(sigs.values()), key=repr):
            ids[sig] = len(ids)
        new = {b: ids[sigs[b]] for b in nodes}
        if len(ids) == n_classes:
            return new
        colours, n_classes = new, len(ids)
    return colours


def _signature(graph: Graph, colours: Dict[BNode, int]):
    ground = set()
    for t in graph:
        ground.add((_ground_key(t.s, colours), t.p, _ground_key(t.o, colours)))
    return Counter(colours.values()), frozenset(ground)


def find_mapping(g1: Graph, g2: Graph) -> Optional[Dict[BNode, BNode]]:
    """Return a blank-node bijection mapping g1 onto g2, or None."""
    if len(g1) != len(g2):
        return None
    b1 = sorted({x for t in g1 for x in (t.s, t.o) if isinstance(x, BNode)}, key=lambda b: b.label)
    b2 = sorted({x for t in g2 for x in (t.s, t.o) if isinstance(x, BNode)}, key=lambda b: b.label)
    if len(b1) != len(b2):
        return None
    if not b1:
        return {} if set(g1) == set(g2) else None
    c1, c2 = _refine(g1, b1), _refine(g2, b2)
    # ground triples are compared exactly here; the search below only checks bnode triples
    if _signature(g1, c1) != _signature(g2, c2):
        return None
    by_colour: Dict[int, List[BNode]] = {}
    for b in b2:
        by_colour.setdefault(c2[b], []).append(b)
    candidates = {b: by_colour.get(c1[b], []) for b in b1}
    touching: Dict[BNode, list] = {b: [] for b in b1}
    for t in g1:
        for x in (t.s, t.o):
            if isinstance(x, BNode):
                touching[x].append(t)
    order = sorted(b1, key=lambda b: len(candidates[b]))
    return _search(order, candidates, touching, set(g2))


def isomorphic(g1: Graph, g2: Graph) -> bool:
    return find_mapping(g1, g2) is not None


def _map(term, mapping):
    if isinstance(term, BNode):
        return mapping.get(term)
    return term


def _consistent(node, mapping, touching, target) -> bool:
    for t in touching[node]:
        s, o = _map(t.s, mapping), _map(t.o, mapping)
        if s is None or o is None:
            continue
        if (s, t.p, o) not in target:
            return False
    return True


def _search(order, candidates, touching, target) -> Optional[Dict[BNode, BNode]]:
    # iterative backtracking; graphs may hold more bnodes than the recursion limit
    mapping: Dict[BNode, BNode] = {}
    used = set()
    pointers = [0] * len(order)
    k = 0
    while 0 <= k < len(order):
        node = order[k]
        if node in mapping:
            used.discard(mapping.pop(node))
        cands = candidates[node]
        i = pointers[k]
        found = False
        while i < len(cands):
            cand = cands[i]
            i += 1
            if cand in used:
                continue
            mapping[node] = cand
            used.add(cand)
            if _consistent(node, mapping, touching, target):
                found = True
                break
            del mapping[node]
            used.discard(cand)
        pointers[k] = i
        if found:
            k += 1
            if k < len(order):
                pointers[k] = 0
        else:
            pointers[k] = 0
            k -= 1
    return mapping if k == len(order) else None
