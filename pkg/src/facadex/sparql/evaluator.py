"""Query evaluation over an active graph, with SERVICE interception for façade sources."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Union

from ..errors import EvaluationError, FacadeError, QueryTimeoutError, ServiceError, UnresolvedServiceError, \
    UnsupportedEndpointError
from ..rdf.graph import Dataset, Graph
from ..rdf.terms import IRI, BNode, Literal, Triple, member_index
from ..rdf.vocab import FX_ANYSLOT, SCHEME
from .algebra import BGP, Bind, Group, Optional_, Query, Service, TriplePattern, Union_, Values, Var, pattern_vars
from .expressions import Context, ExprError, evaluate, filter_passes, order_key
from .parser import parse_query

log = logging.getLogger(__name__)

Solution = Dict[str, object]
ANY_SLOT = IRI(FX_ANYSLOT)


@dataclass
class QueryResult:
    form: str
    variables: List[str] = field(default_factory=list)
    rows: List[Solution] = field(default_factory=list)
    boolean: Optional[bool] = None
    graph: Optional[Graph] = None


# -- solution helpers ----------------------------------------------------------

def compatible(a: Solution, b: Solution) -> bool:
    if len(b) < len(a):
        a, b = b, a
    for k, v in a.items():
        w = b.get(k)
        if w is not None and w != v:
            return False
    return True


def join(left: List[Solution], right: List[Solution]) -> List[Solution]:
    if not left or not right:
        return []
    if right == [{}]:
        return left
    if left == [{}]:
        return right
    shared = set.intersection(*(set(r) for r in left)) & set.intersection(*(set(r) for r in right))
    keys = sorted(shared)
    index: Dict[tuple, List[Solution]] = {}
    for r in right:
        index.setdefault(tuple(r[k] for k in keys), []).append(r)
    out = []
    for l in left:
        for r in index.get(tuple(l[k] for k in keys), ()):
            if compatible(l, r):
                out.append({**l, **r})
    return out


def _contains_service(node) -> bool:
    if isinstance(node, Service):
        return True
    if isinstance(node, Group):
        return any(_contains_service(op) for op in node.operands)
    if isinstance(node, Optional_):
        return _contains_service(node.pattern)
    if isinstance(node, Union_):
        return any(_contains_service(b) for b in node.branches)
    return False


# -- BGP matching ------------------------------------------------------------------

def _resolve(term, sol: Solution):
    if isinstance(term, Var):
        return sol.get(term.name)
    return term


def _candidates(graph: Graph, s, p, o) -> Iterable[Triple]:
    if p == ANY_SLOT:
        return (t for t in graph.triples(s, None, o) if member_index(t.p) is not None)
    return graph.triples(s, p, o)


def _bind(term, value, sol: Solution) -> bool:
    if isinstance(term, Var):
        current = sol.get(term.name)
        if current is None:
            sol[term.name] = value
            return True
        return current == value
    return True


def match_bgp(graph: Graph, patterns: Sequence[TriplePattern], sol: Solution, check: Callable[[], None]) -> List[Solution]:
    if not patterns:
        return [dict(sol)]
    # most-constrained pattern first
    best, best_score = 0, -1
    for i, tp in enumerate(patterns):
        score = sum(x is not None for x in (_resolve(tp.s, sol), _resolve(tp.p, sol), _resolve(tp.o, sol)))
        if score > best_score:
            best, best_score = i, score
    tp = patterns[best]
    rest = list(patterns[:best]) + list(patterns[best + 1:])
    s, p, o = _resolve(tp.s, sol), _resolve(tp.p, sol), _resolve(tp.o, sol)
    if isinstance(s, Literal) or (p is not None and not isinstance(p, IRI)):
        return []
    out: List[Solution] = []
    check()
    for t in list(_candidates(graph, s, p, o)):
        ext = dict(sol)
        if not (_bind(tp.s, t.s, ext) and (tp.p == ANY_SLOT or _bind(tp.p, t.p, ext)) and _bind(tp.o, t.o, ext)):
            continue
        out.extend(match_bgp(graph, rest, ext, check))
    return out


# -- triple filter -------------------------------------------------------------------

def build_triple_filter(patterns: Sequence[TriplePattern]) -> Callable[[Triple], bool]:
    """Keep a triple iff it unifies with at least one pattern."""
    compiled = []
    for tp in patterns:
        s = None if isinstance(tp.s, Var) else tp.s
        p = None if isinstance(tp.p, Var) else tp.p
        o = None if isinstance(tp.o, Var) else tp.o
        if s is None and p is None and o is None:
            return lambda t: True
        compiled.append((s, p, o))

    def keep(t: Triple) -> bool:
        for s, p, o in compiled:
            if s is not None and s != t.s:
                continue
            if o is not None and o != t.o:
                continue
            if p is not None and p != t.p and not (p == ANY_SLOT and member_index(t.p) is not None):
                continue
            return True
        return False

    return keep


# -- the engine ---------------------------------------------------------------------------

class Engine:
    """Evaluates queries over an optional base dataset.

    ``allow_local`` governs file and command sources inside SERVICE clauses;
    ``base_dir`` anchors relative locations; ``timeout`` (seconds) bounds each query.
    """

    def __init__(self, dataset: Union[Dataset, Graph, None] = None, *, functions: Optional[dict] = None,
                 allow_local: bool = True, base_dir: Optional[Union[str, Path]] = None,
                 timeout: Optional[float] = None):
        from ..functions import FUNCTIONS

        if isinstance(dataset, Dataset):
            dataset = dataset.union_graph()
        self.graph = dataset if dataset is not None else Graph()
        self.functions = dict(FUNCTIONS if functions is None else functions)
        self.allow_local = allow_local
        self.base_dir = Path(base_dir) if base_dir is not None else None
        self.timeout = timeout

    def query(self, query: Union[str, Query]) -> QueryResult:
        q = parse_query(query) if isinstance(query, str) else query
        return _Run(self, q).execute()


class _Run:
    def __init__(self, engine: Engine, query: Query):
        self.engine = engine
        self.query = query
        self.ctx = Context(engine.functions)
        self.deadline = time.monotonic() + engine.timeout if engine.timeout else None

    def check(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise QueryTimeoutError(f"query exceeded {self.engine.timeout} s")

    # -- forms ----------------------------------------------------------------
    def execute(self) -> QueryResult:
        q = self.query
        sols = self.eval_group(q.where, self.engine.graph, [{}], frozenset())
        if q.form == "ASK":
            return QueryResult("ASK", boolean=bool(sols))
        if q.order_by:
            sols = self.order(sols)
        if q.form == "CONSTRUCT":
            sols = sols[q.offset:]
            if q.limit is not None:
                sols = sols[:q.limit]
            return QueryResult("CONSTRUCT", graph=self.construct(sols))
        variables, rows = self.project(sols)
        if q.distinct:
            seen, unique = set(), []
            for r in rows:
                key = tuple(r.get(v) for v in variables)
                if key not in seen:
                    seen.add(key)
                    unique.append(r)
            rows = unique
        rows = rows[q.offset:]
        if q.limit is not None:
            rows = rows[:q.limit]
        return QueryResult("SELECT", variables=variables, rows=rows)

    def order(self, sols: List[Solution]) -> List[Solution]:
        def value(expr, sol):
            try:
                return evaluate(expr, sol, self.ctx)
            except ExprError:
                return None

        for key in reversed(self.query.order_by):
            sols = sorted(sols, key=lambda s: order_key(value(key.expr, s)), reverse=key.descending)
        return sols

    def project(self, sols: List[Solution]):
        q = self.query
        if q.projection is None:
            variables = [v.name for v in pattern_vars(q.where) if not v.hidden]
            return variables, [{k: v for k, v in s.items() if k in variables} for s in sols]
        variables = [v.name for v, _ in q.projection]
        rows = []
        for s in sols:
            row = dict(s)
            for var, expr in q.projection:
                if expr is not None:
                    try:
                        row[var.name] = evaluate(expr, row, self.ctx)
                    except ExprError:
                        row.pop(var.name, None)
            rows.append({v: row[v] for v in variables if row.get(v) is not None})
        return variables, rows

    def construct(self, sols: List[Solution]) -> Graph:
        out = Graph()
        for sol in sols:
            fresh: Dict[str, BNode] = {}

            def inst(term):
                if isinstance(term, Var):
                    if term.hidden:
                        if term.name not in fresh:
                            fresh[term.name] = BNode.fresh("c")
                        return fresh[term.name]
                    return sol.get(term.name)
                return term

            for tp in self.query.template:
                s, p, o = inst(tp.s), inst(tp.p), inst(tp.o)
                if s is None or p is None or o is None:
                    continue
                if isinstance(s, Literal) or not isinstance(p, IRI):
                    continue
                out.add(Triple(s, p, o))
        return out

    # -- patterns ---------------------------------------------------------------------
    def eval_node(self, node, graph: Graph, sols: List[Solution], scope: frozenset) -> List[Solution]:
        """Join ``sols`` with the solutions of ``node``."""
        self.check()
        if isinstance(node, BGP):
            out: List[Solution] = []
            for sol in sols:
                out.extend(match_bgp(graph, node.triples, sol, self.check))
            return out
        if isinstance(node, Group):
            if _contains_service(node):
                return self.eval_group(node, graph, sols, scope)
            return join(sols, self.eval_group(node, graph, [{}], frozenset()))
        if isinstance(node, Union_):
            if _contains_service(node):
                return [s for b in node.branches for s in self.eval_group(b, graph, sols, scope)]
            return join(sols, [s for b in node.branches for s in self.eval_group(b, graph, [{}], frozenset())])
        if isinstance(node, Optional_):
            return self.left_join(node.pattern, graph, sols, scope)
        if isinstance(node, Bind):
            return [self.extend(sol, node) for sol in sols]
        if isinstance(node, Values):
            table = [{v.name: val for v, val in zip(node.vars, row) if val is not None} for row in node.rows]
            return join(sols, table)
        if isinstance(node, Service):
            return self.eval_service(node, graph, sols)
        raise EvaluationError(f"unsupported pattern {type(node).__name__}")

    def extend(self, sol: Solution, bind: Bind) -> Solution:
        if sol.get(bind.var.name) is not None:
            raise EvaluationError(f"BIND: variable ?{bind.var.name} is already bound")
        try:
            value = evaluate(bind.expr, sol, self.ctx)
        except ExprError as exc:
            log.debug("BIND ?%s left unbound: %s", bind.var.name, exc)
            return sol
        return {**sol, bind.var.name: value}

    def left_join(self, pattern: Group, graph: Graph, sols: List[Solution], scope: frozenset) -> List[Solution]:
        body = Group(pattern.operands, [])
        out: List[Solution] = []
        if _contains_service(pattern):
            for sol in sols:
                matches = [m for m in self.eval_group(body, graph, [sol], scope)
                           if all(filter_passes(f, m, self.ctx) for f in pattern.filters)]
                out.extend(matches or [sol])
            return out
        right = self.eval_group(body, graph, [{}], frozenset())
        for sol in sols:
            matches = [m for m in join([sol], right) if all(filter_passes(f, m, self.ctx) for f in pattern.filters)]
            out.extend(matches or [sol])
        return out

    def eval_group(self, group: Group, graph: Graph, sols: List[Solution], scope: frozenset) -> List[Solution]:
        scope = set(scope) | {k for s in sols for k in s}
        deferred: List[Service] = []
        for op in group.operands:
            if isinstance(op, Service) and not self.ready(op, scope):
                deferred.append(op)
                continue
            sols = self.eval_node(op, graph, sols, frozenset(scope))
            scope |= {v.name for v in pattern_vars(op)}
            for svc in [d for d in deferred if self.ready(d, scope)]:
                deferred.remove(svc)
                sols = self.eval_node(svc, graph, sols, frozenset(scope))
                scope |= {v.name for v in pattern_vars(svc)}
        if deferred:
            names = sorted(self.config_vars(deferred[0]) - scope)
            raise UnresolvedServiceError(
                f"SERVICE configuration variable(s) never bound: {', '.join('?' + n for n in names)}")
        for f in group.filters:
            sols = [s for s in sols if filter_passes(f, s, self.ctx)]
        return sols

    # -- SERVICE ----------------------------------------------------------------------
    @staticmethod
    def config_vars(svc: Service) -> Set[str]:
        from ..config import extract_inline_properties

        names = set(extract_inline_properties(svc.pattern).variable_bound.values())
        if isinstance(svc.target, Var):
            names.add(svc.target.name)
        return names

    def ready(self, svc: Service, scope: Set[str]) -> bool:
        return self.config_vars(svc) <= scope

    def eval_service(self, svc: Service, graph: Graph, sols: List[Solution]) -> List[Solution]:
        from ..config import extract_inline_properties

        inline = extract_inline_properties(svc.pattern)
        residual = inline.residual if isinstance(inline.residual, Group) else Group([inline.residual])
        cache: Dict[tuple, List[Solution]] = {}
        out: List[Solution] = []
        for sol in sols:
            target = _resolve(svc.target, sol)
            bound = {}
            for option, var in inline.variable_bound.items():
                value = sol.get(var)
                if value is not None:
                    bound[option] = value.value if isinstance(value, IRI) else str(value)
            if target is None:
                if svc.silent:
                    continue
                raise UnresolvedServiceError(f"SERVICE target ?{svc.target.name} is unbound in a solution")
            if not isinstance(target, IRI):
                if svc.silent:
                    continue
                raise UnsupportedEndpointError(f"SERVICE target must be an IRI, got {target}")
            key = (target.value, tuple(sorted(bound.items())))
            if key not in cache:
                try:
                    cache[key] = self.run_service(target.value, dict(inline.fixed.items()) | bound, residual)
                except QueryTimeoutError:
                    raise
                except FacadeError as exc:
                    if svc.silent:
                        log.info("SERVICE SILENT <%s> failed: %s", target.value, exc)
                        cache[key] = []
                    elif isinstance(exc, (ServiceError, UnsupportedEndpointError)):
                        raise
                    else:
                        raise ServiceError(target.value, exc) from exc
                except (OSError, UnicodeDecodeError, ValueError) as exc:
                    if not svc.silent:
                        raise ServiceError(target.value, exc) from exc
                    cache[key] = []
            out.extend({**sol, **r} for r in cache[key] if compatible(sol, r))
        return out

    def run_service(self, iri: str, inline_options: dict, residual: Group) -> List[Solution]:
        from ..config import merge_options, parse_service_iri
        from ..resolver import resolve
        from ..triplifiers import slice_graphs, triplify
        from .algebra import triple_patterns

        if not iri.startswith(SCHEME):
            raise UnsupportedEndpointError(f"only {SCHEME} services are supported, not <{iri}>")
        iri_options, spec = parse_service_iri(iri)
        if spec is not None:
            iri_options = iri_options.with_options({spec.kind: spec.value})
        options = merge_options(iri_options, inline_options)
        options.validate()
        source = resolve(options.source(), options, allow_local=self.engine.allow_local,
                         base_dir=self.engine.base_dir)
        facade_options = options.without("location", "content", "command")
        triple_filter = None
        if options.get_option("strategy") == "1":
            triple_filter = build_triple_filter(triple_patterns(residual))
        if options.flag("slice"):
            out: List[Solution] = []
            for unit in slice_graphs(source, facade_options, triple_filter):
                self.check()
                out.extend(self.eval_group(residual, unit, [{}], frozenset()))
            return out
        facade = triplify(source, facade_options, triple_filter)
        self.check()
        return self.eval_group(residual, facade, [{}], frozenset())


def evaluate_query(query: Union[str, Query], dataset=None, **kwargs) -> QueryResult:
    return Engine(dataset, **kwargs).query(query)


__all__ = ["Engine", "QueryResult", "evaluate_query", "build_triple_filter", "match_bgp", "join", "compatible"]
