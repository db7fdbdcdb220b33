"""Recursive-descent parser for the supported SPARQL subset."""

from __future__ import annotations

import itertools
from typing import Dict, Optional
from urllib.parse import urljoin

from ..errors import QueryParseError, SyntaxErrorWithPosition
from ..rdf.lexer import Token, split_pname, string_token_value, tokenize, unescape_uchars
from ..rdf.terms import IRI, Literal
from ..rdf.vocab import RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER
from .algebra import (BGP, Bind, Call, Group, Optional_, OrderKey, Query, Service, TriplePattern, Union_,
                      Values, Var)

_NUMERIC = {"INTEGER": XSD_INTEGER, "DECIMAL": XSD_DECIMAL, "DOUBLE": XSD_DOUBLE}

# builtin name -> (min args, max args); None means variadic
BUILTINS: Dict[str, tuple] = {
    "STR": (1, 1), "LANG": (1, 1), "LANGMATCHES": (2, 2), "DATATYPE": (1, 1), "BOUND": (1, 1),
    "IRI": (1, 1), "URI": (1, 1), "BNODE": (0, 1), "RAND": (0, 0), "ABS": (1, 1), "CEIL": (1, 1),
    "FLOOR": (1, 1), "ROUND": (1, 1), "CONCAT": (0, None), "STRLEN": (1, 1), "UCASE": (1, 1),
    "LCASE": (1, 1), "ENCODE_FOR_URI": (1, 1), "CONTAINS": (2, 2), "STRSTARTS": (2, 2),
    "STRENDS": (2, 2), "STRBEFORE": (2, 2), "STRAFTER": (2, 2), "MD5": (1, 1), "SHA1": (1, 1),
    "SHA256": (1, 1), "SHA512": (1, 1), "COALESCE": (0, None), "IF": (3, 3), "STRLANG": (2, 2),
    "STRDT": (2, 2), "SAMETERM": (2, 2), "ISIRI": (1, 1), "ISURI": (1, 1), "ISBLANK": (1, 1),
    "ISLITERAL": (1, 1), "ISNUMERIC": (1, 1), "REGEX": (2, 3), "SUBSTR": (2, 3), "REPLACE": (3, 4),
    "UUID": (0, 0), "STRUUID": (0, 0),
}
_UNSUPPORTED = {
    "MINUS": "MINUS", "GRAPH": "GRAPH patterns", "EXISTS": "EXISTS", "NOT": "NOT EXISTS",
    "COUNT": "aggregates", "SUM": "aggregates", "MIN": "aggregates", "MAX": "aggregates",
    "AVG": "aggregates", "SAMPLE": "aggregates", "GROUP_CONCAT": "aggregates",
}


class _Parser:
    def __init__(self, text: str):
        try:
            self.toks = tokenize(text)
        except SyntaxErrorWithPosition as exc:
            raise QueryParseError(str(exc).split(": ", 1)[-1], exc.line, exc.col) from None
        self.i = 0
        self.prefixes: Dict[str, str] = {}
        self.base: Optional[str] = None
        self._anon = itertools.count()

    # -- token helpers -------------------------------------------------------
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def error(self, msg: str, tok: Optional[Token] = None) -> QueryParseError:
        tok = tok or self.peek()
        return QueryParseError(msg, tok.line, tok.col)

    def is_kw(self, word: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind == "NAME" and tok.text.upper() == word

    def accept_kw(self, word: str) -> bool:
        if self.is_kw(word):
            self.next()
            return True
        return False

    def expect_kw(self, word: str) -> None:
        if not self.accept_kw(word):
            raise self.error(f"expected {word}, found {self.describe(self.peek())}")

    def accept(self, text: str) -> bool:
        if self.peek().kind == "PUNCT" and self.peek().text == text:
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.kind != "PUNCT" or tok.text != text:
            raise self.error(f"expected {text!r}, found {self.describe(tok)}", tok)
        return tok

    @staticmethod
    def describe(tok: Token) -> str:
        return repr(tok.text) if tok.kind != "EOF" else "end of query"

    # -- query ---------------------------------------------------------------
    def parse(self) -> Query:
        self.prologue()
        tok = self.peek()
        if self.accept_kw("SELECT"):
            query = self.select()
        elif self.accept_kw("CONSTRUCT"):
            query = self.construct()
        elif self.accept_kw("ASK"):
            query = Query("ASK", self.where_clause())
        elif self.is_kw("DESCRIBE"):
            raise self.error("DESCRIBE queries are not supported")
        else:
            raise self.error(f"expected SELECT, CONSTRUCT or ASK, found {self.describe(tok)}")
        if query.form != "ASK":
            self.solution_modifiers(query)
        if self.peek().kind != "EOF":
            if self.is_kw("VALUES"):
                raise self.error("trailing VALUES clauses are not supported")
            raise self.error(f"unexpected {self.describe(self.peek())} after query")
        query.prefixes = dict(self.prefixes)
        return query

    def prologue(self) -> None:
        while True:
            if self.accept_kw("PREFIX"):
                name = self.next()
                if name.kind != "PNAME_NS":
                    raise self.error("expected prefix name", name)
                iri = self.next()
                if iri.kind != "IRIREF":
                    raise self.error("expected IRI", iri)
                self.prefixes[name.text[:-1]] = self.resolve(iri.text[1:-1])
            elif self.accept_kw("BASE"):
                iri = self.next()
                if iri.kind != "IRIREF":
                    raise self.error("expected IRI", iri)
                self.base = self.resolve(iri.text[1:-1])
            else:
                return

    def resolve(self, ref: str) -> str:
        ref = unescape_uchars(ref)
        if self.base and ":" not in ref.split("/", 1)[0]:
            return urljoin(self.base, ref)
        return ref

    def select(self) -> Query:
        distinct = False
        if self.accept_kw("DISTINCT") or self.accept_kw("REDUCED"):
            distinct = True
        projection: Optional[list] = []
        if self.accept("*"):
            projection = None
        else:
            while True:
                tok = self.peek()
                if tok.kind == "VAR":
                    self.next()
                    projection.append((Var(tok.text[1:]), None))
                elif tok.kind == "PUNCT" and tok.text == "(":
                    self.next()
                    expr = self.expression()
                    self.expect_kw("AS")
                    var = self.var()
                    self.expect(")")
                    projection.append((var, expr))
                else:
                    break
            if not projection:
                raise self.error("SELECT needs '*' or at least one variable")
        if self.is_kw("FROM"):
            raise self.error("FROM clauses are not supported")
        query = Query("SELECT", self.where_clause(), projection=projection, distinct=distinct)
        if self.is_kw("GROUP") or self.is_kw("HAVING"):
            raise self.error("GROUP BY / HAVING are not supported")
        return query

    def construct(self) -> Query:
        if self.is_kw("WHERE"):
            self.next()
            self.expect("{")
            bgp = BGP()
            self.triples_block(bgp, template=True)
            self.expect("}")
            return Query("CONSTRUCT", Group([bgp]), template=list(bgp.triples))
        self.expect("{")
        bgp = BGP()
        while not (self.peek().kind == "PUNCT" and self.peek().text == "}"):
            if self.accept("."):
                continue
            self.triples_same_subject(bgp, template=True)
        self.expect("}")
        return Query("CONSTRUCT", self.where_clause(), template=list(bgp.triples))

    def where_clause(self) -> Group:
        if self.is_kw("FROM"):
            raise self.error("FROM clauses are not supported")
        self.accept_kw("WHERE")
        return self.group()

    def solution_modifiers(self, query: Query) -> None:
        if self.is_kw("GROUP") or self.is_kw("HAVING"):
            raise self.error("GROUP BY / HAVING are not supported")
        if self.accept_kw("ORDER"):
            self.expect_kw("BY")
            while True:
                if self.accept_kw("ASC") or self.is_kw("DESC"):
                    desc = self.accept_kw("DESC")
                    self.expect("(")
                    expr = self.expression()
                    self.expect(")")
                    query.order_by.append(OrderKey(expr, desc))
                elif self.peek().kind == "VAR":
                    query.order_by.append(OrderKey(self.var()))
                elif self.peek().text == "(" or self.peek().kind == "NAME" and self.peek().text.upper() in BUILTINS:
                    query.order_by.append(OrderKey(self.primary()))
                else:
                    break
            if not query.order_by:
                raise self.error("ORDER BY needs at least one key")
        for _ in range(2):
            if self.accept_kw("LIMIT"):
                query.limit = self.integer()
            elif self.accept_kw("OFFSET"):
                query.offset = self.integer()

    def integer(self) -> int:
        tok = self.next()
        if tok.kind != "INTEGER":
            raise self.error("expected an integer", tok)
        return int(tok.text)

    def var(self) -> Var:
        tok = self.next()
        if tok.kind != "VAR":
            raise self.error(f"expected a variable, found {self.describe(tok)}", tok)
        return Var(tok.text[1:])

    # -- graph patterns ------------------------------------------------------
    def group(self) -> Group:
        self.expect("{")
        if self.is_kw("SELECT"):
            raise self.error("subqueries are not supported")
        group = Group()
        while True:
            tok = self.peek()
            if tok.kind == "EOF":
                raise self.error("unterminated group pattern: expected '}'")
            if tok.kind == "PUNCT" and tok.text == "}":
                self.next()
                return group
            if tok.kind == "PUNCT" and tok.text == ".":
                self.next()
                continue
            if tok.kind == "NAME":
                word = tok.text.upper()
                if word == "OPTIONAL":
                    self.next()
                    group.operands.append(Optional_(self.group()))
                    continue
                if word == "FILTER":
                    self.next()
                    group.filters.append(self.constraint())
                    continue
                if word == "BIND":
                    self.next()
                    self.expect("(")
                    expr = self.expression()
                    self.expect_kw("AS")
                    var = self.var()
                    self.expect(")")
                    group.operands.append(Bind(expr, var))
                    continue
                if word == "VALUES":
                    self.next()
                    group.operands.append(self.values())
                    continue
                if word == "SERVICE":
                    self.next()
                    silent = self.accept_kw("SILENT")
                    target_tok = self.next()
                    if target_tok.kind == "VAR":
                        target = Var(target_tok.text[1:])
                    elif target_tok.kind in ("IRIREF", "PNAME_LN", "PNAME_NS"):
                        target = self.iri(target_tok)
                    else:
                        raise self.error("SERVICE needs an IRI or a variable", target_tok)
                    group.operands.append(Service(target, self.group(), silent))
                    continue
                if word in ("MINUS", "GRAPH"):
                    raise self.error(f"{_UNSUPPORTED[word]} not supported")
            if tok.kind == "PUNCT" and tok.text == "{":
                branches = [self.group()]
                while self.accept_kw("UNION"):
                    branches.append(self.group())
                group.operands.append(branches[0] if len(branches) == 1 else Union_(branches))
                continue
            bgp = group.operands[-1] if group.operands and isinstance(group.operands[-1], BGP) else None
            if bgp is None:
                bgp = BGP()
                group.operands.append(bgp)
            self.triples_same_subject(bgp)

    def triples_block(self, bgp: BGP, template: bool = False) -> None:
        while not (self.peek().kind == "PUNCT" and self.peek().text == "}"):
            if self.accept("."):
                continue
            self.triples_same_subject(bgp, template)

    def values(self) -> Values:
        if self.peek().kind == "VAR":
            vars_ = [self.var()]
            single = True
        else:
            self.expect("(")
            vars_ = []
            while self.peek().kind == "VAR":
                vars_.append(self.var())
            self.expect(")")
            single = False
        self.expect("{")
        rows = []
        while not self.accept("}"):
            if single:
                rows.append([self.data_value()])
            else:
                self.expect("(")
                row = []
                while not self.accept(")"):
                    row.append(self.data_value())
                if len(row) != len(vars_):
                    raise self.error(f"VALUES row has {len(row)} values for {len(vars_)} variables")
                rows.append(row)
        return Values(vars_, rows)

    def data_value(self):
        if self.accept_kw("UNDEF"):
            return None
        term = self.term()
        if isinstance(term, Var):
            raise self.error("variables are not allowed in VALUES data")
        return term

    def constraint(self):
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.text == "(":
            self.next()
            expr = self.expression()
            self.expect(")")
            return expr
        return self.primary()

    def triples_same_subject(self, bgp: BGP, template: bool = False) -> None:
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.text == "[":
            subject = self.blank_node_property_list(bgp)
            if self.peek().text in (".", "}") and self.peek().kind == "PUNCT":
                return
        elif tok.kind == "PUNCT" and tok.text == "(":
            raise self.error("RDF collections are not supported")
        else:
            subject = self.term()
            if isinstance(subject, Literal) and not template:
                raise self.error("literal in subject position", tok)
        self.property_list(subject, bgp)

    def property_list(self, subject, bgp: BGP) -> None:
        while True:
            verb = self.verb()
            while True:
                obj = self.object(bgp)
                bgp.triples.append(TriplePattern(subject, verb, obj))
                if not self.accept(","):
                    break
            if not self.accept(";"):
                return
            while self.accept(";"):
                pass
            nxt = self.peek()
            if nxt.kind == "EOF" or nxt.kind == "PUNCT" and nxt.text in (".", "}", "]"):
                return

    def verb(self):
        tok = self.next()
        if tok.kind == "NAME" and tok.text == "a":
            verb = IRI(RDF_TYPE)
        elif tok.kind == "VAR":
            verb = Var(tok.text[1:])
        elif tok.kind in ("IRIREF", "PNAME_LN", "PNAME_NS"):
            verb = self.iri(tok)
        elif tok.kind == "PUNCT" and tok.text in ("^", "(", "!"):
            raise self.error("property paths are not supported", tok)
        else:
            raise self.error(f"expected a predicate, found {self.describe(tok)}", tok)
        nxt = self.peek()
        if nxt.kind == "PUNCT" and nxt.text in ("/", "|", "*", "+"):
            raise self.error("property paths are not supported", nxt)
        return verb

    def object(self, bgp: BGP):
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.text == "[":
            return self.blank_node_property_list(bgp)
        if tok.kind == "PUNCT" and tok.text == "(":
            raise self.error("RDF collections are not supported")
        return self.term()

    def blank_node_property_list(self, bgp: BGP) -> Var:
        self.expect("[")
        node = Var(f"_:anon{next(self._anon)}")
        if not self.accept("]"):
            self.property_list(node, bgp)
            self.expect("]")
        return node

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

    def term(self):
        tok = self.next()
        kind = tok.kind
        if kind == "VAR":
            return Var(tok.text[1:])
        if kind in ("IRIREF", "PNAME_LN", "PNAME_NS"):
            return self.iri(tok)
        if kind == "BLANK_NODE_LABEL":
            return Var("_:" + tok.text[2:])
        if kind in ("STRING", "STRING_LONG"):
            return self.literal_rest(tok)
        if kind in _NUMERIC:
            return Literal(tok.text, _NUMERIC[kind])
        if kind == "PUNCT" and tok.text in ("+", "-") and self.peek().kind in _NUMERIC:
            num = self.next()
            return Literal(tok.text + num.text, _NUMERIC[num.kind])
        if kind == "NAME" and tok.text.lower() in ("true", "false"):
            return Literal(tok.text.lower(), XSD_BOOLEAN)
        if kind == "PUNCT" and tok.text == "[" and self.peek().text == "]":
            self.next()
            return Var(f"_:anon{next(self._anon)}")
        raise self.error(f"expected an RDF term or variable, found {self.describe(tok)}", tok)

    def literal_rest(self, tok: Token) -> Literal:
        try:
            lexical = string_token_value(tok)
        except ValueError as exc:
            raise self.error(str(exc), tok) from None
        nxt = self.peek()
        if nxt.kind == "LANGTAG":
            self.next()
            return Literal(lexical, lang=nxt.text[1:])
        if nxt.kind == "PUNCT" and nxt.text == "^^":
            self.next()
            dt = self.next()
            if dt.kind not in ("IRIREF", "PNAME_LN", "PNAME_NS"):
                raise self.error("expected a datatype IRI", dt)
            return Literal(lexical, self.iri(dt).value)
        return Literal(lexical)

    # -- expressions ---------------------------------------------------------
    def expression(self):
        left = self.and_expr()
        while self.accept("||"):
            left = Call("||", (left, self.and_expr()))
        return left

    def and_expr(self):
        left = self.relational()
        while self.accept("&&"):
            left = Call("&&", (left, self.relational()))
        return left

    def relational(self):
        left = self.additive()
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.text in ("=", "!=", "<", ">", "<=", ">="):
            self.next()
            return Call(tok.text, (left, self.additive()))
        if self.is_kw("IN"):
            self.next()
            return Call("IN", (left, *self.expression_list()))
        if self.is_kw("NOT") and self.is_kw("IN", 1):
            self.next()
            self.next()
            return Call("NOT IN", (left, *self.expression_list()))
        return left

    def expression_list(self) -> list:
        self.expect("(")
        items = []
        if self.accept(")"):
            return items
        while True:
            items.append(self.expression())
            if self.accept(")"):
                return items
            self.expect(",")

    def additive(self):
        left = self.multiplicative()
        while True:
            tok = self.peek()
            if tok.kind == "PUNCT" and tok.text in ("+", "-"):
                self.next()
                left = Call(tok.text, (left, self.multiplicative()))
            else:
                return left

    def multiplicative(self):
        left = self.unary()
        while True:
            tok = self.peek()
            if tok.kind == "PUNCT" and tok.text in ("*", "/"):
                self.next()
                left = Call(tok.text, (left, self.unary()))
            else:
                return left

    def unary(self):
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.text == "!":
            self.next()
            return Call("!", (self.unary(),))
        if tok.kind == "PUNCT" and tok.text == "-":
            self.next()
            return Call("NEG", (self.unary(),))
        if tok.kind == "PUNCT" and tok.text == "+":
            self.next()
            return Call("POS", (self.unary(),))
        return self.primary()

    def primary(self):
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.text == "(":
            self.next()
            expr = self.expression()
            self.expect(")")
            return expr
        if tok.kind == "NAME":
            word = tok.text.upper()
            if word in ("TRUE", "FALSE"):
                self.next()
                return Literal(word.lower(), XSD_BOOLEAN)
            if word in _UNSUPPORTED:
                raise self.error(f"{_UNSUPPORTED[word]} not supported")
            if word in BUILTINS:
                self.next()
                return self.builtin_call(word, tok)
            raise self.error(f"unknown function or keyword {tok.text!r}")
        if tok.kind in ("IRIREF", "PNAME_LN", "PNAME_NS"):
            self.next()
            iri = self.iri(tok)
            if self.peek().kind == "PUNCT" and self.peek().text == "(":
                args = self.arg_list()
                return Call(iri.value, tuple(args))
            return iri
        if tok.kind == "VAR":
            self.next()
            return Var(tok.text[1:])
        if tok.kind in ("STRING", "STRING_LONG"):
            self.next()
            return self.literal_rest(tok)
        if tok.kind in _NUMERIC:
            self.next()
            return Literal(tok.text, _NUMERIC[tok.kind])
        raise self.error(f"expected an expression, found {self.describe(tok)}")

    def arg_list(self) -> list:
        self.expect("(")
        if self.accept_kw("DISTINCT"):
            raise self.error("DISTINCT in function arguments is not supported")
        args = []
        if self.accept(")"):
            return args
        while True:
            args.append(self.expression())
            if self.accept(")"):
                return args
            self.expect(",")

    def builtin_call(self, word: str, tok: Token) -> Call:
        if word == "BOUND":
            self.expect("(")
            var = self.var()
            self.expect(")")
            return Call("BOUND", (var,))
        if word in ("RAND", "UUID", "STRUUID") and not (self.peek().text == "("):
            raise self.error(f"{word} needs '()'")
        args = self.arg_list()
        lo, hi = BUILTINS[word]
        if len(args) < lo or (hi is not None and len(args) > hi):
            raise self.error(f"{word} takes {lo}{'' if hi == lo else '..' + (str(hi) if hi else 'n')} arguments, "
                             f"got {len(args)}", tok)
        if word == "URI":
            word = "IRI"
        return Call(word, tuple(args))


def parse_query(text: str) -> Query:
    return _Parser(text).parse()
