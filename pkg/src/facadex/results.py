"""Writers for query results (SPARQL JSON/XML/CSV and a text table) and readers for
JSON/CSV result sets used as parameter bindings."""

from __future__ import annotations

import csv
import io
import json
from typing import Dict, List, Optional, Tuple
from xml.sax.saxutils import escape, quoteattr

from .errors import FacadeError
from .rdf import serialize_graph
from .rdf.terms import IRI, BNode, Literal
from .rdf.vocab import XSD_STRING
from .sparql.evaluator import QueryResult

RESULT_FORMATS = ("JSON", "XML", "CSV", "TEXT")
GRAPH_FORMATS = ("TTL", "NT", "NQ")
ALL_FORMATS = RESULT_FORMATS + GRAPH_FORMATS


class FormatError(FacadeError):
    pass


def default_format(form: str) -> str:
    return "TTL" if form == "CONSTRUCT" else "TEXT"


def check_compatible(form: str, fmt: str) -> None:
    fmt = fmt.upper()
    if fmt not in ALL_FORMATS:
        raise FormatError(f"unknown output format {fmt!r}; choose one of {', '.join(ALL_FORMATS)}")
    if form == "CONSTRUCT" and fmt not in GRAPH_FORMATS:
        raise FormatError(f"{fmt} cannot hold a CONSTRUCT result; use TTL, NT or NQ")
    if form != "CONSTRUCT" and fmt not in RESULT_FORMATS:
        raise FormatError(f"{fmt} cannot hold a {form} result; use JSON, XML, CSV or TEXT")


# -- term encodings ----------------------------------------------------------------

def term_json(term) -> dict:
    if isinstance(term, IRI):
        return {"type": "uri", "value": term.value}
    if isinstance(term, BNode):
        return {"type": "bnode", "value": term.label}
    out = {"type": "literal", "value": term.lexical}
    if term.lang:
        out["xml:lang"] = term.lang
    elif term.datatype != XSD_STRING:
        out["datatype"] = term.datatype
    return out


def term_from_json(obj: dict):
    kind = obj.get("type")
    if kind == "uri":
        return IRI(obj["value"])
    if kind == "bnode":
        return BNode(obj["value"])
    if kind in ("literal", "typed-literal"):
        if "xml:lang" in obj:
            return Literal(obj["value"], lang=obj["xml:lang"])
        return Literal(obj["value"], obj.get("datatype", XSD_STRING))
    raise FormatError(f"unknown term type {kind!r} in SPARQL JSON results")


def _plain(term) -> str:
    if isinstance(term, IRI):
        return term.value
    if isinstance(term, BNode):
        return "_:" + term.label
    return term.lexical


# -- writers -------------------------------------------------------------------------

def to_json(result: QueryResult) -> str:
    if result.form == "ASK":
        doc = {"head": {}, "boolean": result.boolean}
    else:
        doc = {"head": {"vars": result.variables},
               "results": {"bindings": [{k: term_json(v) for k, v in row.items() if k in result.variables}
                                        for row in result.rows]}}
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def to_xml(result: QueryResult) -> str:
    out = ['<?xml version="1.0"?>', '<sparql xmlns="http://www.w3.org/2005/sparql-results#">', "  <head>"]
    for v in result.variables:
        out.append(f"    <variable name={quoteattr(v)}/>")
    out.append("  </head>")
    if result.form == "ASK":
        out.append(f"  <boolean>{'true' if result.boolean else 'false'}</boolean>")
    else:
        out.append("  <results>")
        for row in result.rows:
            out.append("    <result>")
            for v in result.variables:
                term = row.get(v)
                if term is None:
                    continue
                if isinstance(term, IRI):
                    body = f"<uri>{escape(term.value)}</uri>"
                elif isinstance(term, BNode):
                    body = f"<bnode>{escape(term.label)}</bnode>"
                elif term.lang:
                    body = f"<literal xml:lang={quoteattr(term.lang)}>{escape(term.lexical)}</literal>"
                elif term.datatype != XSD_STRING:
                    body = f"<literal datatype={quoteattr(term.datatype)}>{escape(term.lexical)}</literal>"
                else:
                    body = f"<literal>{escape(term.lexical)}</literal>"
                out.append(f"      <binding name={quoteattr(v)}>{body}</binding>")
            out.append("    </result>")
        out.append("  </results>")
    out.append("</sparql>")
    return "\n".join(out) + "\n"


def to_csv(result: QueryResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    if result.form == "ASK":
        writer.writerow(["_askResult"])
        writer.writerow(["true" if result.boolean else "false"])
        return buf.getvalue()
    writer.writerow(result.variables)
    for row in result.rows:
        writer.writerow([_plain(row[v]) if row.get(v) is not None else "" for v in result.variables])
    return buf.getvalue()


def to_text(result: QueryResult) -> str:
    """A fixed-width table: header row, a rule line, then one line per solution."""
    if result.form == "ASK":
        return ("true" if result.boolean else "false") + "\n"
    header = ["?" + v for v in result.variables]
    cells = [[row[v].n3() if row.get(v) is not None else "" for v in result.variables] for row in result.rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(header)]

    def line(values):
        return "| " + " | ".join(v.ljust(w) for v, w in zip(values, widths)) + " |"

    rule = "|" + "|".join("-" * (w + 2) for w in widths) + "|"
    lines = [line(header), rule] + [line(r) for r in cells]
    return "\n".join(lines) + "\n"


def format_result(result: QueryResult, fmt: Optional[str] = None, prefixes: Optional[dict] = None) -> str:
    fmt = (fmt or default_format(result.form)).upper()
    check_compatible(result.form, fmt)
    if fmt in GRAPH_FORMATS:
        return serialize_graph(result.graph, fmt, prefixes)
    return {"JSON": to_json, "XML": to_xml, "CSV": to_csv, "TEXT": to_text}[fmt](result)


# -- readers ---------------------------------------------------------------------------

def read_json_results(text: str) -> Tuple[List[str], List[Dict[str, object]]]:
    doc = json.loads(text)
    try:
        variables = list(doc["head"].get("vars", []))
        rows = [{k: term_from_json(v) for k, v in b.items()} for b in doc["results"]["bindings"]]
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"not a SPARQL JSON result set: {exc}") from exc
    return variables, rows


def read_csv_results(text: str) -> Tuple[List[str], List[Dict[str, object]]]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        return [], []
    rows = []
    for record in reader:
        if not record:
            continue
        rows.append({h: Literal(v) for h, v in zip(header, record) if v != ""})
    return header, rows


def read_bindings(text: str) -> Tuple[List[str], List[Dict[str, object]]]:
    """Parse a SPARQL JSON or CSV result set, guessing the format from the content."""
    if text.lstrip().startswith("{"):
        return read_json_results(text)
    return read_csv_results(text)
