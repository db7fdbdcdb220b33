"""The ``fx`` command: run a query, optionally parametrised, and write the results."""

from __future__ import annotations

import argparse
import logging
import os
import re
import sys
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import FacadeError
from .rdf import format_for_path, parse_rdf
from .rdf.graph import Dataset, Graph
from .rdf.terms import IRI, BNode, Literal, Triple, escape_string
from .results import FormatError, check_compatible, default_format, format_result, read_bindings
from .sparql.evaluator import Engine
from .sparql.parser import parse_query

log = logging.getLogger("facadex")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

# ?_name (required) and ?__name (optional); $ is accepted as a variable sigil too
PARAMETER = re.compile(r"[?$](__?)([A-Za-z0-9][A-Za-z0-9_]*)")
_IRI_STOP = set(" \t\r\n<>\"{}|^`\\")


class UsageError(FacadeError):
    pass


class MissingParameterError(FacadeError):
    pass


def find_parameters(text: str) -> Tuple[set, set]:
    """Names of the required and optional parameters referenced in ``text``."""
    required, optional = set(), set()
    for m in PARAMETER.finditer(text):
        (optional if m.group(1) == "__" else required).add(m.group(2))
    return required, optional


def _inside_iri(text: str, start: int, end: int) -> bool:
    i = start - 1
    while i >= 0 and text[i] not in _IRI_STOP:
        i -= 1
    if i < 0 or text[i] != "<":
        return False
    j = end
    while j < len(text) and text[j] not in _IRI_STOP:
        j += 1
    return j < len(text) and text[j] == ">"


def _lookup(name: str, row: Mapping[str, object]):
    """Value for ``name``; a trailing ``_iri`` asks for the base name rendered as an IRI."""
    if name in row:
        return row[name], False
    if name.endswith("_iri") and name[:-4] in row:
        return row[name[:-4]], True
    return None, False


def _raw(value) -> str:
    if isinstance(value, IRI):
        return value.value
    if isinstance(value, BNode):
        return value.label
    if isinstance(value, Literal):
        return value.lexical
    return str(value)


def _render(value, as_iri: bool) -> str:
    if as_iri:
        return "<" + _raw(value) + ">"
    if isinstance(value, (IRI, Literal)):
        return value.n3()
    return '"' + escape_string(_raw(value)) + '"'


def substitute(text: str, row: Mapping[str, object]) -> str:
    """Replace every parameter in ``text`` with its value from ``row``."""
    missing = []

    def repl(m: re.Match) -> str:
        optional, name = m.group(1) == "__", m.group(2)
        value, as_iri = _lookup(name, row)
        raw_context = _inside_iri(text, m.start(), m.end())
        if value is None:
            if not optional:
                missing.append(name)
                return m.group(0)
            return "" if raw_context else '""'
        return _raw(value) if raw_context else _render(value, as_iri)

    out = PARAMETER.sub(repl, text)
    if missing:
        raise MissingParameterError("missing value for parameter(s): " + ", ".join(sorted(set(missing))))
    return out


def expand_basil(text: str, rows: Sequence[Mapping[str, object]]) -> List[str]:
    """One concrete query per row. Raises MissingParameterError if any row lacks a required value."""
    required, optional = find_parameters(text)
    if not rows:
        if required:
            raise MissingParameterError("query has parameters but no values were given: "
                                        + ", ".join(sorted(required)))
        return [substitute(text, {})] if optional else [text]
    return [substitute(text, row) for row in rows]


def fill_pattern(pattern: str, row: Mapping[str, object]) -> str:
    def repl(m: re.Match) -> str:
        value, _ = _lookup(m.group(2), row)
        if value is None:
            if m.group(1) == "__":
                return ""
            raise MissingParameterError(f"output pattern needs parameter {m.group(2)!r}")
        return _raw(value)

    return PARAMETER.sub(repl, pattern)


def parse_inline_values(items: Sequence[str]) -> List[Dict[str, object]]:
    row: Dict[str, object] = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise UsageError(f"-v expects name=value, got {item!r}")
        row[name.lstrip("?$").lstrip("_")] = Literal(value)
    return [row] if row else []


def _read_rdf(path: Path) -> Graph:
    data = parse_rdf(path.read_text(encoding="utf-8"), format_for_path(path))
    return data.union_graph() if isinstance(data, Dataset) else data


def load_dataset(path: str) -> Graph:
    """Parse one RDF file, or every .nt/.nq/.ttl file of a folder merged into one graph."""
    root = Path(path)
    if root.is_dir():
        files = sorted(p for p in root.iterdir() if p.is_file() and format_for_path(p))
        if not files:
            raise UsageError(f"no .nt, .nq or .ttl files in {path!r}")
        merged = Graph()
        for n, file in enumerate(files):
            # blank nodes of different files must stay distinct
            rename = {}
            for t in _read_rdf(file):
                s, o = (rename.setdefault(x, BNode(f"f{n}x{x.label}")) if isinstance(x, BNode) else x
                        for x in (t.s, t.o))
                merged.add(Triple(s, t.p, o))
        return merged
    if format_for_path(path) is None:
        raise UsageError(f"cannot tell the RDF format of {path!r}; use .nt, .nq or .ttl")
    return _read_rdf(root)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fx", description="Query CSV, JSON, XML and other files with SPARQL.")
    p.add_argument("-q", "--query", required=True, help="file holding the SPARQL query")
    p.add_argument("-f", "--format", type=str.upper, help="output format: JSON, XML, CSV, TEXT, TTL, NT or NQ")
    p.add_argument("-o", "--output", help="write results to this file instead of standard output")
    p.add_argument("-i", "--input", help="SPARQL result set (JSON or CSV) with parameter values, one run per row")
    p.add_argument("-v", "--values", action="append", default=[], metavar="NAME=VALUE",
                   help="parameter value; repeat for more parameters")
    p.add_argument("-p", "--output-pattern", help="per-run output file name; ?_name placeholders are filled in")
    p.add_argument("-l", "--load", help="RDF file (.nt, .nq, .ttl), or a folder of them, queried as the base dataset")
    return p


def _configure_logging() -> None:
    level = os.environ.get("FX_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return _run(args)
    except UsageError as exc:
        print(f"fx: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _run(args) -> int:
    if args.output_pattern and not (args.input or args.values):
        raise UsageError("-p needs parameter values from -i or -v")
    if args.output and args.output_pattern:
        raise UsageError("-o and -p cannot be combined")
    try:
        text = Path(args.query).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read query {args.query!r}: {exc.strerror}") from None

    rows: List[Dict[str, object]] = []
    if args.input:
        try:
            _, rows = read_bindings(Path(args.input).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read values {args.input!r}: {exc.strerror}") from None
        except (ValueError, FacadeError) as exc:
            raise UsageError(f"bad values file {args.input!r}: {exc}") from None
    inline = parse_inline_values(args.values)
    if inline and rows:
        # -v values extend (and override) every row read from -i
        rows = [{**row, **inline[0]} for row in rows]
    elif inline:
        rows = inline

    required, optional = find_parameters(text)
    if not rows and required:
        raise UsageError("query has parameters but no values were given: " + ", ".join(sorted(required)))
    runs = rows or [{}]

    dataset = None
    if args.load:
        try:
            dataset = load_dataset(args.load)
        except UsageError:
            raise
        except OSError as exc:
            raise UsageError(f"cannot read {args.load!r}: {exc.strerror}") from None
        except (ValueError, FacadeError) as exc:
            print(f"fx: cannot load {args.load}: {exc}", file=sys.stderr)
            return EXIT_FAILURE

    # expand and parse everything up front so format mistakes surface before any execution
    plans = []
    status = EXIT_OK
    for n, row in enumerate(runs, 1):
        try:
            concrete = substitute(text, row) if (required or optional) else text
            query = parse_query(concrete)
        except FacadeError as exc:
            print(f"fx: run {n}: {exc}", file=sys.stderr)
            status = EXIT_FAILURE
            continue
        fmt = args.format or default_format(query.form)
        try:
            check_compatible(query.form, fmt)
        except FormatError as exc:
            raise UsageError(str(exc)) from None
        target = fill_pattern(args.output_pattern, row) if args.output_pattern else None
        plans.append((n, query, fmt, target))

    targets = [t for _, _, _, t in plans if t is not None]
    if len(targets) != len(set(targets)):
        raise UsageError("output pattern gives the same file name to several runs")

    engine = Engine(dataset)
    chunks: List[str] = []
    for n, query, fmt, target in plans:
        log.info("run %d", n)
        try:
            output = format_result(engine.query(query), fmt, query.prefixes)
        except FacadeError as exc:
            print(f"fx: run {n}: {exc}", file=sys.stderr)
            status = EXIT_FAILURE
            continue
        if target is not None:
            Path(target).write_text(output, encoding="utf-8")
        else:
            chunks.append(output)

    if chunks:
        if args.output:
            Path(args.output).write_text("".join(chunks), encoding="utf-8")
        else:
            sys.stdout.write("".join(chunks))
            sys.stdout.flush()
    return status


if __name__ == "__main__":
    sys.exit(main())
