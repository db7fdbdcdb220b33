"""JSON documents: objects and arrays become containers, scalars become typed literals."""

from __future__ import annotations

import json
import re
from typing import Any, Iterator, List, Tuple

from ..errors import ConfigError
from ..rdf.terms import Literal
from ..rdf.vocab import XSD_BOOLEAN, XSD_FLOAT, XSD_INT, XSD_INTEGER
from .base import Emitter, SlicePlan, fail, no_header
from .builder import FacadeBuilder, Path

INT32 = range(-(2 ** 31), 2 ** 31)


class _FloatToken(str):
    """Fractional JSON number, kept as its source text."""


_SPECIAL = {"NaN": "NaN", "Infinity": "INF", "-Infinity": "-INF"}


def _decoder() -> json.JSONDecoder:
    return json.JSONDecoder(parse_float=_FloatToken, parse_constant=lambda s: _FloatToken(_SPECIAL[s]))


def scalar_literal(value: Any) -> Literal:
    if isinstance(value, bool):
        return Literal("true" if value else "false", XSD_BOOLEAN)
    if isinstance(value, _FloatToken):
        return Literal(str.__str__(value), XSD_FLOAT)
    if isinstance(value, int):
        return Literal(str(value), XSD_INT if value in INT32 else XSD_INTEGER)
    if isinstance(value, float):
        return Literal(repr(value), XSD_FLOAT)
    return Literal(str(value))


def emit_value(builder: FacadeBuilder, parent: Path, key, value: Any) -> None:
    if value is None:
        return
    if isinstance(value, dict):
        emit_members(builder, builder.container(parent, key), value)
    elif isinstance(value, list):
        emit_members(builder, builder.container(parent, key), value)
    else:
        builder.value(parent, key, scalar_literal(value))


def emit_members(builder: FacadeBuilder, path: Path, value: Any) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            emit_value(builder, path, str(k), v)
    else:
        # null items are skipped without leaving a gap in the sequence
        for i, item in enumerate((x for x in value if x is not None), 1):
            emit_value(builder, path, i, item)


def emit_document(builder: FacadeBuilder, root: Path, doc: Any) -> None:
    if isinstance(doc, (dict, list)):
        emit_members(builder, root, doc)
    else:
        emit_value(builder, root, 1, doc)


# -- a JSONPath subset ---------------------------------------------------------

_STEP = re.compile(r"""
    (?P<rec>\.\.)?
    (?:
        \.?(?P<name>[A-Za-z_$][\w$\-]*)
      | \.?\*(?P<star>)
      | \[\s*(?:
            (?P<index>-?\d+)
          | '(?P<sq>(?:[^'\\]|\\.)*)'
          | "(?P<dq>(?:[^"\\]|\\.)*)"
          | (?P<bstar>\*)
        )\s*\]
    )""", re.VERBOSE)


def compile_json_path(expr: str) -> List[Tuple[bool, str, Any]]:
    """``$.a[0]..b['c d'][*]`` -> list of (recursive, kind, arg) steps."""
    text = expr.strip()
    if not text.startswith("$"):
        raise ConfigError(f"json.path must start with '$': {expr!r}")
    pos, steps = 1, []
    while pos < len(text):
        m = _STEP.match(text, pos)
        if not m or m.end() == pos:
            raise ConfigError(f"unsupported json.path syntax at offset {pos}: {expr!r}")
        rec = bool(m.group("rec"))
        if not rec and text[pos] not in ".[":
            raise ConfigError(f"unsupported json.path syntax at offset {pos}: {expr!r}")
        if m.group("name") is not None:
            steps.append((rec, "key", m.group("name")))
        elif m.group("index") is not None:
            steps.append((rec, "index", int(m.group("index"))))
        elif m.group("sq") is not None or m.group("dq") is not None:
            raw = m.group("sq") if m.group("sq") is not None else m.group("dq")
            steps.append((rec, "key", re.sub(r"\\(.)", r"\1", raw)))
        else:
            steps.append((rec, "any", None))
        pos = m.end()
    return steps


def _children(node: Any) -> List[Any]:
    if isinstance(node, dict):
        return list(node.values())
    if isinstance(node, list):
        return list(node)
    return []


def _descendants_or_self(node: Any) -> Iterator[Any]:
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(_children(n)))


def _apply(node: Any, kind: str, arg: Any) -> List[Any]:
    if kind == "any":
        return _children(node)
    if kind == "key":
        return [node[arg]] if isinstance(node, dict) and arg in node else []
    if isinstance(node, list) and -len(node) <= arg < len(node):
        return [node[arg]]
    return []


def select_json(doc: Any, steps) -> List[Any]:
    current = [doc]
    for rec, kind, arg in steps:
        nxt: List[Any] = []
        for node in current:
            for base in (_descendants_or_self(node) if rec else (node,)):
                nxt.extend(_apply(base, kind, arg))
        current = nxt
    return [x for x in current if x is not None]


# -- entry points ----------------------------------------------------------------

def _load(src) -> Any:
    text = src.text()
    try:
        return _decoder().decode(text)
    except json.JSONDecodeError as exc:
        raise fail(src, f"malformed JSON at offset {exc.pos} (line {exc.lineno}, column {exc.colno}): {exc.msg}",
                   exc)


def _unit(index: int, value: Any) -> Emitter:
    return lambda builder, root: emit_value(builder, root, index, value)


def _stream_array(src) -> Iterator[Any]:
    """Top-level array elements, decoded one at a time from the source text."""
    text = src.text()
    decoder = _decoder()
    ws = re.compile(r"[ \t\n\r]*")
    pos = ws.match(text, 0).end()
    if not text.startswith("[", pos):
        raise ConfigError("slicing JSON requires a top-level array (or a json.path selecting the units)")
    pos = ws.match(text, pos + 1).end()
    if text.startswith("]", pos):
        return
    while True:
        try:
            value, pos = decoder.raw_decode(text, pos)
        except json.JSONDecodeError as exc:
            raise fail(src, f"malformed JSON at offset {exc.pos}: {exc.msg}", exc)
        yield value
        pos = ws.match(text, pos).end()
        if text.startswith(",", pos):
            pos = ws.match(text, pos + 1).end()
            continue
        if text.startswith("]", pos) and not text[ws.match(text, pos + 1).end():]:
            return
        raise fail(src, f"malformed JSON at offset {pos}: expected ',' or ']'")


def plan(src, options, sliced: bool = False) -> SlicePlan:
    path = options.get_option("json.path")
    if path:
        steps = compile_json_path(path)
        return SlicePlan(no_header, ((i, _unit(i, v)) for i, v in enumerate(select_json(_load(src), steps), 1)))
    if sliced:
        items = (v for v in _stream_array(src) if v is not None)
        return SlicePlan(no_header, ((i, _unit(i, v)) for i, v in enumerate(items, 1)))
    doc = _load(src)
    return SlicePlan(lambda builder, root: emit_document(builder, root, doc), iter(()))


def triplify(src, builder: FacadeBuilder) -> None:
    plan(src, builder.options).run(builder)
