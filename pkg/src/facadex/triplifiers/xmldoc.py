"""XML: elements are containers typed by tag, attributes are string slots,
child elements and text are the ordered sequence."""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from typing import Iterator, List, Optional, Tuple

from ..errors import ConfigError
from ..rdf.terms import IRI
from .base import Emitter, SlicePlan, fail, no_header
from .builder import FacadeBuilder, Path


def qname_iri(builder: FacadeBuilder, name: str):
    """Slot key / type for an ElementTree name; declared namespaces are reused."""
    if name.startswith("{"):
        ns, _, local = name[1:].partition("}")
        sep = "" if ns.endswith(("/", "#", ":")) else "#"
        return IRI(ns + sep + local)
    return name


def _type(builder: FacadeBuilder, tag: str) -> IRI:
    key = qname_iri(builder, tag)
    return key if isinstance(key, IRI) else builder.type_iri(key)


def _is_text(text: Optional[str]) -> bool:
    return bool(text) and not text.isspace()


def element_header(builder: FacadeBuilder, path: Path, tag: str, attrib) -> None:
    builder.add_type(path, _type(builder, tag))
    for name, value in attrib.items():
        builder.string(path, qname_iri(builder, name), value)


def emit_element(builder: FacadeBuilder, parent: Path, index: int, elem: ET.Element) -> None:
    path = builder.container(parent, index)
    element_header(builder, path, elem.tag, elem.attrib)
    emit_content(builder, path, elem)


def emit_content(builder: FacadeBuilder, path: Path, elem: ET.Element) -> None:
    i = 0
    if _is_text(elem.text):
        i += 1
        builder.string(path, i, elem.text)
    for child in elem:
        if isinstance(child.tag, str):
            i += 1
            emit_element(builder, path, i, child)
        if _is_text(child.tail):
            i += 1
            builder.string(path, i, child.tail)


# -- xml.path: an absolute child/descendant step subset ------------------------

_PATH_STEP = re.compile(r"(//|/)([A-Za-z_][\w.\-]*(?::[A-Za-z_][\w.\-]*)?|\*)(?:\[(\d+)\])?")


def compile_xml_path(expr: str) -> List[Tuple[bool, str, Optional[int]]]:
    pos, steps = 0, []
    expr = expr.strip()
    if not expr.startswith("/"):
        raise ConfigError(f"xml.path must be an absolute path: {expr!r}")
    while pos < len(expr):
        m = _PATH_STEP.match(expr, pos)
        if not m:
            raise ConfigError(f"unsupported xml.path syntax at offset {pos}: {expr!r}")
        n = int(m.group(3)) if m.group(3) else None
        if n == 0:
            raise ConfigError(f"xml.path positions start at 1: {expr!r}")
        steps.append((m.group(1) == "//", m.group(2), n))
        pos = m.end()
    return steps


def _local(tag) -> Optional[str]:
    if not isinstance(tag, str):
        return None
    return tag.rpartition("}")[2]


def _name_matches(test: str, tag) -> bool:
    local = _local(tag)
    return local is not None and (test == "*" or test.rpartition(":")[2] == local)


def select_xml(root: ET.Element, steps) -> List[ET.Element]:
    order = {id(e): i for i, e in enumerate(root.iter())}
    document = ET.Element("#document")
    document.append(root)
    context = [document]
    for descendant, test, position in steps:
        found = {}
        for node in context:
            bases = node.iter() if descendant else (node,)
            for base in bases:
                matches = [c for c in base if _name_matches(test, c.tag)]
                if position is not None:
                    matches = matches[position - 1:position]
                for m in matches:
                    found[id(m)] = m
        context = sorted(found.values(), key=lambda e: order[id(e)])
    return context


# -- entry points -----------------------------------------------------------------

def _parse_error(src, exc: ET.ParseError):
    line, col = exc.position
    return fail(src, f"malformed XML at line {line}, column {col}: {exc}", exc)


def _events(src):
    try:
        with src.open() as fh:
            yield from ET.iterparse(fh, events=("start", "end"))
    except ET.ParseError as exc:
        raise _parse_error(src, exc)


def plan(src, options, sliced: bool = False) -> SlicePlan:
    path_expr = options.get_option("xml.path")
    if path_expr:
        steps = compile_xml_path(path_expr)
        try:
            with src.open() as fh:
                root = ET.parse(fh).getroot()
        except ET.ParseError as exc:
            raise _parse_error(src, exc)
        selected = select_xml(root, steps)
        return SlicePlan(no_header, ((i, _element_unit(i, e)) for i, e in enumerate(selected, 1)))

    events = _events(src)
    try:
        _, doc = next(events)
    except StopIteration:
        raise fail(src, "empty XML document")
    tag, attrib = doc.tag, dict(doc.attrib)

    def header(builder: FacadeBuilder, root: Path) -> None:
        element_header(builder, root, tag, attrib)

    return SlicePlan(header, _units(events, doc))


def _element_unit(index: int, elem: ET.Element) -> Emitter:
    return lambda builder, root: emit_element(builder, root, index, elem)


def _text_unit(index: int, text: str) -> Emitter:
    return lambda builder, root: builder.string(root, index, text)


def _units(events, doc: ET.Element) -> Iterator[Tuple[int, Emitter]]:
    """Children of the document element, released from memory as they complete."""
    depth = 1
    index = 0
    previous: Optional[ET.Element] = None
    for event, elem in events:
        if event == "start":
            depth += 1
            continue
        depth -= 1
        if depth != 1:
            continue
        pending = doc.text if previous is None else previous.tail
        if _is_text(pending):
            index += 1
            yield index, _text_unit(index, pending)
        if previous is not None:
            doc.remove(previous)
        index += 1
        yield index, _element_unit(index, elem)
        previous = elem
    trailing = doc.text if previous is None else previous.tail
    if _is_text(trailing):
        index += 1
        yield index, _text_unit(index, trailing)


def triplify(src, builder: FacadeBuilder) -> None:
    plan(src, builder.options).run(builder)


__all__ = ["triplify", "plan", "emit_element", "emit_content", "element_header", "select_xml",
           "compile_xml_path", "qname_iri"]
