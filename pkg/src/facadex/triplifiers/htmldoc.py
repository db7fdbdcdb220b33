"""HTML via an error-tolerant DOM builder plus a small CSS selector engine."""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from html.parser import HTMLParser
from typing import Dict, List, Optional, Tuple

from ..errors import ConfigError
from .base import SlicePlan
from .builder import FacadeBuilder
from .xmldoc import emit_content, emit_element

VOID = frozenset("area base br col embed hr img input keygen link meta param source track wbr".split())
_BLOCK = frozenset(("address article aside blockquote details div dl fieldset figcaption figure footer form "
                    "h1 h2 h3 h4 h5 h6 header hr main menu nav ol p pre section table ul").split())
# opening the key tag implicitly closes any of these still open directly above it
IMPLIED_END: Dict[str, frozenset] = {
    "li": frozenset({"li"}),
    "dt": frozenset({"dt", "dd"}),
    "dd": frozenset({"dt", "dd"}),
    "tr": frozenset({"tr", "td", "th"}),
    "td": frozenset({"td", "th"}),
    "th": frozenset({"td", "th"}),
    "option": frozenset({"option"}),
    "thead": frozenset({"tbody", "tfoot", "tr", "td", "th"}),
    "tbody": frozenset({"thead", "tfoot", "tr", "td", "th"}),
    "tfoot": frozenset({"thead", "tbody", "tr", "td", "th"}),
}
for _tag in _BLOCK:
    IMPLIED_END[_tag] = IMPLIED_END.get(_tag, frozenset()) | {"p"}


class _DomBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.document = ET.Element("#document")
        self.stack: List[ET.Element] = [self.document]

    def _append_text(self, data: str) -> None:
        parent = self.stack[-1]
        if len(parent):
            last = parent[-1]
            last.tail = (last.tail or "") + data
        else:
            parent.text = (parent.text or "") + data

    def handle_starttag(self, tag, attrs):
        closes = IMPLIED_END.get(tag)
        while closes and len(self.stack) > 1 and self.stack[-1].tag in closes:
            self.stack.pop()
        elem = ET.SubElement(self.stack[-1], tag, {k: ("" if v is None else v) for k, v in attrs})
        if tag not in VOID:
            self.stack.append(elem)

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)
        if tag not in VOID and self.stack[-1].tag == tag:
            self.stack.pop()

    def handle_endtag(self, tag):
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # stray end tag: ignored

    def handle_data(self, data):
        self._append_text(data)


def parse_html(text: str) -> ET.Element:
    builder = _DomBuilder()
    builder.feed(text)
    builder.close()
    return builder.document


# -- CSS selectors --------------------------------------------------------------------

_COMPOUND = re.compile(r"""
    (?P<tag>\*|[A-Za-z][\w-]*)?
    (?P<rest>(?:\.[\w-]+|\#[\w-]+|\[\s*[\w-]+\s*(?:=\s*(?:"[^"]*"|'[^']*'|[\w-]+)\s*)?\])*)
    """, re.VERBOSE)
_SIMPLE = re.compile(r"""\.(?P<cls>[\w-]+)|\#(?P<id>[\w-]+)|\[\s*(?P<attr>[\w-]+)\s*(?:=\s*(?:"(?P<dq>[^"]*)"|'(?P<sq>[^']*)'|(?P<bare>[\w-]+))\s*)?\]""")

Compound = Tuple[Optional[str], List[Tuple[str, str, Optional[str]]]]


def _parse_compound(text: str, selector: str) -> Compound:
    m = _COMPOUND.fullmatch(text)
    if not m or not text:
        raise ConfigError(f"unsupported html.selector syntax {text!r} in {selector!r}")
    conditions = []
    for s in _SIMPLE.finditer(m.group("rest")):
        if s.group("cls"):
            conditions.append(("class", s.group("cls"), None))
        elif s.group("id"):
            conditions.append(("id", s.group("id"), None))
        else:
            value = next((v for v in (s.group("dq"), s.group("sq"), s.group("bare")) if v is not None), None)
            conditions.append(("attr", s.group("attr").lower(), value))
    tag = m.group("tag")
    return (None if tag in (None, "*") else tag.lower()), conditions


def compile_selector(selector: str) -> List[List[Tuple[str, Compound]]]:
    """Groups of (combinator, compound) chains; combinator is ' ' or '>'."""
    groups = []
    for part in selector.split(","):
        tokens = re.findall(r">|[^\s>]+", part)
        if not tokens or tokens[0] == ">" or tokens[-1] == ">":
            raise ConfigError(f"unsupported html.selector syntax: {selector!r}")
        chain, combinator = [], " "
        for tok in tokens:
            if tok == ">":
                if combinator == ">":
                    raise ConfigError(f"unsupported html.selector syntax: {selector!r}")
                combinator = ">"
                continue
            chain.append((combinator, _parse_compound(tok, selector)))
            combinator = " "
        groups.append(chain)
    return groups


def _matches_compound(elem: ET.Element, compound: Compound) -> bool:
    tag, conditions = compound
    if not isinstance(elem.tag, str) or elem.tag == "#document":
        return False
    if tag is not None and elem.tag != tag:
        return False
    for kind, name, value in conditions:
        if kind == "class" and name not in elem.get("class", "").split():
            return False
        if kind == "id" and elem.get("id") != name:
            return False
        if kind == "attr" and (name not in elem.attrib or (value is not None and elem.get(name) != value)):
            return False
    return True


def _matches_chain(elem, chain, parents) -> bool:
    combinator, compound = chain[-1]
    if not _matches_compound(elem, compound):
        return False
    if len(chain) == 1:
        return True
    rest = chain[:-1]
    ancestor = parents.get(elem)
    if combinator == ">":
        return ancestor is not None and _matches_chain(ancestor, rest, parents)
    while ancestor is not None:
        if _matches_chain(ancestor, rest, parents):
            return True
        ancestor = parents.get(ancestor)
    return False


def select_html(document: ET.Element, selector: str) -> List[ET.Element]:
    groups = compile_selector(selector)
    parents = {child: parent for parent in document.iter() for child in parent}
    return [e for e in document.iter() if any(_matches_chain(e, chain, parents) for chain in groups)]


def plan(src, options, sliced: bool = False) -> SlicePlan:
    document = parse_html(src.text())
    selector = options.get_option("html.selector")
    if selector:
        matched = select_html(document, selector)
        units = ((i, (lambda b, r, i=i, e=e: emit_element(b, r, i, e))) for i, e in enumerate(matched, 1))
        return SlicePlan(lambda b, r: None, units)
    return SlicePlan(lambda b, r: emit_content(b, r, document), iter(()))


def triplify(src, builder: FacadeBuilder) -> None:
    plan(src, builder.options).run(builder)


__all__ = ["triplify", "parse_html", "select_html", "compile_selector"]
