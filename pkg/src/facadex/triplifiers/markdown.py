"""Markdown: a document is a sequence of typed block containers holding inline content."""

from __future__ import annotations

from typing import List, Optional

from markdown_it import MarkdownIt
from markdown_it.token import Token

from ..rdf.terms import Literal
from ..rdf.vocab import XSD_BOOLEAN, XSD_INT
from .base import SlicePlan
from .builder import FacadeBuilder, Path

BLOCK_TYPES = {
    "heading": "Heading",
    "paragraph": "Paragraph",
    "bullet_list": "List",
    "ordered_list": "List",
    "list_item": "ListItem",
    "blockquote": "BlockQuote",
}
INLINE_TYPES = {"em": "Emphasis", "strong": "Strong", "link": "Link"}

_parser = MarkdownIt("commonmark")


class _Sequence:
    """Appends to one container, merging adjacent text runs into a single value."""

    def __init__(self, builder: FacadeBuilder, path: Path):
        self.builder = builder
        self.path = path
        self.index = 0
        self.text: List[str] = []

    def flush(self) -> None:
        if self.text:
            self.index += 1
            self.builder.string(self.path, self.index, "".join(self.text))
            self.text = []

    def add_text(self, text: str) -> None:
        self.text.append(text)

    def child(self, type_name: str) -> Path:
        self.flush()
        self.index += 1
        path = self.builder.container(self.path, self.index)
        self.builder.add_type(path, self.builder.type_iri(type_name))
        return path


def _emit_inline(builder: FacadeBuilder, seq: _Sequence, tokens: List[Token]) -> None:
    stack = [seq]
    for tok in tokens:
        top = stack[-1]
        kind = tok.type
        if kind in ("text", "html_inline"):
            top.add_text(tok.content)
        elif kind in ("softbreak", "hardbreak"):
            top.add_text("\n")
        elif kind == "code_inline":
            path = top.child("Code")
            builder.string(path, 1, tok.content)
        elif kind == "image":
            path = top.child("Image")
            builder.string(path, "src", tok.attrGet("src") or "")
            if tok.attrGet("title"):
                builder.string(path, "title", tok.attrGet("title"))
            inner = _Sequence(builder, path)
            _emit_inline(builder, inner, tok.children or [])
            inner.flush()
        elif kind.endswith("_open") and kind[:-5] in INLINE_TYPES:
            path = top.child(INLINE_TYPES[kind[:-5]])
            if kind == "link_open":
                builder.string(path, "href", tok.attrGet("href") or "")
                if tok.attrGet("title"):
                    builder.string(path, "title", tok.attrGet("title"))
            stack.append(_Sequence(builder, path))
        elif kind.endswith("_close") and kind[:-6] in INLINE_TYPES and len(stack) > 1:
            stack.pop().flush()
        # anything else degrades to nothing; its text arrives as separate tokens
    while len(stack) > 1:
        stack.pop().flush()


def _emit_blocks(builder: FacadeBuilder, seq: _Sequence, tokens: List[Token], pos: int, end_type: Optional[str]) -> int:
    while pos < len(tokens):
        tok = tokens[pos]
        if end_type is not None and tok.type == end_type:
            return pos + 1
        if tok.type == "inline":
            _emit_inline(builder, seq, tok.children or [])
            pos += 1
        elif tok.nesting == 1:
            base = tok.type[:-5]
            if tok.hidden:
                # tight-list paragraphs put their inline content straight into the item
                pos = _emit_blocks(builder, seq, tokens, pos + 1, base + "_close")
                continue
            path = seq.child(BLOCK_TYPES.get(base, "Paragraph"))
            if base == "heading":
                builder.value(path, "level", Literal(tok.tag[1:], XSD_INT))
            elif base in ("bullet_list", "ordered_list"):
                builder.value(path, "ordered", Literal(str(base == "ordered_list").lower(), XSD_BOOLEAN))
            inner = _Sequence(builder, path)
            pos = _emit_blocks(builder, inner, tokens, pos + 1, base + "_close")
            inner.flush()
        elif tok.type in ("fence", "code_block"):
            path = seq.child("Code")
            if tok.info.strip():
                builder.string(path, "language", tok.info.strip().split()[0])
            builder.string(path, 1, tok.content)
            pos += 1
        elif tok.type == "hr":
            seq.child("ThematicBreak")
            pos += 1
        elif tok.type == "html_block":
            builder.string(seq.child("HtmlBlock"), 1, tok.content)
            pos += 1
        else:
            pos += 1
    return pos


def _emit_document(builder: FacadeBuilder, root: Path, text: str) -> None:
    builder.add_type(root, builder.type_iri("Document"))
    seq = _Sequence(builder, root)
    _emit_blocks(builder, seq, _parser.parse(text), 0, None)
    seq.flush()


def plan(src, options, sliced: bool = False) -> SlicePlan:
    text = src.text()
    return SlicePlan(lambda b, r: _emit_document(b, r, text), iter(()))


def triplify(src, builder: FacadeBuilder) -> None:
    plan(src, builder.options).run(builder)
