"""BibTeX: each entry is a container typed by its entry type."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import List, Tuple

from .base import SlicePlan, fail
from .builder import FacadeBuilder, Path

_IGNORED = {"comment", "preamble", "string"}
_NAME = re.compile(r"[^\s=,{}\"#()]+")
_WS = re.compile(r"\s+")


@dataclass
class Entry:
    type: str
    key: str
    fields: List[Tuple[str, str]] = field(default_factory=list)


class BibtexSyntaxError(ValueError):
    pass


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        m = _WS.match(self.text, self.pos)
        if m:
            self.pos = m.end()

    def peek(self) -> str:
        return self.text[self.pos:self.pos + 1]

    def expect(self, ch: str, context: str) -> None:
        self.skip_ws()
        if self.peek() != ch:
            raise BibtexSyntaxError(f"expected {ch!r} at offset {self.pos} ({context})")
        self.pos += 1

    def name(self, context: str) -> str:
        self.skip_ws()
        m = _NAME.match(self.text, self.pos)
        if not m:
            raise BibtexSyntaxError(f"expected a name at offset {self.pos} ({context})")
        self.pos = m.end()
        return m.group()

    def braced(self, context: str) -> str:
        # self.pos is on the opening brace
        depth, start = 0, self.pos
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "\\":
                self.pos += 2
                continue
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    self.pos += 1
                    return self.text[start + 1:self.pos - 1]
            self.pos += 1
        raise BibtexSyntaxError(f"unbalanced braces ({context})")

    def quoted(self, context: str) -> str:
        start = self.pos = self.pos + 1
        depth = 0
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "\\":
                self.pos += 2
                continue
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
            elif ch == '"' and depth == 0:
                self.pos += 1
                return self.text[start:self.pos - 1]
            self.pos += 1
        raise BibtexSyntaxError(f"unterminated quoted value ({context})")

    def value(self, context: str) -> str:
        self.skip_ws()
        ch = self.peek()
        if ch == "{":
            raw = self.braced(context)
        elif ch == '"':
            raw = self.quoted(context)
        else:
            raw = self.name(context)
        return _WS.sub(" ", raw).strip()

    def skip_block(self, context: str) -> None:
        self.skip_ws()
        opener = self.peek()
        if opener == "{":
            self.braced(context)
        elif opener == "(":
            close = self.text.find(")", self.pos)
            if close < 0:
                raise BibtexSyntaxError(f"unbalanced parentheses ({context})")
            self.pos = close + 1
        else:
            raise BibtexSyntaxError(f"expected '{{' at offset {self.pos} ({context})")


def parse_bibtex(text: str) -> List[Entry]:
    r = _Reader(text)
    entries: List[Entry] = []
    while True:
        at = text.find("@", r.pos)
        if at < 0:
            return entries
        r.pos = at + 1
        kind = r.name("entry type").lower()
        if kind in _IGNORED:
            r.skip_block(f"@{kind}")
            continue
        r.skip_ws()
        closer = {"{": "}", "(": ")"}.get(r.peek())
        if closer is None:
            raise BibtexSyntaxError(f"expected '{{' after @{kind} at offset {r.pos}")
        r.pos += 1
        key = r.name(f"citation key of @{kind}")
        entry = Entry(kind, key)
        context = f"entry {key}"
        while True:
            r.skip_ws()
            ch = r.peek()
            if ch == closer:
                r.pos += 1
                break
            if ch == "":
                raise BibtexSyntaxError(f"unbalanced braces ({context})")
            if ch == ",":
                r.pos += 1
                continue
            fname = r.name(context).lower()
            r.expect("=", context)
            entry.fields.append((fname, r.value(context)))
        entries.append(entry)


def _emit(builder: FacadeBuilder, root: Path, entries: List[Entry]) -> None:
    for i, entry in enumerate(entries, 1):
        path = builder.container(root, i)
        builder.add_type(path, builder.type_iri(entry.type))
        builder.string(path, "citationKey", entry.key)
        seen = set()
        for name, value in entry.fields:
            if name not in seen:
                seen.add(name)
                builder.string(path, name, value)


def plan(src, options, sliced: bool = False) -> SlicePlan:
    try:
        entries = parse_bibtex(src.text())
    except BibtexSyntaxError as exc:
        raise fail(src, f"malformed BibTeX: {exc}", exc)
    return SlicePlan(lambda b, r: _emit(b, r, entries), iter(()))


def triplify(src, builder: FacadeBuilder) -> None:
    plan(src, builder.options).run(builder)
