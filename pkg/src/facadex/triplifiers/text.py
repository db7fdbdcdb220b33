"""Plain text, optionally tokenized by a delimiter or a regular expression."""

from __future__ import annotations

import re

from ..errors import ConfigError
from .base import SlicePlan
from .builder import FacadeBuilder, Path


def _emit(builder: FacadeBuilder, root: Path, text: str) -> None:
    opts = builder.options
    split = opts.get_option("txt.split")
    pattern = opts.get_option("txt.regex")
    if split is not None and pattern is not None:
        raise ConfigError("txt.split and txt.regex are mutually exclusive")
    if pattern is not None:
        try:
            regex = re.compile(pattern)
        except re.error as exc:
            raise ConfigError(f"invalid txt.regex {pattern!r}: {exc}") from exc
        for i, m in enumerate(regex.finditer(text), 1):
            if regex.groups:
                path = builder.container(root, i)
                for j, group in enumerate(m.groups(), 1):
                    if group is not None:
                        builder.string(path, j, group)
            else:
                builder.string(root, i, m.group())
    elif split is not None:
        if split == "":
            raise ConfigError("txt.split must not be empty")
        for i, token in enumerate(text.split(split), 1):
            builder.string(root, i, token)
    else:
        builder.string(root, 1, text)


def plan(src, options, sliced: bool = False) -> SlicePlan:
    text = src.text()
    return SlicePlan(lambda b, r: _emit(b, r, text), iter(()))


def triplify(src, builder: FacadeBuilder) -> None:
    plan(src, builder.options).run(builder)
