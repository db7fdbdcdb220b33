"""CSV and other character-separated files: one container per row."""

from __future__ import annotations

import csv
import logging
from typing import Iterator, List, Optional, Tuple

from ..config import decode_delimiter
from ..errors import ConfigError
from .base import Emitter, SlicePlan, fail, no_header
from .builder import FacadeBuilder, Path

log = logging.getLogger(__name__)


def _row_keys(header: Optional[List[str]], width: int) -> List:
    if header is None:
        return list(range(1, width + 1))
    keys: List = []
    seen = set()
    for j in range(width):
        name = header[j] if j < len(header) else None
        # missing, empty or repeated header names fall back to the column index
        if not name or name in seen:
            keys.append(j + 1)
        else:
            keys.append(name)
            seen.add(name)
    return keys


def plan(src, builder_options, sliced: bool = False, default_delimiter: str = ",") -> SlicePlan:
    delimiter = decode_delimiter(builder_options.get_option("csv.delimiter") or default_delimiter)
    if len(delimiter) != 1:
        raise ConfigError(f"csv.delimiter must be a single character, got {delimiter!r}")
    headers = builder_options.flag("csv.headers")

    def units() -> Iterator[Tuple[int, Emitter]]:
        stream = src.text_stream()
        try:
            reader = csv.reader(stream, delimiter=delimiter)
            header = None
            index = 0
            try:
                for row in reader:
                    if not row:
                        continue
                    if headers and header is None:
                        header = row
                        continue
                    index += 1
                    if header is not None and len(row) != len(header):
                        log.warning("%s: row %d has %d cells, header has %d", src.origin.describe(), index,
                                    len(row), len(header))
                    yield index, _row_emitter(index, row, _row_keys(header, len(row)))
            except (csv.Error, UnicodeDecodeError) as exc:
                raise fail(src, f"malformed CSV near record {index + 1}: {exc}", exc)
        finally:
            stream.close()

    return SlicePlan(no_header, units())


def _row_emitter(index: int, row: List[str], keys: List) -> Emitter:
    def emit(builder: FacadeBuilder, root: Path) -> None:
        path = builder.container(root, index)
        for key, cell in zip(keys, row):
            builder.string(path, key, cell)

    return emit


def triplify(src, builder: FacadeBuilder) -> None:
    plan(src, builder.options).run(builder)


def triplify_tsv(src, builder: FacadeBuilder) -> None:
    plan(src, builder.options, default_delimiter="\t").run(builder)
