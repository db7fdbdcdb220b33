"""Façade options: the ``x-sparql-anything:`` IRI scheme, inline ``fx:properties``
configuration, option merging and media-type guessing."""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass, field
from typing import Dict, Iterator, Mapping, Optional, Tuple
from urllib.parse import urlsplit

from .errors import ConfigError, ConflictingSourceError, UnsupportedFeatureError
from .rdf.vocab import FX, FX_PROPERTIES, SCHEME

log = logging.getLogger(__name__)

SOURCE_KEYS = ("location", "content", "command")

KNOWN_OPTIONS = {
    "media-type", "charset", "namespace", "blank-nodes", "trim-strings", "null-string",
    "strategy", "slice", "csv.headers", "csv.delimiter", "json.path", "xml.path",
    "html.selector", "txt.regex", "txt.split", "http.method", "http.auth.user",
    "http.auth.password", "metadata", "ondisk", *SOURCE_KEYS,
}
KNOWN_PREFIXES = ("http.header.", "http.query.")
BOOLEAN_OPTIONS = ("blank-nodes", "trim-strings", "slice", "csv.headers", "metadata")

DEFAULTS = {
    "csv.headers": "false",
    "blank-nodes": "true",
    "trim-strings": "false",
    "strategy": "1",
    "slice": "false",
}

_KEY = re.compile(r"^[A-Za-z][A-Za-z0-9._\-]*$")
_ESCAPE = re.compile(r"%(2[Cc]|3[Dd])")


def normalize_key(key: str) -> str:
    """Lower-case an option name; header and query-parameter names keep their case."""
    lowered = key.lower()
    if lowered.startswith("http.query.param."):
        return "http.query." + key[len("http.query.param."):]
    for prefix in KNOWN_PREFIXES:
        if lowered.startswith(prefix):
            return prefix + key[len(prefix):]
    return lowered


class FacadeOptions(Mapping[str, str]):
    """Immutable, insertion-ordered option map with normalized names."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Optional[Mapping[str, str]] = None, **kwargs: str):
        merged: Dict[str, str] = {}
        for source in (entries or {}, kwargs):
            for k, v in source.items():
                merged[normalize_key(k)] = str(v)
        self._entries = merged

    def __getitem__(self, key: str) -> str:
        return self._entries[normalize_key(key)]

    def __contains__(self, key) -> bool:
        return isinstance(key, str) and normalize_key(key) in self._entries

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"FacadeOptions({self._entries!r})"

    def __eq__(self, other) -> bool:
        if isinstance(other, Mapping):
            return dict(self.items()) == dict(other.items())
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._entries.items()))

    def get_option(self, key: str) -> Optional[str]:
        key = normalize_key(key)
        return self._entries.get(key, DEFAULTS.get(key))

    def flag(self, key: str) -> bool:
        value = self.get_option(key)
        if value is None:
            return False
        if value not in ("true", "false"):
            raise ConfigError(f"option {key} must be 'true' or 'false', got {value!r}")
        return value == "true"

    def with_options(self, updates: Mapping[str, str]) -> "FacadeOptions":
        entries = dict(self._entries)
        for k, v in updates.items():
            entries[normalize_key(k)] = v
        return FacadeOptions(entries)

    def without(self, *keys: str) -> "FacadeOptions":
        drop = {normalize_key(k) for k in keys}
        return FacadeOptions({k: v for k, v in self._entries.items() if k not in drop})

    def prefixed(self, prefix: str) -> Dict[str, str]:
        return {k[len(prefix):]: v for k, v in self._entries.items() if k.startswith(prefix)}

    def source(self) -> Optional["SourceSpec"]:
        present = [k for k in SOURCE_KEYS if k in self._entries]
        if len(present) > 1:
            raise ConflictingSourceError(f"conflicting sources: {', '.join(present)}")
        if not present:
            return None
        return SourceSpec(present[0], self._entries[present[0]])

    def validate(self) -> None:
        """Check values of recognized options; warn about unknown names."""
        for key, value in self._entries.items():
            if key not in KNOWN_OPTIONS and not key.startswith(KNOWN_PREFIXES):
                log.warning("unknown option %r (kept, ignored)", key)
            if key in BOOLEAN_OPTIONS and value not in ("true", "false"):
                raise ConfigError(f"option {key} must be 'true' or 'false', got {value!r}")
        if self._entries.get("strategy", "1") not in ("0", "1"):
            raise ConfigError(f"option strategy must be '0' or '1', got {self._entries['strategy']!r}")
        if "ondisk" in self._entries:
            raise UnsupportedFeatureError("the on-disk strategy is not supported; use slice=true instead")
        if self._entries.get("metadata") == "true":
            raise UnsupportedFeatureError("metadata extraction is not supported")
        delim = self._entries.get("csv.delimiter")
        if delim is not None and len(decode_delimiter(delim)) != 1:
            raise ConfigError(f"csv.delimiter must be a single character, got {delim!r}")
        self.source()


def decode_delimiter(value: str) -> str:
    return {"\\t": "\t", "tab": "\t", "TAB": "\t"}.get(value, value)


@dataclass(frozen=True)
class SourceSpec:
    """Exactly one of location / content / command."""

    kind: str
    value: str

    def __post_init__(self):
        if self.kind not in SOURCE_KEYS:
            raise ValueError(f"unknown source kind {self.kind!r}")

    @property
    def location(self) -> Optional[str]:
        return self.value if self.kind == "location" else None

    @property
    def content(self) -> Optional[str]:
        return self.value if self.kind == "content" else None

    @property
    def command(self) -> Optional[str]:
        return self.value if self.kind == "command" else None

    def describe(self) -> str:
        return f"{self.kind}={self.value}"


def _decode(value: str) -> str:
    return _ESCAPE.sub(lambda m: "," if m.group(1).upper() == "2C" else "=", value)


def encode_value(value: str) -> str:
    return value.replace(",", "%2C").replace("=", "%3D")


def parse_service_iri(iri: str) -> Tuple[FacadeOptions, Optional[SourceSpec]]:
    """Split ``x-sparql-anything:k=v,k=v,...`` into options and a source."""
    if not iri.startswith(SCHEME):
        raise ConfigError(f"not an {SCHEME} IRI: {iri}")
    rest = iri[len(SCHEME):]
    entries: Dict[str, str] = {}
    sources: Dict[str, str] = {}
    if rest:
        for segment in rest.split(","):
            key, eq, value = segment.partition("=")
            if not eq or not _KEY.match(key):
                # a bare resource locator
                key, value = "location", segment
            key = normalize_key(key)
            value = _decode(value)
            if key in SOURCE_KEYS:
                sources[key] = value
            else:
                entries[key] = value
    if len(sources) > 1:
        raise ConflictingSourceError(f"conflicting sources in {iri}: {', '.join(sources)}")
    spec = SourceSpec(*next(iter(sources.items()))) if sources else None
    return FacadeOptions(entries), spec


def build_service_iri(options: Mapping[str, str], source: Optional[SourceSpec] = None) -> str:
    parts = [f"{k}={encode_value(v)}" for k, v in options.items()]
    if source is not None:
        parts.append(f"{source.kind}={encode_value(source.value)}")
    return SCHEME + ",".join(parts)


def merge_options(from_iri: Mapping[str, str], inline: Mapping[str, str]) -> FacadeOptions:
    """Union of both maps; inline values win on conflict."""
    merged = dict(FacadeOptions(from_iri).items())
    merged.update(FacadeOptions(inline).items())
    result = FacadeOptions(merged)
    result.source()  # raises on conflicting source kinds
    return result


@dataclass
class InlineConfig:
    fixed: FacadeOptions
    variable_bound: Dict[str, str] = field(default_factory=dict)
    residual: object = None


def extract_inline_properties(pattern) -> InlineConfig:
    """Remove ``fx:properties`` triples from the top level of a SERVICE pattern."""
    from .sparql.algebra import BGP, Group, Var
    from .rdf.terms import IRI

    fixed: Dict[str, str] = {}
    bound: Dict[str, str] = {}

    def take(bgp: BGP) -> BGP:
        kept = []
        for tp in bgp.triples:
            if not (isinstance(tp.s, IRI) and tp.s.value == FX_PROPERTIES):
                kept.append(tp)
                continue
            if not isinstance(tp.p, IRI) or not tp.p.value.startswith(FX):
                raise ConfigError(f"fx:properties predicate outside the fx: namespace: {tp.p}")
            name = normalize_key(tp.p.value[len(FX):])
            if isinstance(tp.o, Var):
                fixed.pop(name, None)
                bound[name] = tp.o.name
            else:
                bound.pop(name, None)
                fixed[name] = tp.o.value if isinstance(tp.o, IRI) else str(tp.o)
        return BGP(kept)

    if isinstance(pattern, BGP):
        residual = take(pattern)
    elif isinstance(pattern, Group):
        residual = Group([take(op) if isinstance(op, BGP) else op for op in pattern.operands],
                         list(pattern.filters))
    else:
        residual = pattern
    return InlineConfig(FacadeOptions(fixed), bound, residual)


MEDIA_TYPES = {
    ".csv": "text/csv",
    ".tsv": "text/tab-separated-values",
    ".json": "application/json",
    ".xml": "application/xml",
    ".html": "text/html",
    ".htm": "text/html",
    ".yaml": "text/yaml",
    ".yml": "text/yaml",
    ".md": "text/markdown",
    ".markdown": "text/markdown",
    ".bib": "application/x-bibtex",
    ".txt": "text/plain",
    ".zip": "application/zip",
    ".tar": "application/x-tar",
    ".tgz": "application/x-tar",
    ".tar.gz": "application/x-tar",
}
DIRECTORY = "inode/directory"
BINARY = "application/octet-stream"


def split_media_type(value: str) -> Tuple[str, Dict[str, str]]:
    """``"application/json; charset=UTF-8"`` -> ``("application/json", {"charset": "UTF-8"})``."""
    main, *params = value.split(";")
    parsed = {}
    for p in params:
        k, _, v = p.partition("=")
        if k.strip():
            parsed[k.strip().lower()] = v.strip().strip('"')
    return main.strip().lower(), parsed


def extension_media_type(location: str) -> Optional[str]:
    path = urlsplit(location).path if "://" in location else location
    lower = path.lower()
    for ext in sorted(MEDIA_TYPES, key=len, reverse=True):
        if lower.endswith(ext):
            return MEDIA_TYPES[ext]
    return None


def guess_media_type(spec: Optional[SourceSpec], opts: Mapping[str, str]) -> str:
    explicit = FacadeOptions(opts).get("media-type")
    if explicit:
        return split_media_type(explicit)[0]
    if spec is None or spec.kind != "location":
        return BINARY
    loc = spec.value
    if loc.endswith("/"):
        return DIRECTORY
    local = loc[len("file://"):] if loc.startswith("file://") else loc
    if "://" not in local and os.path.isdir(local):
        return DIRECTORY
    return extension_media_type(loc) or BINARY
