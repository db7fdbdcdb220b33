"""Format-specific triplifiers and the media-type registry that dispatches to them."""

from __future__ import annotations

from functools import partial
from typing import Callable, Dict, Iterator, Optional

from ..config import FacadeOptions, split_media_type
from ..errors import ConfigError
from ..rdf.graph import Graph
from ..rdf.terms import Triple
from . import bibtex, binary, filesystem, htmldoc, jsondoc, markdown, tabular, text, xmldoc, yamldoc
from .base import SlicePlan
from .builder import FacadeBuilder, encode_key

Planner = Callable[..., SlicePlan]

REGISTRY: Dict[str, Planner] = {
    "text/csv": tabular.plan,
    "text/tab-separated-values": partial(tabular.plan, default_delimiter="\t"),
    "application/json": jsondoc.plan,
    "application/xml": xmldoc.plan,
    "text/xml": xmldoc.plan,
    "text/html": htmldoc.plan,
    "application/xhtml+xml": htmldoc.plan,
    "text/yaml": yamldoc.plan,
    "application/yaml": yamldoc.plan,
    "application/x-yaml": yamldoc.plan,
    "text/x-yaml": yamldoc.plan,
    "text/markdown": markdown.plan,
    "text/x-markdown": markdown.plan,
    "application/x-bibtex": bibtex.plan,
    "text/x-bibtex": bibtex.plan,
    "text/plain": text.plan,
    "application/zip": filesystem.plan_archive,
    "application/x-zip-compressed": filesystem.plan_archive,
    "application/x-tar": filesystem.plan_archive,
    "application/x-gtar": filesystem.plan_archive,
    "application/gzip": filesystem.plan_archive,
    "inode/directory": filesystem.plan_directory,
    "application/octet-stream": binary.plan,
}
# slicing partitions rows, top-level array items or document-element children
SLICEABLE = {"text/csv", "text/tab-separated-values", "application/json", "application/xml", "text/xml"}


def effective_type(media_type: str) -> str:
    base = split_media_type(media_type)[0]
    if base in REGISTRY:
        return base
    if base.endswith("+json"):
        return "application/json"
    if base.endswith("+xml"):
        return "application/xml"
    return "application/octet-stream"


def planner_for(media_type: str) -> Planner:
    return REGISTRY[effective_type(media_type)]


def triplify(src, options=None, triple_filter: Optional[Callable[[Triple], bool]] = None) -> Graph:
    """The whole façade graph of ``src``."""
    opts = FacadeOptions(options)
    builder = FacadeBuilder(opts, src.identity, triple_filter)
    planner_for(src.media_type)(src, opts).run(builder)
    return builder.graph


def slice_graphs(src, options=None, triple_filter: Optional[Callable[[Triple], bool]] = None) -> Iterator[Graph]:
    """One graph per unit: the root (with its own header triples) plus the unit's subtree at ``rdf:_k``."""
    opts = FacadeOptions(options)
    kind = effective_type(src.media_type)
    if kind not in SLICEABLE:
        raise ConfigError(f"slicing is not supported for {src.media_type}; only CSV, JSON and XML can be sliced")
    plan = REGISTRY[kind](src, opts, sliced=True)
    for _, emit in plan.units:
        builder = FacadeBuilder(opts, src.identity, triple_filter)
        root = builder.root()
        plan.header(builder, root)
        emit(builder, root)
        yield builder.graph


__all__ = ["REGISTRY", "SLICEABLE", "FacadeBuilder", "SlicePlan", "triplify", "slice_graphs", "planner_for",
           "effective_type", "encode_key"]
