"""YAML: same shape as JSON; explicit custom tags type the tagged node."""

from __future__ import annotations

import datetime
from typing import Any

import yaml

from ..rdf.terms import IRI, Literal
from ..rdf.vocab import XSD_FLOAT
from .base import SlicePlan, fail
from .builder import FacadeBuilder, Path
from .jsondoc import scalar_literal


class Tagged:
    __slots__ = ("tag", "value")

    def __init__(self, tag: str, value: Any):
        self.tag = tag
        self.value = value


class _Loader(yaml.SafeLoader):
    pass


# timestamps stay plain strings, as they would in the equivalent JSON
_Loader.yaml_implicit_resolvers = {
    k: [(tag, rx) for tag, rx in v if tag != "tag:yaml.org,2002:timestamp"]
    for k, v in yaml.SafeLoader.yaml_implicit_resolvers.items()
}


def _construct_tagged(loader: yaml.SafeLoader, suffix: str, node: yaml.Node) -> Tagged:
    if isinstance(node, yaml.MappingNode):
        value = loader.construct_mapping(node, deep=True)
    elif isinstance(node, yaml.SequenceNode):
        value = loader.construct_sequence(node, deep=True)
    else:
        value = loader.construct_scalar(node)
    return Tagged(node.tag, value)


_Loader.add_multi_constructor("!", _construct_tagged)
_Loader.add_multi_constructor("tag:", _construct_tagged)


def _tag_iri(builder: FacadeBuilder, tag: str) -> IRI:
    if tag.startswith("!"):
        return builder.type_iri(tag.lstrip("!"))
    return IRI(tag)


def _key(k: Any) -> str:
    if isinstance(k, bool):
        return "true" if k else "false"
    if isinstance(k, Tagged):
        return str(k.value)
    return str(k)


def _literal(value: Any) -> Literal:
    if isinstance(value, float):
        text = {float("inf"): "INF", float("-inf"): "-INF"}.get(value)
        if text is None:
            text = "NaN" if value != value else repr(value)
        return Literal(text, XSD_FLOAT)
    if isinstance(value, (datetime.date, bytes)):
        return Literal(str(value))
    return scalar_literal(value)


def emit_value(builder: FacadeBuilder, parent: Path, key, value: Any) -> None:
    tag = None
    if isinstance(value, Tagged):
        tag, value = _tag_iri(builder, value.tag), value.value
    if value is None:
        return
    if isinstance(value, (dict, list)):
        path = builder.container(parent, key)
        if tag is not None:
            builder.add_type(path, tag)
        emit_members(builder, path, value)
    elif tag is not None:
        # a tagged scalar keeps its lexical form under the tag as datatype
        builder.value(parent, key, Literal(str(value), tag.value))
    else:
        builder.value(parent, key, _literal(value))


def emit_members(builder: FacadeBuilder, path: Path, value: Any) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            emit_value(builder, path, _key(k), v)
    else:
        for i, item in enumerate((x for x in value if x is not None), 1):
            emit_value(builder, path, i, item)


def _emit_document(builder: FacadeBuilder, root: Path, doc: Any) -> None:
    if isinstance(doc, Tagged) and isinstance(doc.value, (dict, list)):
        builder.add_type(root, _tag_iri(builder, doc.tag))
        doc = doc.value
    if isinstance(doc, (dict, list)):
        emit_members(builder, root, doc)
    else:
        emit_value(builder, root, 1, doc)


def load(src) -> Any:
    try:
        return yaml.load(src.text(), Loader=_Loader)
    except yaml.YAMLError as exc:
        raise fail(src, f"malformed YAML: {exc}", exc)


def plan(src, options, sliced: bool = False) -> SlicePlan:
    doc = load(src)
    return SlicePlan(lambda b, r: _emit_document(b, r, doc), iter(()))


def triplify(src, builder: FacadeBuilder) -> None:
    plan(src, builder.options).run(builder)
