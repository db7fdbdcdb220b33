"""Opaque bytes embedded as one base64 literal."""

from __future__ import annotations

import base64

from ..rdf.terms import Literal
from ..rdf.vocab import XSD_BASE64
from .base import SlicePlan
from .builder import FacadeBuilder


def plan(src, options, sliced: bool = False) -> SlicePlan:
    data = src.read()
    encoded = base64.b64encode(data).decode("ascii")
    return SlicePlan(lambda b, r: b.value(r, 1, Literal(encoded, XSD_BASE64)), iter(()))


def triplify(src, builder: FacadeBuilder) -> None:
    plan(src, builder.options).run(builder)
