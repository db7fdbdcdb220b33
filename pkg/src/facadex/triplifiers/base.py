from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Tuple

from ..errors import TriplifierError
from .builder import FacadeBuilder, Path

Emitter = Callable[[FacadeBuilder, Path], None]


@dataclass
class SlicePlan:
    """A source split into independently triplifiable units.

    ``header`` emits whatever the root carries besides its children (type,
    attributes); ``units`` yields ``(index, emitter)`` pairs where the emitter
    writes the subtree found at ``rdf:_index`` of the root.
    """

    header: Emitter
    units: Iterator[Tuple[int, Emitter]]

    def run(self, builder: FacadeBuilder) -> None:
        root = builder.root()
        self.header(builder, root)
        for _, emit in self.units:
            emit(builder, root)


def no_header(builder: FacadeBuilder, root: Path) -> None:
    pass


def fail(src, message: str, cause: Exception = None) -> TriplifierError:
    err = TriplifierError(f"{src.origin.describe()}: {message}")
    if cause is not None:
        err.__cause__ = cause
    return err
