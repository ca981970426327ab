"""Core data models shared across ooskge components."""

from __future__ import annotations

from enum import Enum
from typing import NamedTuple, Tuple


class Direction(str, Enum):
    """Side of a triple an entity sits on, seen from that entity."""

    OUTGOING = "outgoing"
    INCOMING = "incoming"


class Triple(NamedTuple):
    """A (head, relation, tail) fact over interned handles."""

    head: int
    rel: int
    tail: int


class LabeledTriple(NamedTuple):
    """A triple expressed with its original string labels."""

    head: str
    rel: str
    tail: str


class Neighbor(NamedTuple):
    """One adjacency entry of an entity: how it relates to another entity."""

    direction: Direction
    relation: int
    entity: int


class AdjacencyEntry(NamedTuple):
    """Neighbor plus the index of the triple it was derived from."""

    direction: Direction
    relation: int
    entity: int
    triple_index: int

    def as_neighbor(self) -> Neighbor:
        return Neighbor(self.direction, self.relation, self.entity)


class OutOfSampleGroup(NamedTuple):
    """An out-of-sample entity and its triples G_v, by label."""

    entity: str
    triples: Tuple[LabeledTriple, ...]


__all__ = [
    "AdjacencyEntry",
    "Direction",
    "LabeledTriple",
    "Neighbor",
    "OutOfSampleGroup",
    "Triple",
]
