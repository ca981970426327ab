"""Leave-one-out queries for out-of-sample entities."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, List, Tuple

from ..graph import KnowledgeGraph
from ..models import Direction, LabeledTriple, Neighbor, OutOfSampleGroup


class InvalidGroupError(ValueError):
    """Raised when a group cannot produce leave-one-out queries."""


class QueryDirection(str, Enum):
    TAIL = "tail"  # (v, r, ?)
    HEAD = "head"  # (?, r, v)


@dataclass(frozen=True)
class Query:
    """One held-out triple of an out-of-sample entity.

    ``filtered`` holds the other entities forming a triple of G_v with the
    same relation and direction; they are removed from the candidates.
    """

    entity: str
    direction: QueryDirection
    relation: str
    answer: str
    context: Tuple[LabeledTriple, ...]
    filtered: FrozenSet[str] = frozenset()

    @property
    def neighborhood_size(self) -> int:
        return len(self.context)


def _orient(entity: str, triple: LabeledTriple) -> Tuple[QueryDirection, str]:
    if triple.head == entity:
        return QueryDirection.TAIL, triple.tail
    if triple.tail == entity:
        return QueryDirection.HEAD, triple.head
    raise InvalidGroupError(f"Triple {tuple(triple)} does not mention {entity!r}")


def make_queries(group: OutOfSampleGroup) -> List[Query]:
    """One query per triple of the group, with the remaining triples as context."""
    entity, triples = group
    if len(triples) < 2:
        raise InvalidGroupError(
            f"Entity {entity!r} has {len(triples)} triple(s); at least 2 are required"
        )
    oriented = [_orient(entity, triple) for triple in triples]
    queries: List[Query] = []
    for i, triple in enumerate(triples):
        direction, answer = oriented[i]
        filtered = frozenset(
            other
            for j, (other_direction, other) in enumerate(oriented)
            if j != i
            and other_direction is direction
            and triples[j].rel == triple.rel
            and other != answer
        )
        queries.append(
            Query(
                entity=entity,
                direction=direction,
                relation=triple.rel,
                answer=answer,
                context=triples[:i] + triples[i + 1 :],
                filtered=filtered,
            )
        )
    return queries


def context_neighbors(query: Query, graph: KnowledgeGraph) -> List[Neighbor]:
    """The query context as neighbors over ``graph``'s handles."""
    neighbors: List[Neighbor] = []
    for triple in query.context:
        if triple.head == query.entity:
            direction, other = Direction.OUTGOING, triple.tail
        else:
            direction, other = Direction.INCOMING, triple.head
        neighbors.append(
            Neighbor(direction, graph.relations.id_of(triple.rel), graph.entities.id_of(other))
        )
    return neighbors


__all__ = [
    "InvalidGroupError",
    "Query",
    "QueryDirection",
    "context_neighbors",
    "make_queries",
]
