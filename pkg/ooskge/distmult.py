"""DistMult embedding tables, initialization and the score function."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike

from .graph import KnowledgeGraph
from .numerics import DimensionMismatchError, hadamard, triple_dot

# Named random streams; every stream is keyed by (seed, stream id, ...).
STREAM_INIT = 0
STREAM_SHUFFLE = 1
STREAM_CORRUPT = 2
STREAM_BRANCH = 3
STREAM_TIEBREAK = 4


def stream_rng(seed: int, stream: int, *keys: int) -> np.random.Generator:
    """Return a generator for one named stream, independent of all others."""
    return np.random.default_rng([seed, stream, *keys])


@dataclass
class EmbeddingModel:
    """Entity and relation tables bound to a training vocabulary."""

    entities: np.ndarray
    relations: np.ndarray
    entity_labels: Tuple[str, ...] = field(default_factory=tuple)
    relation_labels: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        self.entities = np.ascontiguousarray(self.entities, dtype=np.float64)
        self.relations = np.ascontiguousarray(self.relations, dtype=np.float64)
        if self.entities.ndim != 2 or self.relations.ndim != 2:
            raise DimensionMismatchError("Embedding tables must be 2-dimensional")
        if self.entities.shape[1] != self.relations.shape[1]:
            raise DimensionMismatchError(
                f"Entity dim {self.entities.shape[1]} != relation dim {self.relations.shape[1]}"
            )
        if self.entity_labels and len(self.entity_labels) != self.entities.shape[0]:
            raise DimensionMismatchError("Entity label count does not match table rows")
        if self.relation_labels and len(self.relation_labels) != self.relations.shape[0]:
            raise DimensionMismatchError("Relation label count does not match table rows")
        self.entity_labels = tuple(self.entity_labels)
        self.relation_labels = tuple(self.relation_labels)

    @property
    def dim(self) -> int:
        return int(self.entities.shape[1])

    @property
    def num_entities(self) -> int:
        return int(self.entities.shape[0])

    @property
    def num_relations(self) -> int:
        return int(self.relations.shape[0])

    def copy(self) -> "EmbeddingModel":
        return EmbeddingModel(
            self.entities.copy(),
            self.relations.copy(),
            self.entity_labels,
            self.relation_labels,
        )

    def is_bound_to(self, graph: KnowledgeGraph) -> bool:
        """True when the tables were built for ``graph``'s vocabularies."""
        return (
            self.entity_labels == graph.entities.labels
            and self.relation_labels == graph.relations.labels
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingModel):
            return NotImplemented
        return (
            self.entity_labels == other.entity_labels
            and self.relation_labels == other.relation_labels
            and np.array_equal(self.entities, other.entities)
            and np.array_equal(self.relations, other.relations)
        )


def init_model(
    num_entities: int,
    num_relations: int,
    dim: int,
    seed: int,
    *,
    entity_labels: Sequence[str] = (),
    relation_labels: Sequence[str] = (),
) -> EmbeddingModel:
    """Draw both tables i.i.d. uniform on [-sqrt(6/d), sqrt(6/d)]."""
    if num_entities <= 0 or num_relations <= 0 or dim <= 0:
        raise ValueError(
            f"Sizes must be positive (entities={num_entities}, "
            f"relations={num_relations}, dim={dim})"
        )
    bound = math.sqrt(6.0 / dim)
    rng = stream_rng(seed, STREAM_INIT)
    entities = rng.uniform(-bound, bound, size=(num_entities, dim))
    relations = rng.uniform(-bound, bound, size=(num_relations, dim))
    return EmbeddingModel(entities, relations, tuple(entity_labels), tuple(relation_labels))


def init_for_graph(graph: KnowledgeGraph, dim: int, seed: int) -> EmbeddingModel:
    return init_model(
        graph.num_entities,
        graph.num_relations,
        dim,
        seed,
        entity_labels=graph.entities.labels,
        relation_labels=graph.relations.labels,
    )


def lookup_entity(model: EmbeddingModel, entity: int) -> np.ndarray:
    if not 0 <= entity < model.num_entities:
        raise IndexError(f"Entity handle {entity} out of range [0, {model.num_entities})")
    return model.entities[entity]


def lookup_relation(model: EmbeddingModel, relation: int) -> np.ndarray:
    if not 0 <= relation < model.num_relations:
        raise IndexError(
            f"Relation handle {relation} out of range [0, {model.num_relations})"
        )
    return model.relations[relation]


def score(z_v: ArrayLike, z_r: ArrayLike, z_u: ArrayLike) -> float:
    """DistMult score <z_v, z_r, z_u>."""
    return triple_dot(z_v, z_r, z_u)


def score_gradients(
    z_v: ArrayLike, z_r: ArrayLike, z_u: ArrayLike
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Partial derivatives of the score w.r.t. head, relation and tail."""
    return hadamard(z_r, z_u), hadamard(z_v, z_u), hadamard(z_v, z_r)


def score_candidates(
    model: EmbeddingModel, anchor: np.ndarray, relation: int, candidates: Optional[np.ndarray] = None
) -> np.ndarray:
    """Score ``anchor`` against every candidate entity under ``relation``.

    DistMult is symmetric, so the same scores serve head and tail queries.
    """
    query = np.asarray(anchor, dtype=np.float64) * lookup_relation(model, relation)
    table = model.entities if candidates is None else model.entities[candidates]
    return table @ query


__all__ = [
    "EmbeddingModel",
    "STREAM_BRANCH",
    "STREAM_CORRUPT",
    "STREAM_INIT",
    "STREAM_SHUFFLE",
    "STREAM_TIEBREAK",
    "init_for_graph",
    "init_model",
    "lookup_entity",
    "lookup_relation",
    "score",
    "score_candidates",
    "score_gradients",
    "stream_rng",
]
