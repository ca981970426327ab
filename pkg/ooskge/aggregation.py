"""Embeddings for out-of-sample entities computed from their neighborhoods."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from .distmult import EmbeddingModel
from .models import Neighbor
from .numerics import ridge_solve


class EmptyNeighborhoodError(ValueError):
    """Raised when an entity has no neighbors to aggregate over."""


class AggregatorKind(str, Enum):
    ERAVG = "eravg"
    LS = "ls"
    LS_U = "ls-u"
    EAVG = "eavg"

    @property
    def is_least_squares(self) -> bool:
        return self in (AggregatorKind.LS, AggregatorKind.LS_U)

    @property
    def differentiable(self) -> bool:
        """Whether training backpropagates into the neighbor rows."""
        return not self.is_least_squares


@dataclass(frozen=True)
class Aggregator:
    """An aggregation function plus the ridge regularizer of the LS variants."""

    kind: AggregatorKind = AggregatorKind.ERAVG
    agg_lambda: float = 0.01

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", AggregatorKind(self.kind))
        if self.agg_lambda < 0:
            raise ValueError(f"agg_lambda must be non-negative, got {self.agg_lambda}")


def _gather(
    neighbors: Sequence[Neighbor], model: EmbeddingModel
) -> Tuple[np.ndarray, np.ndarray]:
    if not neighbors:
        raise EmptyNeighborhoodError("Cannot aggregate over an empty neighborhood")
    relations = np.fromiter((n.relation for n in neighbors), dtype=np.int64, count=len(neighbors))
    entities = np.fromiter((n.entity for n in neighbors), dtype=np.int64, count=len(neighbors))
    if relations.min() < 0 or relations.max() >= model.num_relations:
        raise IndexError("Neighbor relation handle out of range")
    if entities.min() < 0 or entities.max() >= model.num_entities:
        raise IndexError("Neighbor entity handle out of range")
    return relations, entities


def design_matrix(neighbors: Sequence[Neighbor], model: EmbeddingModel) -> np.ndarray:
    """Rows z_r ⊙ z_u, one per neighbor; direction does not matter."""
    relations, entities = _gather(neighbors, model)
    return model.relations[relations] * model.entities[entities]


def aggregate(
    aggregator: Aggregator, neighbors: Sequence[Neighbor], model: EmbeddingModel
) -> np.ndarray:
    kind = aggregator.kind
    if kind is AggregatorKind.EAVG:
        _, entities = _gather(neighbors, model)
        return model.entities[entities].mean(axis=0)

    rows = design_matrix(neighbors, model)
    if kind is AggregatorKind.ERAVG:
        return rows.mean(axis=0)
    if kind is AggregatorKind.LS:
        target = np.linalg.norm(rows, axis=1)
    else:
        target = np.ones(rows.shape[0])
    return ridge_solve(rows, target, aggregator.agg_lambda)


def aggregate_backward(
    aggregator: Aggregator,
    neighbors: Sequence[Neighbor],
    model: EmbeddingModel,
    upstream: np.ndarray,
) -> Optional[Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    """Gradients of the aggregated vector w.r.t. the rows it read.

    Returns (entity handles, entity grads, relation handles, relation grads)
    given the loss gradient ``upstream`` w.r.t. the aggregated vector, or None
    for the least-squares kinds whose output is treated as a constant.
    """
    if not aggregator.kind.differentiable:
        return None
    relations, entities = _gather(neighbors, model)
    scale = 1.0 / len(neighbors)
    if aggregator.kind is AggregatorKind.EAVG:
        entity_grads = np.broadcast_to(upstream * scale, (len(neighbors), upstream.shape[0]))
        return entities, entity_grads, relations[:0], np.empty((0, upstream.shape[0]))
    entity_grads = upstream * scale * model.relations[relations]
    relation_grads = upstream * scale * model.entities[entities]
    return entities, entity_grads, relations, relation_grads


def oov_embedding(model: EmbeddingModel) -> np.ndarray:
    """Mean of all in-sample entity embeddings."""
    return model.entities.mean(axis=0)


__all__ = [
    "Aggregator",
    "AggregatorKind",
    "EmptyNeighborhoodError",
    "aggregate",
    "aggregate_backward",
    "design_matrix",
    "oov_embedding",
]
