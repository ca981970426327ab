"""Regularized negative log-likelihood and its gradients for one batch.

The loss of a batch is sum softplus(-l * phi) over its labeled triples plus
reg_lambda * ||theta||^2 over the embedding rows looked up in the batch,
each row counted once. Rows reached only through aggregation are not
regularized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from scipy.special import expit

from ..aggregation import Aggregator, aggregate, aggregate_backward
from ..distmult import EmbeddingModel
from ..models import Neighbor
from .batches import LabeledBatch

LOOKUP_BOTH = 0
AGGREGATE_HEAD = 1
AGGREGATE_TAIL = 2


def softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def batch_loss(
    scores: Sequence[float] | np.ndarray,
    labels: Sequence[float] | np.ndarray,
    reg_lambda: float,
    touched_rows: Iterable[np.ndarray] = (),
) -> float:
    """Sum of softplus(-l * score) plus reg_lambda times the squared row norms."""
    score_array = np.asarray(scores, dtype=np.float64)
    label_array = np.asarray(labels, dtype=np.float64)
    if score_array.shape != label_array.shape:
        raise ValueError("scores and labels must have the same length")
    data_term = float(np.sum(softplus(-label_array * score_array)))
    reg_term = sum(float(np.sum(np.square(row))) for row in touched_rows)
    return data_term + reg_lambda * reg_term


@dataclass
class BatchPlan:
    """A labeled batch with the branch taken for every triple.

    ``neighbors[i]`` holds the neighborhood aggregated for triple ``i`` when
    ``modes[i]`` is AGGREGATE_HEAD or AGGREGATE_TAIL.
    """

    batch: LabeledBatch
    modes: np.ndarray
    neighbors: Dict[int, List[Neighbor]] = field(default_factory=dict)

    @classmethod
    def lookup_only(cls, batch: LabeledBatch) -> "BatchPlan":
        return cls(batch, np.zeros(len(batch), dtype=np.int8))


@dataclass
class BatchGradients:
    """Loss of a batch and the summed gradient of every touched row."""

    loss: float
    scores: np.ndarray
    entity_rows: np.ndarray
    entity_grads: np.ndarray
    relation_rows: np.ndarray
    relation_grads: np.ndarray


def batch_gradients(
    model: EmbeddingModel,
    plan: BatchPlan,
    reg_lambda: float,
    aggregator: Aggregator,
) -> BatchGradients:
    batch = plan.batch
    heads, rels, tails, labels = batch.heads, batch.rels, batch.tails, batch.labels
    modes = plan.modes

    z_head = model.entities[heads]
    z_rel = model.relations[rels]
    z_tail = model.entities[tails]
    aggregated = np.flatnonzero(modes != LOOKUP_BOTH)
    for i in aggregated:
        vector = aggregate(aggregator, plan.neighbors[int(i)], model)
        if modes[i] == AGGREGATE_HEAD:
            z_head[i] = vector
        else:
            z_tail[i] = vector

    scores = np.einsum("ij,ij,ij->i", z_head, z_rel, z_tail)
    margins = -labels * scores
    data_loss = float(np.sum(softplus(margins)))
    coeff = (-labels * expit(margins))[:, None]
    grad_head = coeff * (z_rel * z_tail)
    grad_rel = coeff * (z_head * z_tail)
    grad_tail = coeff * (z_head * z_rel)

    head_lookup = modes != AGGREGATE_HEAD
    tail_lookup = modes != AGGREGATE_TAIL
    entity_parts: List[Tuple[np.ndarray, np.ndarray]] = [
        (heads[head_lookup], grad_head[head_lookup]),
        (tails[tail_lookup], grad_tail[tail_lookup]),
    ]
    relation_parts: List[Tuple[np.ndarray, np.ndarray]] = [(rels, grad_rel)]

    for i in aggregated:
        upstream = grad_head[i] if modes[i] == AGGREGATE_HEAD else grad_tail[i]
        backward = aggregate_backward(aggregator, plan.neighbors[int(i)], model, upstream)
        if backward is None:
            continue
        ent_rows, ent_grads, rel_rows, rel_grads = backward
        entity_parts.append((ent_rows, ent_grads))
        relation_parts.append((rel_rows, rel_grads))

    looked_up_entities = np.unique(np.concatenate([heads[head_lookup], tails[tail_lookup]]))
    looked_up_relations = np.unique(rels)
    reg_loss = reg_lambda * (
        float(np.sum(np.square(model.entities[looked_up_entities])))
        + float(np.sum(np.square(model.relations[looked_up_relations])))
    )
    if reg_lambda:
        entity_parts.append(
            (looked_up_entities, 2.0 * reg_lambda * model.entities[looked_up_entities])
        )
        relation_parts.append(
            (looked_up_relations, 2.0 * reg_lambda * model.relations[looked_up_relations])
        )

    entity_rows, entity_grads = _combine(entity_parts, model.dim)
    relation_rows, relation_grads = _combine(relation_parts, model.dim)
    return BatchGradients(
        loss=data_loss + reg_loss,
        scores=scores,
        entity_rows=entity_rows,
        entity_grads=entity_grads,
        relation_rows=relation_rows,
        relation_grads=relation_grads,
    )


def _combine(
    parts: Sequence[Tuple[np.ndarray, np.ndarray]], dim: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Sum gradient contributions per row; rows come back sorted and unique."""
    rows = np.concatenate([np.asarray(r, dtype=np.int64) for r, _ in parts])
    if rows.size == 0:
        return rows, np.empty((0, dim))
    grads = np.concatenate([np.asarray(g, dtype=np.float64).reshape(-1, dim) for _, g in parts])
    unique, inverse = np.unique(rows, return_inverse=True)
    summed = np.zeros((unique.shape[0], dim))
    np.add.at(summed, inverse, grads)
    return unique, summed


__all__ = [
    "AGGREGATE_HEAD",
    "AGGREGATE_TAIL",
    "BatchGradients",
    "BatchPlan",
    "LOOKUP_BOTH",
    "batch_gradients",
    "batch_loss",
    "softplus",
]
