"""Positive batches and their uniformly corrupted negatives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..distmult import STREAM_SHUFFLE, stream_rng
from ..graph import KnowledgeGraph
from ..models import Triple


@dataclass(frozen=True)
class LabeledBatch:
    """Triples with labels in {-1, +1}; each positive is followed by its negatives."""

    heads: np.ndarray
    rels: np.ndarray
    tails: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def triple(self, index: int) -> Triple:
        return Triple(int(self.heads[index]), int(self.rels[index]), int(self.tails[index]))


def epoch_order(num_triples: int, seed: int, epoch: int) -> np.ndarray:
    """Shuffled positive order for one epoch."""
    return stream_rng(seed, STREAM_SHUFFLE, epoch).permutation(num_triples)


def num_batches(num_triples: int, batch_size: int) -> int:
    return (num_triples + batch_size - 1) // batch_size


def next_batch(
    graph: KnowledgeGraph,
    order: np.ndarray,
    batch_index: int,
    batch_size: int,
    negative_ratio: int,
    rng: np.random.Generator,
) -> LabeledBatch:
    """Slice the next positives from ``order`` and corrupt each ``negative_ratio`` times.

    A corruption replaces the head with probability 1/2, otherwise the tail,
    by an entity drawn uniformly from the whole vocabulary. Negatives are not
    filtered against known positives.
    """
    start = batch_index * batch_size
    positives = graph.as_array()[order[start : start + batch_size]]
    count = positives.shape[0]
    width = negative_ratio + 1

    corrupt_head = rng.random(count * negative_ratio) < 0.5
    replacements = rng.integers(0, graph.num_entities, size=count * negative_ratio)

    negatives = np.repeat(positives, negative_ratio, axis=0)
    negatives[corrupt_head, 0] = replacements[corrupt_head]
    negatives[~corrupt_head, 2] = replacements[~corrupt_head]

    rows = np.empty((count * width, 3), dtype=np.int64)
    labels = np.empty(count * width, dtype=np.float64)
    rows[::width] = positives
    labels[::width] = 1.0
    for offset in range(negative_ratio):
        rows[offset + 1 :: width] = negatives[offset::negative_ratio]
        labels[offset + 1 :: width] = -1.0
    return LabeledBatch(rows[:, 0].copy(), rows[:, 1].copy(), rows[:, 2].copy(), labels)


__all__ = ["LabeledBatch", "epoch_order", "next_batch", "num_batches"]
