"""Filtered candidate sets and tie-aware ranks."""

from __future__ import annotations

from typing import Iterable, Set, Tuple

import numpy as np

from ..distmult import EmbeddingModel, score_candidates
from ..graph import KnowledgeGraph
from .queries import Query


def filtered_candidates(num_entities: int, answer: int, excluded: Iterable[int]) -> np.ndarray:
    """All entity handles minus ``excluded``; the answer is always kept."""
    keep = np.ones(num_entities, dtype=bool)
    drop = np.fromiter((e for e in excluded if e != answer), dtype=np.int64)
    keep[drop] = False
    keep[answer] = True
    return np.flatnonzero(keep)


def rank_from_scores(scores: np.ndarray, answer_position: int) -> int:
    """1 + #strictly greater + floor(#ties / 2); the answer is not its own tie."""
    values = np.asarray(scores, dtype=np.float64)
    target = values[answer_position]
    greater = int(np.count_nonzero(values > target))
    ties = int(np.count_nonzero(values == target)) - 1
    return 1 + greater + ties // 2


def _excluded_handles(
    query: Query, graph: KnowledgeGraph, extra_filtered: Iterable[str]
) -> Set[int]:
    return {
        handle
        for label in (*query.filtered, *extra_filtered)
        if (handle := graph.entities.get(label)) is not None
    }


def candidate_count(
    query: Query, graph: KnowledgeGraph, extra_filtered: Iterable[str] = ()
) -> int:
    """Size of the filtered candidate set, answer included."""
    answer = graph.entities.id_of(query.answer)
    return graph.num_entities - len(_excluded_handles(query, graph, extra_filtered) - {answer})


def rank_among(
    scores: np.ndarray,
    query: Query,
    graph: KnowledgeGraph,
    extra_filtered: Iterable[str] = (),
) -> Tuple[int, int]:
    """Rank the query answer within full-vocabulary ``scores``.

    Returns (rank, number of candidates).
    """
    answer = graph.entities.id_of(query.answer)
    excluded = _excluded_handles(query, graph, extra_filtered)
    candidates = filtered_candidates(graph.num_entities, answer, excluded)
    position = int(np.searchsorted(candidates, answer))
    return rank_from_scores(scores[candidates], position), int(candidates.shape[0])


def rank_answer(
    query: Query,
    embedding: np.ndarray,
    model: EmbeddingModel,
    graph: KnowledgeGraph,
    extra_filtered: Iterable[str] = (),
) -> int:
    """Rank of the true answer when the out-of-sample side is ``embedding``."""
    scores = score_candidates(model, embedding, graph.relations.id_of(query.relation))
    rank, _ = rank_among(scores, query, graph, extra_filtered)
    return rank


__all__ = [
    "candidate_count",
    "filtered_candidates",
    "rank_among",
    "rank_answer",
    "rank_from_scores",
]
