"""Leave-one-out evaluation of aggregated embeddings and the two baselines."""

from __future__ import annotations

from typing import Callable, Collection, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from ..aggregation import Aggregator, aggregate, oov_embedding
from ..config import FILTER_MODES
from ..distmult import STREAM_TIEBREAK, EmbeddingModel, stream_rng
from ..graph import KnowledgeGraph
from ..logging import get_logger
from ..models import LabeledTriple, OutOfSampleGroup
from .metrics import EmptySplitError, QueryResult, RankingReport
from .queries import Query, QueryDirection, context_neighbors, make_queries
from .ranking import candidate_count, rank_among, rank_answer

_LOGGER = get_logger("evaluation")

# Maps a query and its extra filtered answers to the filtered rank of the true answer.
Ranker = Callable[[Query, Collection[str]], int]
_AnswerKey = Tuple[str, QueryDirection, str]


class VocabularyMismatchError(RuntimeError):
    """Raised when a model was trained on a different vocabulary than the split."""


def _known_answers(triples: Iterable[LabeledTriple]) -> Dict[_AnswerKey, Set[str]]:
    index: Dict[_AnswerKey, Set[str]] = {}
    for head, rel, tail in triples:
        index.setdefault((head, QueryDirection.TAIL, rel), set()).add(tail)
        index.setdefault((tail, QueryDirection.HEAD, rel), set()).add(head)
    return index


def _run(
    graph: KnowledgeGraph,
    groups: Sequence[OutOfSampleGroup],
    ranker: Ranker,
    metadata: Dict[str, str],
    *,
    filter_mode: str = "gv",
    all_groups: Optional[Sequence[OutOfSampleGroup]] = None,
) -> RankingReport:
    if filter_mode not in FILTER_MODES:
        raise ValueError(f"filter_mode must be one of {FILTER_MODES}, got {filter_mode!r}")
    if not groups:
        raise EmptySplitError("Split part has no out-of-sample entities")

    known: Dict[_AnswerKey, Set[str]] = {}
    if filter_mode == "global":
        pool = list(graph.labeled_triples())
        pool.extend(t for g in (all_groups if all_groups is not None else groups) for t in g.triples)
        known = _known_answers(pool)

    results: List[QueryResult] = []
    for group in groups:
        for query in make_queries(group):
            extra = known.get((query.entity, query.direction, query.relation), set())
            rank = ranker(query, extra)
            count = candidate_count(query, graph, extra)
            results.append(
                QueryResult(
                    entity=query.entity,
                    direction=query.direction.value,
                    relation=query.relation,
                    answer=query.answer,
                    rank=rank,
                    num_candidates=count,
                    neighborhood_size=query.neighborhood_size,
                )
            )
    report = RankingReport.from_results(results, {**metadata, "filter_mode": filter_mode})
    _LOGGER.info(
        "Evaluated %d queries over %d entities: MRR=%.4f Hit@1=%.4f Hit@3=%.4f Hit@10=%.4f",
        report.num_queries,
        len(groups),
        report.mrr,
        report.hits[1],
        report.hits[3],
        report.hits[10],
    )
    return report


def check_vocabulary(model: EmbeddingModel, graph: KnowledgeGraph) -> None:
    if not model.is_bound_to(graph):
        raise VocabularyMismatchError(
            f"Model vocabulary ({model.num_entities} entities, {model.num_relations} relations) "
            f"does not match the split ({graph.num_entities} entities, "
            f"{graph.num_relations} relations)"
        )


def evaluate(
    graph: KnowledgeGraph,
    groups: Sequence[OutOfSampleGroup],
    model: EmbeddingModel,
    aggregator: Aggregator,
    *,
    filter_mode: str = "gv",
    all_groups: Optional[Sequence[OutOfSampleGroup]] = None,
) -> RankingReport:
    """Rank every leave-one-out query with the aggregated out-of-sample embedding."""
    check_vocabulary(model, graph)

    def ranker(query: Query, extra: Collection[str]) -> int:
        embedding = aggregate(aggregator, context_neighbors(query, graph), model)
        return rank_answer(query, embedding, model, graph, extra)

    metadata = {
        "method": "aggregation",
        "aggregator": aggregator.kind.value,
        "agg_lambda": f"{aggregator.agg_lambda:g}",
    }
    return _run(graph, groups, ranker, metadata, filter_mode=filter_mode, all_groups=all_groups)


def popularity_scores(graph: KnowledgeGraph, seed: int = 0) -> np.ndarray:
    """Score = minus the position in the global popularity ordering.

    Entities are ordered by the number of train triples they appear in,
    most frequent first, with ties broken by a seeded shuffle. A self-loop
    counts once.
    """
    counts = np.array([graph.triple_count(v) for v in range(graph.num_entities)], dtype=np.int64)
    shuffled = stream_rng(seed, STREAM_TIEBREAK).permutation(graph.num_entities)
    order = shuffled[np.argsort(-counts[shuffled], kind="stable")]
    scores = np.empty(graph.num_entities, dtype=np.float64)
    scores[order] = -np.arange(graph.num_entities, dtype=np.float64)
    return scores


def baseline_popularity(
    graph: KnowledgeGraph,
    groups: Sequence[OutOfSampleGroup],
    seed: int = 0,
    *,
    filter_mode: str = "gv",
    all_groups: Optional[Sequence[OutOfSampleGroup]] = None,
) -> RankingReport:
    scores = popularity_scores(graph, seed)
    metadata = {"method": "popularity", "seed": str(seed)}
    return _run(
        graph,
        groups,
        lambda query, extra: rank_among(scores, query, graph, extra)[0],
        metadata,
        filter_mode=filter_mode,
        all_groups=all_groups,
    )


def baseline_oov(
    model: EmbeddingModel,
    graph: KnowledgeGraph,
    groups: Sequence[OutOfSampleGroup],
    *,
    filter_mode: str = "gv",
    all_groups: Optional[Sequence[OutOfSampleGroup]] = None,
) -> RankingReport:
    """Every out-of-sample entity gets the mean in-sample entity embedding."""
    check_vocabulary(model, graph)
    embedding = oov_embedding(model)

    def ranker(query: Query, extra: Collection[str]) -> int:
        return rank_answer(query, embedding, model, graph, extra)

    metadata = {"method": "oov"}
    return _run(graph, groups, ranker, metadata, filter_mode=filter_mode, all_groups=all_groups)


__all__ = [
    "Ranker",
    "VocabularyMismatchError",
    "baseline_oov",
    "baseline_popularity",
    "check_vocabulary",
    "evaluate",
    "popularity_scores",
]
