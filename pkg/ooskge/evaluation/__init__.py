"""Leave-one-out ranking evaluation for out-of-sample entities."""

from .evaluator import (
    VocabularyMismatchError,
    baseline_oov,
    baseline_popularity,
    check_vocabulary,
    evaluate,
    popularity_scores,
)
from .metrics import (
    HITS_AT,
    NUM_BINS,
    BinSummary,
    EmptySplitError,
    QueryResult,
    RankingReport,
    expected_random_mrr,
    hits_at,
    mean_reciprocal_rank,
    neighbor_bins,
)
from .queries import InvalidGroupError, Query, QueryDirection, context_neighbors, make_queries
from .ranking import (
    candidate_count,
    filtered_candidates,
    rank_among,
    rank_answer,
    rank_from_scores,
)
from .report import render_report, write_report

__all__ = [
    "BinSummary",
    "EmptySplitError",
    "HITS_AT",
    "InvalidGroupError",
    "NUM_BINS",
    "Query",
    "QueryDirection",
    "QueryResult",
    "RankingReport",
    "VocabularyMismatchError",
    "baseline_oov",
    "baseline_popularity",
    "candidate_count",
    "check_vocabulary",
    "context_neighbors",
    "evaluate",
    "expected_random_mrr",
    "filtered_candidates",
    "hits_at",
    "make_queries",
    "mean_reciprocal_rank",
    "neighbor_bins",
    "popularity_scores",
    "rank_among",
    "rank_answer",
    "rank_from_scores",
    "render_report",
    "write_report",
]
