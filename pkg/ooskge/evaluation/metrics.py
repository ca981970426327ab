"""Ranking metrics, neighborhood-size bins and the random-ranking reference."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

HITS_AT = (1, 3, 10)
NUM_BINS = 5


class EmptySplitError(ValueError):
    """Raised when there is no query to evaluate."""


@dataclass(frozen=True)
class QueryResult:
    entity: str
    direction: str
    relation: str
    answer: str
    rank: int
    num_candidates: int
    neighborhood_size: int


@dataclass(frozen=True)
class BinSummary:
    """Queries whose neighborhood size lies in [low, high]."""

    low: int
    high: int
    queries: int
    mrr: float

    @property
    def label(self) -> str:
        return str(self.low) if self.low == self.high else f"{self.low}-{self.high}"


def mean_reciprocal_rank(ranks: Sequence[int]) -> float:
    if len(ranks) == 0:
        raise EmptySplitError("No ranks to average")
    return float(np.mean(1.0 / np.asarray(ranks, dtype=np.float64)))


def hits_at(ranks: Sequence[int], k: int) -> float:
    if len(ranks) == 0:
        raise EmptySplitError("No ranks to average")
    return float(np.mean(np.asarray(ranks) <= k))


def neighbor_bins(sizes: Iterable[int], num_bins: int = NUM_BINS) -> List[Tuple[int, int]]:
    """Split neighborhood sizes into at most ``num_bins`` contiguous ranges.

    All queries of one size share a range. Among partitions into as many
    ranges as possible, the one with the smallest gap between its largest and
    smallest range is chosen; that gap never exceeds the largest single size
    class. Fewer ranges come back only when no partition meets that bound.
    """
    counts = Counter(sizes)
    if not counts:
        return []
    keys = sorted(counts)
    weights = np.array([counts[key] for key in keys], dtype=np.int64)
    largest = int(weights.max())
    for parts in range(min(num_bins, len(keys)), 0, -1):
        ends = _balanced_cuts(weights, parts)
        if ends is None:
            continue
        sizes_per_bin = np.diff(np.concatenate([[0], np.cumsum(weights)[np.array(ends) - 1]]))
        if int(sizes_per_bin.max() - sizes_per_bin.min()) <= largest:
            starts = [0] + ends[:-1]
            return [(keys[start], keys[end - 1]) for start, end in zip(starts, ends)]
    return [(keys[0], keys[-1])]  # pragma: no cover - a single range always qualifies


def _balanced_cuts(weights: np.ndarray, parts: int) -> Optional[List[int]]:
    """Exclusive end indices of the contiguous partition with the least size spread.

    For each candidate floor on the smallest part, a small dynamic program
    finds the partition whose largest part is smallest. Floors are visited
    from the top down and the search stops once no lower floor can win.
    """
    count = len(weights)
    prefix = np.concatenate([[0], np.cumsum(weights)]).astype(np.float64)
    segment = prefix[None, :] - prefix[:, None]  # segment[t, i] = weight of classes t..i-1
    target = prefix[-1] / parts
    upper = np.triu_indices(count + 1, k=1)
    floors = np.unique(segment[upper])
    floors = floors[floors <= target][::-1]

    best_spread = math.inf
    best_ends: Optional[List[int]] = None
    for floor in floors:
        if target - floor >= best_spread:
            break
        ends = _min_max_cuts(segment, parts, floor)
        if ends is None:
            continue
        part_sizes = [segment[start, end] for start, end in zip([0] + ends[:-1], ends)]
        spread = max(part_sizes) - min(part_sizes)
        if spread < best_spread:
            best_spread, best_ends = spread, ends
    return best_ends


def _min_max_cuts(segment: np.ndarray, parts: int, floor: float) -> Optional[List[int]]:
    size = segment.shape[0]
    allowed = segment >= floor
    cost = np.full(size, math.inf)
    cost[0] = 0.0
    choices = []
    for _ in range(parts):
        candidate = np.where(allowed, np.maximum(cost[:, None], segment), math.inf)
        choices.append(candidate.argmin(axis=0))
        cost = candidate.min(axis=0)
    if not math.isfinite(cost[-1]):
        return None
    ends: List[int] = []
    end = size - 1
    for choice in reversed(choices):
        ends.append(end)
        end = int(choice[end])
    return ends[::-1]


def expected_random_mrr(candidate_counts: Sequence[int]) -> Tuple[float, float]:
    """Mean and standard deviation of MRR under uniformly random rankings.

    With C candidates the rank is uniform on 1..C, so E[1/rank] = H_C / C.
    """
    if len(candidate_counts) == 0:
        raise EmptySplitError("No candidate counts given")
    means = []
    variances = []
    for count in candidate_counts:
        inverse = 1.0 / np.arange(1, count + 1, dtype=np.float64)
        mean = float(inverse.mean())
        means.append(mean)
        variances.append(float(np.mean(inverse**2)) - mean * mean)
    n = len(candidate_counts)
    return float(np.mean(means)), math.sqrt(sum(variances)) / n


@dataclass
class RankingReport:
    """Per-query ranks with the metrics derived from them."""

    results: List[QueryResult]
    mrr: float
    hits: Dict[int, float]
    bins: List[BinSummary] = field(default_factory=list)
    metadata: Dict[str, str] = field(default_factory=dict)

    @property
    def num_queries(self) -> int:
        return len(self.results)

    @property
    def ranks(self) -> List[int]:
        return [result.rank for result in self.results]

    @classmethod
    def from_results(
        cls,
        results: Sequence[QueryResult],
        metadata: Dict[str, str] | None = None,
        num_bins: int = NUM_BINS,
    ) -> "RankingReport":
        if not results:
            raise EmptySplitError("Cannot build a report without queries")
        ranks = [r.rank for r in results]
        bins: List[BinSummary] = []
        for low, high in neighbor_bins((r.neighborhood_size for r in results), num_bins):
            members = [r.rank for r in results if low <= r.neighborhood_size <= high]
            bins.append(BinSummary(low, high, len(members), mean_reciprocal_rank(members)))
        meta = dict(metadata or {})
        meta["bin_boundaries"] = ",".join(b.label for b in bins)
        return cls(
            results=list(results),
            mrr=mean_reciprocal_rank(ranks),
            hits={k: hits_at(ranks, k) for k in HITS_AT},
            bins=bins,
            metadata=meta,
        )


__all__ = [
    "BinSummary",
    "EmptySplitError",
    "HITS_AT",
    "NUM_BINS",
    "QueryResult",
    "RankingReport",
    "expected_random_mrr",
    "hits_at",
    "mean_reciprocal_rank",
    "neighbor_bins",
]
