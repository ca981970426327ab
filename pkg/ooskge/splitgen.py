"""Out-of-sample benchmark splits built from a merged triple set."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .graph import (
    KnowledgeGraph,
    graph_from_labeled,
    load_triples,
    write_labeled_triples,
    write_triples,
)
from .logging import get_logger
from .models import LabeledTriple, OutOfSampleGroup, Triple

_LOGGER = get_logger("splitgen")

DEFAULT_OOS_FRACTION = 0.2
SPLIT_FILES = ("train.txt", "valid.txt", "test.txt", "stats.txt")


class DegenerateSplitError(RuntimeError):
    """Raised when a split would contain no out-of-sample entities."""


class SplitFormatError(ValueError):
    """Raised when a valid/test file line cannot be attributed to one entity."""


@dataclass(frozen=True)
class SplitStats:
    in_sample_entities: int
    oos_valid: int
    oos_test: int
    relations: int
    train_triples: int
    valid_queries: int
    test_queries: int

    def to_lines(self, seed: Optional[int] = None) -> List[str]:
        lines = [f"{f.name}={getattr(self, f.name)}" for f in fields(self)]
        if seed is not None:
            lines.append(f"seed={seed}")
        return lines


@dataclass
class OutOfSampleSplit:
    """Train graph plus validation and test groups of out-of-sample entities."""

    train: KnowledgeGraph
    valid: List[OutOfSampleGroup]
    test: List[OutOfSampleGroup]
    seed: Optional[int] = None

    @property
    def stats(self) -> SplitStats:
        return SplitStats(
            in_sample_entities=self.train.num_entities,
            oos_valid=len(self.valid),
            oos_test=len(self.test),
            relations=self.train.num_relations,
            train_triples=len(self.train),
            valid_queries=sum(len(group.triples) for group in self.valid),
            test_queries=sum(len(group.triples) for group in self.test),
        )

    def part(self, name: str) -> List[OutOfSampleGroup]:
        if name == "valid":
            return self.valid
        if name == "test":
            return self.test
        raise ValueError(f"Unknown split part {name!r}; expected 'valid' or 'test'")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OutOfSampleSplit):
            return NotImplemented
        return (
            list(self.train.labeled_triples()) == list(other.train.labeled_triples())
            and self.train.entities == other.train.entities
            and self.train.relations == other.train.relations
            and self.valid == other.valid
            and self.test == other.test
        )


def build_split(
    graph: KnowledgeGraph,
    oos_fraction: float = DEFAULT_OOS_FRACTION,
    seed: int = 0,
) -> OutOfSampleSplit:
    """Select out-of-sample entities and partition ``graph`` around them.

    ``graph`` is the union of the original train/valid/test triples. Among
    entities appearing in at least two triples, floor(oos_fraction * count)
    are sampled without replacement; the rest of the procedure is
    :func:`split_from_candidates`.
    """
    if not 0.0 < oos_fraction < 1.0:
        raise ValueError(f"oos_fraction must lie in (0, 1), got {oos_fraction}")
    if len(graph) == 0:
        raise DegenerateSplitError("Cannot split an empty graph")
    rng = np.random.default_rng(seed)
    eligible = np.array(
        [v for v in range(graph.num_entities) if graph.triple_count(v) >= 2], dtype=np.int64
    )
    quota = math.floor(oos_fraction * eligible.shape[0])
    _LOGGER.info(
        "%d of %d entities appear in >= 2 triples; sampling %d candidates",
        eligible.shape[0],
        graph.num_entities,
        quota,
    )
    if quota == 0:
        raise DegenerateSplitError("No out-of-sample candidates could be sampled")
    candidates = np.sort(rng.choice(eligible, size=quota, replace=False))
    return split_from_candidates(graph, candidates.tolist(), rng, seed=seed)


def split_from_candidates(
    graph: KnowledgeGraph,
    candidates: Iterable[int],
    rng: np.random.Generator,
    *,
    seed: Optional[int] = None,
) -> OutOfSampleSplit:
    """Partition ``graph`` given the chosen out-of-sample candidate handles."""
    oos: Set[int] = set(int(v) for v in candidates)

    train: List[Triple] = []
    pool: List[Triple] = []
    dropped = 0
    for triple in graph.triples:
        mentions = (triple.head in oos) + (triple.tail in oos)
        if mentions == 0:
            train.append(triple)
        elif mentions == 1:
            pool.append(triple)
        else:
            dropped += 1
    _LOGGER.debug("%d train, %d query-pool, %d dropped triples", len(train), len(pool), dropped)

    pool = _prune_unsupported(train, pool, oos)

    grouped: Dict[int, List[Triple]] = {}
    for triple in pool:
        entity = triple.head if triple.head in oos else triple.tail
        grouped.setdefault(entity, []).append(triple)
    kept = sorted(entity for entity, triples in grouped.items() if len(triples) >= 2)
    if not kept:
        raise DegenerateSplitError("Split has no out-of-sample entity with >= 2 triples")

    order = rng.permutation(len(kept))
    shuffled = [kept[i] for i in order]
    half = len(shuffled) // 2
    train_graph = graph_from_labeled(graph.labeled(t) for t in train)

    def to_groups(entities: Sequence[int]) -> List[OutOfSampleGroup]:
        return [
            OutOfSampleGroup(
                graph.entities.label_of(entity),
                tuple(graph.labeled(t) for t in grouped[entity]),
            )
            for entity in entities
        ]

    split = OutOfSampleSplit(
        train=train_graph,
        valid=to_groups(shuffled[:half]),
        test=to_groups(shuffled[half:]),
        seed=seed,
    )
    _LOGGER.info("Built split: %s", split.stats)
    return split


def _prune_unsupported(train: Sequence[Triple], pool: List[Triple], oos: Set[int]) -> List[Triple]:
    """Drop pool triples whose in-sample entity or relation has no train triple.

    Repeated until nothing changes.
    """
    train_entities = {e for t in train for e in (t.head, t.tail)}
    train_relations = {t.rel for t in train}
    iteration = 0
    while True:
        iteration += 1
        kept = [
            t
            for t in pool
            if t.rel in train_relations
            and all(e in oos or e in train_entities for e in (t.head, t.tail))
        ]
        removed = len(pool) - len(kept)
        _LOGGER.debug("Support pruning pass %d removed %d triples", iteration, removed)
        pool = kept
        if removed == 0:
            return pool


def write_split(split: OutOfSampleSplit, directory: Path | str) -> None:
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    write_triples(split.train, target / "train.txt")
    write_labeled_triples((t for g in split.valid for t in g.triples), target / "valid.txt")
    write_labeled_triples((t for g in split.test for t in g.triples), target / "test.txt")
    (target / "stats.txt").write_text(
        "\n".join(split.stats.to_lines(split.seed)) + "\n", encoding="utf-8"
    )


def read_split(directory: Path | str) -> OutOfSampleSplit:
    source = Path(directory)
    for name in SPLIT_FILES[:3]:
        if not (source / name).is_file():
            raise FileNotFoundError(f"Split file missing: {source / name}")
    train = load_triples(source / "train.txt")
    valid = _read_groups(source / "valid.txt", train)
    test = _read_groups(source / "test.txt", train)
    seed = _read_stats(source / "stats.txt").get("seed")
    return OutOfSampleSplit(train=train, valid=valid, test=test, seed=seed)


def _read_groups(path: Path, train: KnowledgeGraph) -> List[OutOfSampleGroup]:
    grouped: Dict[str, List[LabeledTriple]] = {}
    with path.open("r", encoding="utf-8", newline="\n") as handle:
        for line_number, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3 or not all(parts):
                raise SplitFormatError(f"{path}:{line_number}: expected 3 tab-separated fields")
            head, rel, tail = parts
            if rel not in train.relations:
                raise SplitFormatError(f"{path}:{line_number}: relation {rel!r} not in train")
            unknown = [label for label in (head, tail) if label not in train.entities]
            if len(unknown) != 1:
                raise SplitFormatError(
                    f"{path}:{line_number}: expected exactly one out-of-sample entity, "
                    f"found {len(unknown)}"
                )
            grouped.setdefault(unknown[0], []).append(LabeledTriple(head, rel, tail))
    return [OutOfSampleGroup(entity, tuple(triples)) for entity, triples in grouped.items()]


def _read_stats(path: Path) -> Dict[str, int]:
    values: Dict[str, int] = {}
    if not path.is_file():
        return values
    for line in path.read_text(encoding="utf-8").splitlines():
        key, sep, value = line.partition("=")
        if not sep:
            continue
        try:
            values[key.strip()] = int(value.strip())
        except ValueError:
            continue
    return values


def neighbor_histogram(split: OutOfSampleSplit, part: str = "test") -> List[Tuple[int, int]]:
    """(k, number of queries whose embedding is computed from k triples)."""
    counts: Dict[int, int] = {}
    for group in split.part(part):
        size = len(group.triples) - 1
        counts[size] = counts.get(size, 0) + len(group.triples)
    return sorted(counts.items())


__all__ = [
    "DEFAULT_OOS_FRACTION",
    "DegenerateSplitError",
    "OutOfSampleSplit",
    "SPLIT_FILES",
    "SplitFormatError",
    "SplitStats",
    "build_split",
    "neighbor_histogram",
    "read_split",
    "split_from_candidates",
    "write_split",
]
