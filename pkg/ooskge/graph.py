"""Vocabulary interning, triple storage and neighborhood lookup."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .logging import get_logger
from .models import AdjacencyEntry, Direction, LabeledTriple, Neighbor, Triple

_LOGGER = get_logger("graph")


class TripleParseError(ValueError):
    """Raised when a triple file line does not have exactly three fields."""

    def __init__(self, path: Path | str, line_number: int, detail: str) -> None:
        super().__init__(f"{path}:{line_number}: {detail}")
        self.path = str(path)
        self.line_number = line_number


class DuplicateTripleError(ValueError):
    """Raised when the same (head, relation, tail) triple is stored twice."""


class UnknownSymbolError(KeyError):
    """Raised when a label is absent from a vocabulary that may not be extended."""

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class Vocabulary:
    """Bijection between string labels and contiguous 0-based handles."""

    def __init__(self, labels: Iterable[str] = ()) -> None:
        self._labels: List[str] = []
        self._index: Dict[str, int] = {}
        for label in labels:
            self.intern(label)

    def intern(self, label: str) -> int:
        """Return the handle of ``label``, assigning the next one if new."""
        handle = self._index.get(label)
        if handle is None:
            handle = len(self._labels)
            self._labels.append(label)
            self._index[label] = handle
        return handle

    def id_of(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownSymbolError(f"Unknown symbol: {label!r}") from None

    def get(self, label: str) -> Optional[int]:
        return self._index.get(label)

    def label_of(self, handle: int) -> str:
        if not 0 <= handle < len(self._labels):
            raise IndexError(f"Handle {handle} outside vocabulary of size {len(self)}")
        return self._labels[handle]

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(self._labels)

    def copy(self) -> "Vocabulary":
        return Vocabulary(self._labels)

    def __contains__(self, label: object) -> bool:
        return label in self._index

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self._labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self._labels == other._labels

    def __repr__(self) -> str:
        return f"Vocabulary(size={len(self)})"


class KnowledgeGraph:
    """Immutable triple store with a per-entity adjacency index.

    Self-loop triples contribute one outgoing and one incoming entry to the
    adjacency of their entity.
    """

    def __init__(
        self,
        entities: Vocabulary,
        relations: Vocabulary,
        triples: Sequence[Triple],
    ) -> None:
        self.entities = entities
        self.relations = relations
        self._triples: Tuple[Triple, ...] = tuple(Triple(*t) for t in triples)
        self._index: Dict[Triple, int] = {}
        self._adjacency: List[List[AdjacencyEntry]] = [[] for _ in range(len(entities))]

        num_entities = len(entities)
        num_relations = len(relations)
        for position, triple in enumerate(self._triples):
            head, rel, tail = triple
            if not (0 <= head < num_entities and 0 <= tail < num_entities):
                raise ValueError(f"Triple {position} references an unknown entity handle")
            if not 0 <= rel < num_relations:
                raise ValueError(f"Triple {position} references an unknown relation handle")
            if triple in self._index:
                raise DuplicateTripleError(
                    f"Duplicate triple {self.labeled(triple)} at position {position}"
                )
            self._index[triple] = position
            self._adjacency[head].append(
                AdjacencyEntry(Direction.OUTGOING, rel, tail, position)
            )
            self._adjacency[tail].append(
                AdjacencyEntry(Direction.INCOMING, rel, head, position)
            )
        self._array: Optional[np.ndarray] = None

    @property
    def triples(self) -> Tuple[Triple, ...]:
        return self._triples

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_relations(self) -> int:
        return len(self.relations)

    def as_array(self) -> np.ndarray:
        """Return the triples as a read-only (T, 3) int64 array."""
        if self._array is None:
            array = np.asarray(self._triples, dtype=np.int64).reshape(-1, 3)
            array.setflags(write=False)
            self._array = array
        return self._array

    def adjacency(self, entity: int) -> Sequence[AdjacencyEntry]:
        return self._adjacency[entity]

    def degree(self, entity: int) -> int:
        """Number of adjacency entries (out-degree plus in-degree)."""
        return len(self._adjacency[entity])

    def triple_count(self, entity: int) -> int:
        """Number of distinct triples the entity appears in."""
        return len({entry.triple_index for entry in self._adjacency[entity]})

    def index_of(self, triple: Triple) -> Optional[int]:
        return self._index.get(Triple(*triple))

    def __contains__(self, triple: object) -> bool:
        return triple in self._index

    def __len__(self) -> int:
        return len(self._triples)

    def labeled(self, triple: Triple) -> LabeledTriple:
        head, rel, tail = triple
        return LabeledTriple(
            self.entities.label_of(head),
            self.relations.label_of(rel),
            self.entities.label_of(tail),
        )

    def labeled_triples(self) -> Iterator[LabeledTriple]:
        for triple in self._triples:
            yield self.labeled(triple)

    def __repr__(self) -> str:
        return (
            f"KnowledgeGraph(entities={self.num_entities}, "
            f"relations={self.num_relations}, triples={len(self)})"
        )


def neighborhood(
    graph: KnowledgeGraph, entity: int, exclude: Optional[int] = None
) -> List[Neighbor]:
    """Return the neighbors of ``entity`` ordered by triple index.

    ``exclude`` drops every adjacency entry derived from that triple index.
    """
    if not 0 <= entity < graph.num_entities:
        raise IndexError(f"Entity handle {entity} out of range")
    # adjacency lists are built in triple order, outgoing before incoming
    return [
        entry.as_neighbor()
        for entry in graph.adjacency(entity)
        if entry.triple_index != exclude
    ]


def load_triples(
    path: Path | str,
    existing: Optional[KnowledgeGraph] = None,
    *,
    extend_vocab: bool = True,
) -> KnowledgeGraph:
    """Load a head<TAB>relation<TAB>tail file into a graph.

    When ``existing`` is given its vocabularies are reused (and extended with
    new labels unless ``extend_vocab`` is False); its triples are not copied.
    """
    source = Path(path)
    entities = existing.entities.copy() if existing is not None else Vocabulary()
    relations = existing.relations.copy() if existing is not None else Vocabulary()

    triples: List[Triple] = []
    seen: Dict[Triple, int] = {}
    with source.open("r", encoding="utf-8", newline="\n") as handle:
        for line_number, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise TripleParseError(
                    source, line_number, f"expected 3 tab-separated fields, got {len(fields)}"
                )
            if any(not field for field in fields):
                raise TripleParseError(source, line_number, "empty field")
            head_label, rel_label, tail_label = fields
            if extend_vocab:
                triple = Triple(
                    entities.intern(head_label),
                    relations.intern(rel_label),
                    entities.intern(tail_label),
                )
            else:
                triple = Triple(
                    entities.id_of(head_label),
                    relations.id_of(rel_label),
                    entities.id_of(tail_label),
                )
            if triple in seen:
                raise DuplicateTripleError(
                    f"{source}:{line_number}: duplicate of line {seen[triple]}: "
                    f"{head_label} {rel_label} {tail_label}"
                )
            seen[triple] = line_number
            triples.append(triple)

    graph = KnowledgeGraph(entities, relations, triples)
    _LOGGER.debug("Loaded %s from %s", graph, source)
    return graph


def write_triples(graph: KnowledgeGraph, path: Path | str) -> None:
    """Write the graph as triple TSV in stored order."""
    write_labeled_triples(graph.labeled_triples(), path)


def write_labeled_triples(triples: Iterable[LabeledTriple], path: Path | str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="\n") as handle:
        for head, rel, tail in triples:
            handle.write(f"{head}\t{rel}\t{tail}\n")


def graph_from_labeled(triples: Iterable[LabeledTriple]) -> KnowledgeGraph:
    """Intern labeled triples in first-appearance order."""
    entities = Vocabulary()
    relations = Vocabulary()
    interned = [
        Triple(entities.intern(h), relations.intern(r), entities.intern(t))
        for h, r, t in triples
    ]
    return KnowledgeGraph(entities, relations, interned)


def merge_graphs(graphs: Sequence[KnowledgeGraph]) -> KnowledgeGraph:
    """Union several graphs into one set of triples over a fresh vocabulary.

    Triples repeated across inputs are kept once, at their first position.
    """
    seen: set[LabeledTriple] = set()
    merged: List[LabeledTriple] = []
    collapsed = 0
    for graph in graphs:
        for labeled in graph.labeled_triples():
            if labeled in seen:
                collapsed += 1
                continue
            seen.add(labeled)
            merged.append(labeled)
    if collapsed:
        _LOGGER.info("Merged inputs shared %d duplicate triples; kept one copy each", collapsed)
    return graph_from_labeled(merged)


__all__ = [
    "DuplicateTripleError",
    "KnowledgeGraph",
    "TripleParseError",
    "UnknownSymbolError",
    "Vocabulary",
    "graph_from_labeled",
    "load_triples",
    "merge_graphs",
    "neighborhood",
    "write_labeled_triples",
    "write_triples",
]
