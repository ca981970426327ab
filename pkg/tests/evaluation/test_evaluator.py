"""End-to-end ranking of out-of-sample entities and the baselines."""

from __future__ import annotations

from typing import List

import numpy as np
import pytest

from ooskge.aggregation import Aggregator, aggregate
from ooskge.distmult import EmbeddingModel, init_for_graph
from ooskge.evaluation import (
    EmptySplitError,
    VocabularyMismatchError,
    baseline_oov,
    baseline_popularity,
    candidate_count,
    context_neighbors,
    evaluate,
    expected_random_mrr,
    make_queries,
    popularity_scores,
    rank_answer,
)
from ooskge.graph import KnowledgeGraph
from ooskge.models import LabeledTriple, OutOfSampleGroup
from tests._fixtures.graph_builder import graph_of, random_graph


def _group(entity: str, *triples: tuple) -> OutOfSampleGroup:
    return OutOfSampleGroup(entity, tuple(LabeledTriple(*t) for t in triples))


def _tiny() -> KnowledgeGraph:
    return graph_of([("a", "r", "b"), ("b", "r", "c")])


def _tiny_model(graph: KnowledgeGraph) -> EmbeddingModel:
    return EmbeddingModel(
        np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]),
        np.array([[1.0, 1.0]]),
        graph.entities.labels,
        graph.relations.labels,
    )


def test_aggregated_ranks_on_a_hand_example() -> None:
    graph = _tiny()
    groups = [_group("x", ("x", "r", "c"), ("a", "r", "x"))]

    report = evaluate(graph, groups, _tiny_model(graph), Aggregator())

    # Tail query: context a gives [1, 0]; a and c tie on top.
    # Head query: context c gives [1, 1]; c beats a, a ties with b.
    assert report.ranks == [1, 2]
    assert report.mrr == pytest.approx(0.75)
    assert report.metadata["method"] == "aggregation"
    assert report.metadata["aggregator"] == "eravg"
    assert report.metadata["filter_mode"] == "gv"


def test_oov_baseline_uses_the_mean_embedding() -> None:
    graph = _tiny()
    groups = [_group("x", ("x", "r", "c"), ("a", "r", "x"))]

    report = baseline_oov(_tiny_model(graph), graph, groups)

    assert report.ranks == [1, 2]
    assert report.metadata["method"] == "oov"


def test_candidate_counts_reflect_filtering() -> None:
    graph = _tiny()
    groups = [_group("x", ("x", "r", "a"), ("x", "r", "b"), ("c", "r", "x"))]

    report = evaluate(graph, groups, init_for_graph(graph, 4, seed=0), Aggregator())

    assert [r.num_candidates for r in report.results] == [2, 2, 3]
    assert [r.neighborhood_size for r in report.results] == [2, 2, 2]


def test_global_filter_matches_per_entity_filter() -> None:
    graph = random_graph(1)
    labels = graph.entities.labels
    groups = [
        _group("x", ("x", "r0", labels[0]), ("x", "r0", labels[1]), (labels[2], "r1", "x")),
        _group("y", ("y", "r1", labels[3]), (labels[0], "r0", "y")),
    ]
    model = init_for_graph(graph, 8, seed=1)

    local = evaluate(graph, groups, model, Aggregator())
    global_ = evaluate(graph, groups, model, Aggregator(), filter_mode="global", all_groups=groups)

    assert local.ranks == global_.ranks
    assert global_.metadata["filter_mode"] == "global"
    with pytest.raises(ValueError):
        evaluate(graph, groups, model, Aggregator(), filter_mode="bogus")


def test_untrained_model_ranks_like_chance() -> None:
    graph = random_graph(7, num_entities=60, num_relations=3, num_triples=200)
    labels = graph.entities.labels
    relations = graph.relations.labels
    rng = np.random.default_rng(3)
    groups: List[OutOfSampleGroup] = []
    for i in range(30):
        picks = rng.choice(len(labels), size=4, replace=False)
        groups.append(
            _group(
                f"oos{i}",
                *[(f"oos{i}", relations[int(rng.integers(len(relations)))], labels[p]) for p in picks],
            )
        )
    model = init_for_graph(graph, 64, seed=11)

    report = evaluate(graph, groups, model, Aggregator())
    mean, std = expected_random_mrr([r.num_candidates for r in report.results])

    assert abs(report.mrr - mean) <= 3 * std


def test_popularity_ranks_by_triple_count() -> None:
    graph = graph_of([("a", "r", "b"), ("a", "r", "c"), ("c", "s", "a")])
    groups = [_group("x", ("x", "r", "a"), ("x", "s", "b"))]

    report = baseline_popularity(graph, groups)

    assert report.ranks == [1, 3]
    assert report.metadata["method"] == "popularity"


def test_aggregated_ranks_come_from_rank_answer() -> None:
    graph = random_graph(3, num_entities=12, num_relations=2, num_triples=30)
    model = init_for_graph(graph, 4, seed=1)
    labels = graph.entities.labels
    group = _group(
        "x", ("x", "r0", labels[0]), (labels[1], "r1", "x"), ("x", "r1", labels[2])
    )
    aggregator = Aggregator("ls", 0.1)

    report = evaluate(graph, [group], model, aggregator)

    expected = [
        rank_answer(q, aggregate(aggregator, context_neighbors(q, graph), model), model, graph)
        for q in make_queries(group)
    ]
    assert report.ranks == expected
    assert [r.num_candidates for r in report.results] == [
        candidate_count(q, graph) for q in make_queries(group)
    ]


def test_popularity_counts_a_self_loop_once() -> None:
    graph = graph_of([("a", "r", "a"), ("b", "r", "c"), ("b", "s", "c")])
    a = graph.entities.id_of("a")

    assert graph.triple_count(a) == 1
    for seed in range(20):
        assert popularity_scores(graph, seed)[a] == -2.0


def test_popularity_breaks_ties_by_seed() -> None:
    graph = graph_of([(f"e{i}", "r" if i % 2 else "s", f"e{(i + 1) % 10}") for i in range(10)])
    groups = [_group("x", ("x", "r", "e0"), ("e3", "s", "x"))]

    first = popularity_scores(graph, seed=0)
    assert sorted(first.tolist()) == [-float(i) for i in range(9, -1, -1)]
    assert not np.array_equal(first, popularity_scores(graph, seed=1))

    mrrs = [baseline_popularity(graph, groups, seed=seed).mrr for seed in range(200)]
    expected, _ = expected_random_mrr([10, 10])
    assert np.mean(mrrs) == pytest.approx(expected, abs=0.07)


def test_vocabulary_mismatch_is_rejected() -> None:
    graph = _tiny()
    other = graph_of([("p", "q", "z")])
    groups = [_group("x", ("x", "r", "a"), ("x", "r", "b"))]

    with pytest.raises(VocabularyMismatchError):
        evaluate(graph, groups, init_for_graph(other, 2, seed=0), Aggregator())
    with pytest.raises(VocabularyMismatchError):
        baseline_oov(init_for_graph(other, 2, seed=0), graph, groups)


def test_empty_part_is_an_error() -> None:
    graph = _tiny()

    with pytest.raises(EmptySplitError):
        evaluate(graph, [], _tiny_model(graph), Aggregator())
    with pytest.raises(EmptySplitError):
        baseline_popularity(graph, [])
