"""Batch loss values and analytic gradients against finite differences."""

from __future__ import annotations

import math
from typing import Dict, List

import numpy as np
import pytest

from ooskge.aggregation import Aggregator, AggregatorKind
from ooskge.distmult import EmbeddingModel, init_model
from ooskge.models import Direction, Neighbor
from ooskge.training import (
    AGGREGATE_HEAD,
    AGGREGATE_TAIL,
    LOOKUP_BOTH,
    BatchPlan,
    LabeledBatch,
    batch_gradients,
    batch_loss,
)


def test_zero_score_positive_costs_log_two() -> None:
    assert batch_loss([0.0], [1.0], 0.0) == pytest.approx(math.log(2))
    assert batch_loss([0.0, 0.0], [1.0, -1.0], 0.0) == pytest.approx(2 * math.log(2))


def test_loss_prefers_correctly_signed_scores() -> None:
    assert batch_loss([10.0], [1.0], 0.0) < batch_loss([-10.0], [1.0], 0.0)
    assert batch_loss([-10.0], [-1.0], 0.0) < batch_loss([10.0], [-1.0], 0.0)


def test_regularizer_adds_squared_row_norms() -> None:
    rows = [np.array([1.0, 2.0]), np.array([3.0, 0.0])]

    assert batch_loss([0.0], [1.0], 0.5, rows) == pytest.approx(math.log(2) + 0.5 * 14.0)


def test_loss_rejects_mismatched_lengths() -> None:
    with pytest.raises(ValueError):
        batch_loss([0.0, 1.0], [1.0], 0.0)


def _random_plan(rng: np.random.Generator, num_entities: int, num_relations: int) -> BatchPlan:
    size = int(rng.integers(1, 6))
    batch = LabeledBatch(
        heads=rng.integers(0, num_entities, size=size),
        rels=rng.integers(0, num_relations, size=size),
        tails=rng.integers(0, num_entities, size=size),
        labels=rng.choice([-1.0, 1.0], size=size),
    )
    modes = rng.choice([LOOKUP_BOTH, AGGREGATE_HEAD, AGGREGATE_TAIL], size=size).astype(np.int8)
    neighbors: Dict[int, List[Neighbor]] = {}
    for i in np.flatnonzero(modes != LOOKUP_BOTH):
        neighbors[int(i)] = [
            Neighbor(
                Direction.OUTGOING if rng.random() < 0.5 else Direction.INCOMING,
                int(rng.integers(num_relations)),
                int(rng.integers(num_entities)),
            )
            for _ in range(int(rng.integers(1, 4)))
        ]
    return BatchPlan(batch, modes, neighbors)


def _dense(rows: np.ndarray, grads: np.ndarray, table: np.ndarray) -> np.ndarray:
    full = np.zeros_like(table)
    full[rows] = grads
    return full


@pytest.mark.parametrize("kind", [AggregatorKind.ERAVG, AggregatorKind.EAVG])
def test_batch_gradients_match_finite_differences(kind: AggregatorKind) -> None:
    rng = np.random.default_rng(17)
    aggregator = Aggregator(kind)
    eps = 1e-6
    for trial in range(100):
        model = init_model(6, 2, 3, seed=trial)
        plan = _random_plan(rng, 6, 2)
        reg_lambda = float(rng.uniform(0.0, 0.1))
        grads = batch_gradients(model, plan, reg_lambda, aggregator)
        analytic = {
            "entities": _dense(grads.entity_rows, grads.entity_grads, model.entities),
            "relations": _dense(grads.relation_rows, grads.relation_grads, model.relations),
        }

        for name in ("entities", "relations"):
            table = getattr(model, name)
            for index in np.ndindex(table.shape):
                original = table[index]
                table[index] = original + eps
                plus = batch_gradients(model, plan, reg_lambda, aggregator).loss
                table[index] = original - eps
                minus = batch_gradients(model, plan, reg_lambda, aggregator).loss
                table[index] = original
                numeric = (plus - minus) / (2 * eps)
                assert numeric == pytest.approx(analytic[name][index], rel=1e-4, abs=1e-6)


def test_lookup_only_plan_matches_batch_loss() -> None:
    model = init_model(4, 2, 3, seed=1)
    batch = LabeledBatch(
        heads=np.array([0, 1]),
        rels=np.array([1, 1]),
        tails=np.array([2, 3]),
        labels=np.array([1.0, -1.0]),
    )

    grads = batch_gradients(model, BatchPlan.lookup_only(batch), 0.1, Aggregator())
    touched = [model.entities[i] for i in (0, 1, 2, 3)] + [model.relations[1]]

    assert grads.loss == pytest.approx(batch_loss(grads.scores, batch.labels, 0.1, touched))
    assert grads.relation_rows.tolist() == [1]


def test_least_squares_rows_receive_no_aggregation_gradient() -> None:
    model = EmbeddingModel(np.eye(4) + 0.5, np.ones((2, 4)))
    batch = LabeledBatch(
        heads=np.array([0]), rels=np.array([0]), tails=np.array([1]), labels=np.array([1.0])
    )
    plan = BatchPlan(
        batch,
        np.array([AGGREGATE_HEAD], dtype=np.int8),
        {0: [Neighbor(Direction.OUTGOING, 1, 3)]},
    )

    grads = batch_gradients(model, plan, 0.0, Aggregator(AggregatorKind.LS, 0.1))

    # Only the looked-up tail and the scored relation move.
    assert grads.entity_rows.tolist() == [1]
    assert grads.relation_rows.tolist() == [0]
