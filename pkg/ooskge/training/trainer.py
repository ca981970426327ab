"""Transductive and out-of-sample training epochs plus the training driver."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..aggregation import Aggregator
from ..config import TrainConfig
from ..distmult import (
    STREAM_BRANCH,
    STREAM_CORRUPT,
    EmbeddingModel,
    init_for_graph,
    stream_rng,
)
from ..graph import KnowledgeGraph, neighborhood
from ..logging import get_logger
from .batches import LabeledBatch, epoch_order, next_batch, num_batches
from .loss import (
    AGGREGATE_HEAD,
    AGGREGATE_TAIL,
    LOOKUP_BOTH,
    BatchPlan,
    batch_gradients,
)
from .optimizer import OptimizerState

_LOGGER = get_logger("training")


@dataclass
class EpochStats:
    """Summed loss of an epoch and how often each branch was taken."""

    loss: float = 0.0
    aggregate_head: int = 0
    aggregate_tail: int = 0
    lookup_both: int = 0
    fallbacks: int = 0


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    valid_mrr: Optional[float] = None


@dataclass
class TrainResult:
    """The selected model and the per-epoch log that led to it."""

    model: EmbeddingModel
    history: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_valid_mrr: Optional[float] = None
    seconds: float = 0.0


def epoch_batches(
    graph: KnowledgeGraph, cfg: TrainConfig, epoch: int
) -> Iterator[Tuple[int, LabeledBatch]]:
    """Labeled batches of one epoch; a pure function of the seed and epoch number."""
    order = epoch_order(len(graph), cfg.seed, epoch)
    for batch_index in range(num_batches(len(graph), cfg.batch_size)):
        rng = stream_rng(cfg.seed, STREAM_CORRUPT, epoch, batch_index)
        batch = next_batch(graph, order, batch_index, cfg.batch_size, cfg.negative_ratio, rng)
        yield batch_index, batch


def _update(
    model: EmbeddingModel,
    state: OptimizerState,
    plan: BatchPlan,
    cfg: TrainConfig,
    aggregator: Aggregator,
) -> float:
    grads = batch_gradients(model, plan, cfg.reg_lambda, aggregator)
    state.apply(
        model,
        grads.entity_rows,
        grads.entity_grads,
        grads.relation_rows,
        grads.relation_grads,
        cfg.lr,
    )
    return grads.loss


def train_epoch_transductive(
    graph: KnowledgeGraph,
    model: EmbeddingModel,
    state: OptimizerState,
    cfg: TrainConfig,
    epoch: int,
) -> EpochStats:
    """One epoch of standard training: every embedding comes from a lookup."""
    stats = EpochStats()
    aggregator = cfg.build_aggregator()
    for _, batch in epoch_batches(graph, cfg, epoch):
        stats.loss += _update(model, state, BatchPlan.lookup_only(batch), cfg, aggregator)
        stats.lookup_both += len(batch)
    return stats


def plan_branches(
    graph: KnowledgeGraph,
    batch: LabeledBatch,
    psi: float,
    rng: np.random.Generator,
    stats: Optional[EpochStats] = None,
) -> BatchPlan:
    """Pick lookup or aggregation per triple with probabilities psi/2, psi/2, 1-psi.

    The aggregated side uses its neighborhood without the scored triple; an
    empty neighborhood falls back to a lookup.
    """
    draws = rng.random(len(batch))
    modes = np.full(len(batch), LOOKUP_BOTH, dtype=np.int8)
    modes[draws < psi] = AGGREGATE_TAIL
    modes[draws < psi / 2] = AGGREGATE_HEAD
    neighbors: Dict[int, list] = {}
    for i in np.flatnonzero(modes != LOOKUP_BOTH):
        triple = batch.triple(int(i))
        entity = triple.head if modes[i] == AGGREGATE_HEAD else triple.tail
        context = neighborhood(graph, entity, exclude=graph.index_of(triple))
        if context:
            neighbors[int(i)] = context
        else:
            modes[i] = LOOKUP_BOTH
            if stats is not None:
                stats.fallbacks += 1
    if stats is not None:
        stats.aggregate_head += int(np.count_nonzero(modes == AGGREGATE_HEAD))
        stats.aggregate_tail += int(np.count_nonzero(modes == AGGREGATE_TAIL))
        stats.lookup_both += int(np.count_nonzero(modes == LOOKUP_BOTH))
    return BatchPlan(batch, modes, neighbors)


def train_epoch_oos(
    graph: KnowledgeGraph,
    model: EmbeddingModel,
    state: OptimizerState,
    cfg: TrainConfig,
    epoch: int,
) -> EpochStats:
    """One epoch of out-of-sample-aware training; psi=0 is the transductive epoch."""
    stats = EpochStats()
    aggregator = cfg.build_aggregator()
    for batch_index, batch in epoch_batches(graph, cfg, epoch):
        rng = stream_rng(cfg.seed, STREAM_BRANCH, epoch, batch_index)
        plan = plan_branches(graph, batch, cfg.effective_psi, rng, stats)
        stats.loss += _update(model, state, plan, cfg, aggregator)
    return stats


Validator = Callable[[EmbeddingModel], float]


def train(
    graph: KnowledgeGraph,
    cfg: TrainConfig,
    validator: Optional[Validator] = None,
    *,
    initial: Optional[EmbeddingModel] = None,
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
) -> TrainResult:
    """Train for ``cfg.epochs`` epochs and keep the best validated model.

    ``validator`` maps a model to its validation filtered MRR; it runs every
    ``cfg.eval_every`` epochs and after the last one. Without a validator the
    final model is returned.
    """
    cfg.validate()
    started = time.perf_counter()
    model = initial.copy() if initial is not None else init_for_graph(graph, cfg.dim, cfg.seed)
    state = OptimizerState.for_model(model)
    run_epoch = train_epoch_transductive if cfg.algorithm == "transductive" else train_epoch_oos
    _LOGGER.info(
        "Training DistMult on %d triples (algorithm=%s, psi=%.3f, aggregator=%s, d=%d, epochs=%d)",
        len(graph),
        cfg.algorithm,
        cfg.effective_psi,
        cfg.aggregator,
        cfg.dim,
        cfg.epochs,
    )

    result = TrainResult(model=model.copy())
    for epoch in range(1, cfg.epochs + 1):
        stats = run_epoch(graph, model, state, cfg, epoch)
        record = EpochRecord(epoch=epoch, loss=stats.loss)
        _LOGGER.debug(
            "epoch %d loss=%.6f branches head=%d tail=%d lookup=%d fallback=%d",
            epoch,
            stats.loss,
            stats.aggregate_head,
            stats.aggregate_tail,
            stats.lookup_both,
            stats.fallbacks,
        )
        if validator is not None and (epoch % cfg.eval_every == 0 or epoch == cfg.epochs):
            record.valid_mrr = validator(model)
            _LOGGER.info("epoch %d loss=%.4f valid MRR=%.4f", epoch, stats.loss, record.valid_mrr)
            if result.best_valid_mrr is None or record.valid_mrr > result.best_valid_mrr:
                result.best_valid_mrr = record.valid_mrr
                result.best_epoch = epoch
                result.model = model.copy()
        result.history.append(record)
        if on_epoch is not None:
            on_epoch(record)

    if validator is None and cfg.epochs > 0:
        result.model = model.copy()
        result.best_epoch = cfg.epochs
    result.seconds = time.perf_counter() - started
    return result


__all__ = [
    "EpochRecord",
    "EpochStats",
    "TrainResult",
    "epoch_batches",
    "plan_branches",
    "train",
    "train_epoch_oos",
    "train_epoch_transductive",
]
