"""Negative sampling, the regularized log-likelihood loss and AdaGrad training."""

from .batches import LabeledBatch, epoch_order, next_batch, num_batches
from .loss import (
    AGGREGATE_HEAD,
    AGGREGATE_TAIL,
    LOOKUP_BOTH,
    BatchGradients,
    BatchPlan,
    batch_gradients,
    batch_loss,
)
from .optimizer import EPSILON, OptimizerState, adagrad_step
from .trainer import (
    EpochRecord,
    EpochStats,
    TrainResult,
    epoch_batches,
    plan_branches,
    train,
    train_epoch_oos,
    train_epoch_transductive,
)

__all__ = [
    "AGGREGATE_HEAD",
    "AGGREGATE_TAIL",
    "BatchGradients",
    "BatchPlan",
    "EPSILON",
    "EpochRecord",
    "EpochStats",
    "LOOKUP_BOTH",
    "LabeledBatch",
    "OptimizerState",
    "TrainResult",
    "adagrad_step",
    "batch_gradients",
    "batch_loss",
    "epoch_batches",
    "epoch_order",
    "next_batch",
    "num_batches",
    "plan_branches",
    "train",
    "train_epoch_oos",
    "train_epoch_transductive",
]
