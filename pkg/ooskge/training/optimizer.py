"""Row-sparse AdaGrad over the embedding tables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..distmult import EmbeddingModel

EPSILON = 1e-10


def adagrad_step(
    accumulator: np.ndarray,
    param: np.ndarray,
    grad: np.ndarray,
    lr: float,
    eps: float = EPSILON,
) -> None:
    """In place: acc += g^2; theta -= lr * g / (sqrt(acc) + eps)."""
    accumulator += grad * grad
    param -= lr * grad / (np.sqrt(accumulator) + eps)


@dataclass
class OptimizerState:
    """Accumulated squared gradients, one accumulator per parameter."""

    entities: np.ndarray
    relations: np.ndarray
    eps: float = EPSILON

    @classmethod
    def for_model(cls, model: EmbeddingModel, eps: float = EPSILON) -> "OptimizerState":
        return cls(np.zeros_like(model.entities), np.zeros_like(model.relations), eps)

    def apply(
        self,
        model: EmbeddingModel,
        entity_rows: np.ndarray,
        entity_grads: np.ndarray,
        relation_rows: np.ndarray,
        relation_grads: np.ndarray,
        lr: float,
    ) -> None:
        """Update only the given (unique) rows of both tables."""
        _update_rows(self.entities, model.entities, entity_rows, entity_grads, lr, self.eps)
        _update_rows(self.relations, model.relations, relation_rows, relation_grads, lr, self.eps)


def _update_rows(
    accumulator: np.ndarray,
    table: np.ndarray,
    rows: np.ndarray,
    grads: np.ndarray,
    lr: float,
    eps: float,
) -> None:
    if rows.size == 0:
        return
    acc = accumulator[rows]
    params = table[rows]
    adagrad_step(acc, params, grads, lr, eps)
    accumulator[rows] = acc
    table[rows] = params


__all__ = ["EPSILON", "OptimizerState", "adagrad_step"]
