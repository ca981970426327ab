"""Training configuration: defaults, YAML config files and overrides."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml

from .aggregation import Aggregator, AggregatorKind

SEED_ENV_VAR = "OOSKGE_SEED"

ALGORITHMS = ("oos", "transductive")
FILTER_MODES = ("gv", "global")


class ConfigError(RuntimeError):
    """Raised when configuration cannot be parsed or violates an invariant."""


@dataclass(frozen=True)
class TrainConfig:
    """All hyperparameters of one training run."""

    lr: float = 0.1
    reg_lambda: float = 0.01
    negative_ratio: int = 1
    psi: float = 0.5
    dim: int = 200
    epochs: int = 1000
    batch_size: int = 1000
    seed: int = 0
    aggregator: str = AggregatorKind.ERAVG.value
    agg_lambda: Optional[float] = None
    eval_every: int = 100
    algorithm: str = "oos"
    filter_mode: str = "gv"

    def validate(self) -> "TrainConfig":
        """Return self when every invariant holds, else raise ConfigError."""
        problems = []
        if not self.lr > 0:
            problems.append(f"lr must be positive (got {self.lr})")
        if self.reg_lambda < 0:
            problems.append(f"reg_lambda must be non-negative (got {self.reg_lambda})")
        if self.negative_ratio < 1:
            problems.append(f"negative_ratio must be >= 1 (got {self.negative_ratio})")
        if not 0.0 <= self.psi <= 1.0:
            problems.append(f"psi must lie in [0, 1] (got {self.psi})")
        if self.dim < 1:
            problems.append(f"dim must be >= 1 (got {self.dim})")
        if self.epochs < 0:
            problems.append(f"epochs must be >= 0 (got {self.epochs})")
        if self.batch_size < 1:
            problems.append(f"batch_size must be >= 1 (got {self.batch_size})")
        if self.eval_every < 1:
            problems.append(f"eval_every must be >= 1 (got {self.eval_every})")
        if self.algorithm not in ALGORITHMS:
            problems.append(f"algorithm must be one of {ALGORITHMS} (got {self.algorithm!r})")
        if self.filter_mode not in FILTER_MODES:
            problems.append(
                f"filter_mode must be one of {FILTER_MODES} (got {self.filter_mode!r})"
            )
        try:
            kind = AggregatorKind(self.aggregator)
        except ValueError:
            problems.append(
                f"aggregator must be one of {[k.value for k in AggregatorKind]} "
                f"(got {self.aggregator!r})"
            )
        else:
            if kind.is_least_squares and not self.effective_agg_lambda > 0:
                problems.append("agg_lambda must be positive for least-squares aggregators")
        if self.agg_lambda is not None and self.agg_lambda < 0:
            problems.append(f"agg_lambda must be non-negative (got {self.agg_lambda})")
        if problems:
            raise ConfigError("; ".join(problems))
        return self

    @property
    def effective_agg_lambda(self) -> float:
        """agg_lambda, defaulting to the training L2 regularizer."""
        return self.reg_lambda if self.agg_lambda is None else self.agg_lambda

    @property
    def effective_psi(self) -> float:
        return 0.0 if self.algorithm == "transductive" else self.psi

    def build_aggregator(self) -> Aggregator:
        return Aggregator(AggregatorKind(self.aggregator), self.effective_agg_lambda)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["effective_agg_lambda"] = self.effective_agg_lambda
        return data


_FIELD_TYPES = {
    "lr": "float",
    "reg_lambda": "float",
    "negative_ratio": "int",
    "psi": "float",
    "dim": "int",
    "epochs": "int",
    "batch_size": "int",
    "seed": "int",
    "aggregator": "str",
    "agg_lambda": "float?",
    "eval_every": "int",
    "algorithm": "str",
    "filter_mode": "str",
}

_ALIASES = {
    "lambda": "reg_lambda",
    "l2": "reg_lambda",
    "n": "negative_ratio",
    "negatives": "negative_ratio",
    "d": "dim",
    "dimension": "dim",
    "batch": "batch_size",
}


def load_config(config_path: Path | str) -> Dict[str, Any]:
    """Read a YAML mapping of hyperparameters and return coerced overrides."""
    path = Path(config_path).expanduser()
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"Config file not found: {path}") from None
    if not text.strip():
        return {}
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"Failed to parse {path.name}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path.name} must contain a mapping at the root")
    return coerce_overrides(data)


def coerce_overrides(data: Mapping[str, Any]) -> Dict[str, Any]:
    result: Dict[str, Any] = {}
    for raw_key, value in data.items():
        key = _ALIASES.get(str(raw_key).replace("-", "_"), str(raw_key).replace("-", "_"))
        kind = _FIELD_TYPES.get(key)
        if kind is None:
            raise ConfigError(f"Unknown configuration key: {raw_key}")
        if value is None:
            if kind.endswith("?"):
                result[key] = None
            continue
        coerced = _coerce(value, kind.rstrip("?"))
        if coerced is None:
            raise ConfigError(f"Invalid value for {key}: {value!r}")
        result[key] = coerced
    return result


def resolve_config(
    *,
    config_path: Path | str | None = None,
    overrides: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
    base: Optional[TrainConfig] = None,
) -> TrainConfig:
    """Merge defaults < config file < OOSKGE_SEED < explicit overrides."""
    merged: Dict[str, Any] = {}
    if config_path is not None:
        merged.update(load_config(config_path))
    env = os.environ if environ is None else environ
    if "seed" not in merged and SEED_ENV_VAR in env:
        seed = _as_int(env[SEED_ENV_VAR])
        if seed is None:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env[SEED_ENV_VAR]!r}")
        merged["seed"] = seed
    if overrides:
        merged.update(
            coerce_overrides({k: v for k, v in overrides.items() if v is not None})
        )
    known = {f.name for f in fields(TrainConfig)}
    config = replace(base or TrainConfig(), **{k: v for k, v in merged.items() if k in known})
    return config.validate()


def _coerce(value: Any, kind: str) -> Any:
    if kind == "float":
        return _as_float(value)
    if kind == "int":
        return _as_int(value)
    return _as_str(value)


def _as_str(value: Any) -> Optional[str]:
    return str(value) if isinstance(value, (str, int, float)) and not isinstance(value, bool) else None


def _as_float(value: Any) -> Optional[float]:
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return None
    return None


def _as_int(value: Any) -> Optional[int]:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str):
        try:
            return int(value.strip())
        except ValueError:
            return None
    return None


__all__ = [
    "ALGORITHMS",
    "ConfigError",
    "FILTER_MODES",
    "SEED_ENV_VAR",
    "TrainConfig",
    "coerce_overrides",
    "load_config",
    "resolve_config",
]
