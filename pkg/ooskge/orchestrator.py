"""Pipeline orchestration for dataset, training, evaluation and sweep runs."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .aggregation import Aggregator, AggregatorKind
from .config import TrainConfig, resolve_config
from .distmult import EmbeddingModel
from .evaluation import (
    RankingReport,
    VocabularyMismatchError,
    baseline_oov,
    baseline_popularity,
    evaluate,
    write_report,
)
from .graph import KnowledgeGraph, load_triples, merge_graphs
from .logging import get_logger
from .splitgen import (
    SPLIT_FILES,
    OutOfSampleSplit,
    build_split,
    neighbor_histogram,
    read_split,
    write_split,
)
from .stores import (
    RunManifest,
    checkpoint_shape,
    dataset_checksums,
    read_checkpoint,
    write_checkpoint,
)
from .stores.manifest import MANIFEST_NAME
from .training import TrainResult, train

CHECKPOINT_NAME = "model.ckpt"
TRAIN_LOG_NAME = "train_log.tsv"
BASELINES = ("popularity", "oov")


class ChecksumDriftError(RuntimeError):
    """Raised when dataset files changed since the checkpoint was trained."""


@dataclass
class TrainOutcome:
    run_dir: Path
    checkpoint: Path
    config: TrainConfig
    result: TrainResult


@dataclass
class EvaluateOutcome:
    run_dir: Path
    report: RankingReport
    artifacts: Dict[str, Path] = field(default_factory=dict)


@dataclass
class SweepRow:
    psi: float
    lr: float
    reg_lambda: float
    best_epoch: int
    valid_mrr: Optional[float]
    mrr: Optional[float] = None


class Orchestrator:
    """Coordinates the command pipelines over run directories."""

    def __init__(self, environ: Optional[Mapping[str, str]] = None) -> None:
        self.environ = environ
        self.logger = get_logger("orchestrator")

    def run_build_dataset(
        self,
        inputs: Sequence[Path | str],
        out_dir: Path | str,
        *,
        oos_fraction: float,
        seed: int,
    ) -> OutOfSampleSplit:
        """Merge triple files, build the out-of-sample split and write it."""
        paths = [Path(p) for p in inputs]
        for path in paths:
            if not path.is_file():
                raise FileNotFoundError(f"Input triple file not found: {path}")
        self.logger.info("Merging %d triple file(s)", len(paths))
        merged = merge_graphs([load_triples(path) for path in paths])
        split = build_split(merged, oos_fraction=oos_fraction, seed=seed)

        target = Path(out_dir)
        write_split(split, target)
        rows = ["neighbors\tqueries"]
        rows.extend(f"{k}\t{count}" for k, count in neighbor_histogram(split, "test"))
        (target / "neighbors.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")
        self.logger.info("Split written to %s", target)
        return split

    def _load_dataset(self, dataset_dir: Path | str) -> Tuple[Path, OutOfSampleSplit]:
        directory = Path(dataset_dir)
        if not directory.is_dir():
            raise FileNotFoundError(f"Dataset directory not found: {directory}")
        return directory, read_split(directory)

    def _fit(self, split: OutOfSampleSplit, config: TrainConfig) -> TrainResult:
        aggregator = config.build_aggregator()

        def validate(model: EmbeddingModel) -> float:
            return evaluate(
                split.train,
                split.valid,
                model,
                aggregator,
                filter_mode=config.filter_mode,
                all_groups=split.valid + split.test,
            ).mrr

        if not split.valid:
            self.logger.warning("Dataset has no validation entities; keeping the final model")
            return train(split.train, config)
        return train(split.train, config, validate)

    def run_train(
        self,
        dataset_dir: Path | str,
        out_dir: Path | str,
        *,
        config_path: Path | str | None = None,
        overrides: Optional[Mapping[str, Any]] = None,
        command: str = "train",
    ) -> TrainOutcome:
        directory, split = self._load_dataset(dataset_dir)
        config = resolve_config(
            config_path=config_path, overrides=overrides, environ=self.environ
        )
        result = self._fit(split, config)
        return self._persist_training(Path(out_dir), directory, config, result, command)

    def _persist_training(
        self,
        run_dir: Path,
        directory: Path,
        config: TrainConfig,
        result: TrainResult,
        command: str,
    ) -> TrainOutcome:
        """Write checkpoint, per-epoch log and manifest of a finished run."""
        run_dir.mkdir(parents=True, exist_ok=True)
        lines = ["epoch\tloss\tvalid_mrr"]
        for record in result.history:
            mrr = "" if record.valid_mrr is None else f"{record.valid_mrr:.6f}"
            lines.append(f"{record.epoch}\t{record.loss:.6f}\t{mrr}")
        (run_dir / TRAIN_LOG_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8")

        checkpoint = run_dir / CHECKPOINT_NAME
        write_checkpoint(result.model, checkpoint)
        RunManifest(
            command=command,
            config=config.to_dict(),
            dataset=str(directory),
            dataset_checksums=dataset_checksums(directory, SPLIT_FILES),
            seed=config.seed,
            artifacts={
                "checkpoint": CHECKPOINT_NAME,
                "train_log": TRAIN_LOG_NAME,
                "best_epoch": str(result.best_epoch),
            },
            timing={"train_seconds": round(result.seconds, 3)},
        ).persist(run_dir)
        self.logger.info("Checkpoint written to %s (best epoch %d)", checkpoint, result.best_epoch)
        return TrainOutcome(run_dir, checkpoint, config, result)

    def _check_drift(self, checkpoint: Path, directory: Path, force: bool) -> Optional[RunManifest]:
        manifest = RunManifest.load(checkpoint.parent / MANIFEST_NAME)
        if manifest is None:
            self.logger.debug("No manifest next to %s; skipping checksum check", checkpoint)
            return None
        changed = manifest.changed_files(dataset_checksums(directory, SPLIT_FILES))
        if changed:
            message = f"Dataset files changed since training: {', '.join(changed)}"
            if not force:
                raise ChecksumDriftError(message + " (use --force to evaluate anyway)")
            self.logger.warning("%s; continuing because of --force", message)
        return manifest

    def run_evaluate(
        self,
        split_dir: Path | str,
        out_dir: Path | str,
        *,
        checkpoint: Path | str | None = None,
        aggregator: Optional[str] = None,
        agg_lambda: Optional[float] = None,
        baseline: Optional[str] = None,
        part: str = "test",
        filter_mode: str = "gv",
        force: bool = False,
        seed: int = 0,
    ) -> EvaluateOutcome:
        directory, split = self._load_dataset(split_dir)
        groups = split.part(part)
        all_groups = split.valid + split.test
        if baseline is not None and baseline not in BASELINES:
            raise ValueError(f"Unknown baseline {baseline!r}; expected one of {BASELINES}")

        config: Dict[str, object] = {"part": part, "filter_mode": filter_mode}
        checksums = dataset_checksums(directory, SPLIT_FILES)
        if baseline == "popularity":
            report = baseline_popularity(
                split.train, groups, seed, filter_mode=filter_mode, all_groups=all_groups
            )
            config.update(baseline=baseline, seed=seed)
        else:
            if checkpoint is None:
                raise ValueError("A checkpoint is required unless --baseline popularity is used")
            checkpoint_path = Path(checkpoint)
            if not checkpoint_path.is_file():
                raise FileNotFoundError(f"Checkpoint not found: {checkpoint_path}")
            trained = self._check_drift(checkpoint_path, directory, force)
            self._check_checkpoint_shape(checkpoint_path, split.train)
            model = read_checkpoint(checkpoint_path)
            if baseline == "oov":
                report = baseline_oov(
                    model, split.train, groups, filter_mode=filter_mode, all_groups=all_groups
                )
                config.update(baseline=baseline)
            else:
                resolved = self._resolve_aggregator(trained, aggregator, agg_lambda)
                report = evaluate(
                    split.train,
                    groups,
                    model,
                    resolved,
                    filter_mode=filter_mode,
                    all_groups=all_groups,
                )
                config.update(aggregator=resolved.kind.value, agg_lambda=resolved.agg_lambda)
            config["checkpoint"] = str(checkpoint_path)
        report.metadata["part"] = part

        run_dir = Path(out_dir)
        artifacts = write_report(report, run_dir, title=f"Out-of-sample ranking ({part})")
        RunManifest(
            command="evaluate",
            config=config,
            dataset=str(directory),
            dataset_checksums=checksums,
            seed=seed if baseline == "popularity" else None,
            artifacts={name: path.name for name, path in artifacts.items()},
        ).persist(run_dir)
        return EvaluateOutcome(run_dir, report, artifacts)

    def _check_checkpoint_shape(self, path: Path, graph: KnowledgeGraph) -> None:
        num_entities, num_relations, dim = checkpoint_shape(path)
        self.logger.debug(
            "Checkpoint %s holds %d entities, %d relations, d=%d",
            path,
            num_entities,
            num_relations,
            dim,
        )
        if (num_entities, num_relations) != (graph.num_entities, graph.num_relations):
            raise VocabularyMismatchError(
                f"Checkpoint vocabulary ({num_entities} entities, {num_relations} relations) "
                f"does not match the split ({graph.num_entities} entities, "
                f"{graph.num_relations} relations)"
            )

    def _resolve_aggregator(
        self,
        trained: Optional[RunManifest],
        kind: Optional[str],
        agg_lambda: Optional[float],
    ) -> Aggregator:
        recorded = trained.config if trained is not None else {}
        if kind is None:
            kind = str(recorded.get("aggregator", AggregatorKind.ERAVG.value))
        if agg_lambda is None:
            value = recorded.get("effective_agg_lambda")
            agg_lambda = (
                float(value)
                if isinstance(value, (int, float))
                else TrainConfig().effective_agg_lambda
            )
        return Aggregator(AggregatorKind(kind), agg_lambda)

    def run_sweep_psi(
        self,
        dataset_dir: Path | str,
        out_dir: Path | str,
        psis: Sequence[float],
        *,
        config_path: Path | str | None = None,
        overrides: Optional[Mapping[str, Any]] = None,
        part: str = "test",
    ) -> List[SweepRow]:
        """Train and evaluate one model per psi value with a shared seed."""
        if not psis:
            raise ValueError("At least one psi value is required")
        _, split = self._load_dataset(dataset_dir)
        base = resolve_config(config_path=config_path, overrides=overrides, environ=self.environ)
        rows: List[SweepRow] = []
        for psi in sorted(set(psis)):
            config = replace(base, psi=psi).validate()
            self.logger.info("Sweep: training with psi=%.3f", psi)
            result = self._fit(split, config)
            report = evaluate(
                split.train,
                split.part(part),
                result.model,
                config.build_aggregator(),
                filter_mode=config.filter_mode,
                all_groups=split.valid + split.test,
            )
            rows.append(
                SweepRow(
                    psi,
                    config.lr,
                    config.reg_lambda,
                    result.best_epoch,
                    result.best_valid_mrr,
                    report.mrr,
                )
            )

        run_dir = Path(out_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        lines = ["psi\tmrr"]
        lines.extend(f"{row.psi:g}\t{row.mrr or 0.0:.6f}" for row in rows)
        (run_dir / "psi_sweep.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        return rows

    def run_sweep_grid(
        self,
        dataset_dir: Path | str,
        out_dir: Path | str,
        *,
        lrs: Sequence[float] = (0.1, 0.01),
        reg_lambdas: Sequence[float] = (0.1, 0.01, 0.001, 0.0001),
        config_path: Path | str | None = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> Tuple[List[SweepRow], SweepRow]:
        """Sequential lr x lambda sweep selected on validation filtered MRR.

        The winning run is persisted under ``out_dir/best`` like a train run.
        """
        if not lrs or not reg_lambdas:
            raise ValueError("The grid needs at least one lr and one lambda value")
        directory, split = self._load_dataset(dataset_dir)
        if not split.valid:
            raise ValueError("Grid search needs validation entities in the dataset")
        base = resolve_config(config_path=config_path, overrides=overrides, environ=self.environ)
        rows: List[SweepRow] = []
        best: Optional[Tuple[SweepRow, TrainConfig, TrainResult]] = None
        best_score = float("-inf")
        for lr in lrs:
            for reg_lambda in reg_lambdas:
                config = replace(base, lr=lr, reg_lambda=reg_lambda).validate()
                self.logger.info("Grid: lr=%g lambda=%g", lr, reg_lambda)
                result = self._fit(split, config)
                row = SweepRow(base.psi, lr, reg_lambda, result.best_epoch, result.best_valid_mrr)
                rows.append(row)
                score = row.valid_mrr if row.valid_mrr is not None else -1.0
                if score > best_score:
                    best, best_score = (row, config, result), score
        assert best is not None

        run_dir = Path(out_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        lines = ["lr\tlambda\tbest_epoch\tvalid_mrr"]
        lines.extend(
            f"{row.lr:g}\t{row.reg_lambda:g}\t{row.best_epoch}\t{row.valid_mrr or 0.0:.6f}"
            for row in rows
        )
        (run_dir / "grid_sweep.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

        best_row, best_config, best_result = best
        self._persist_training(run_dir / "best", directory, best_config, best_result, "sweep-grid")
        return rows, best_row


__all__ = [
    "BASELINES",
    "CHECKPOINT_NAME",
    "ChecksumDriftError",
    "EvaluateOutcome",
    "Orchestrator",
    "SweepRow",
    "TRAIN_LOG_NAME",
    "TrainOutcome",
]
