"""Tests for ooskge.orchestrator."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from ooskge.config import ConfigError
from ooskge.distmult import EmbeddingModel, init_for_graph
from ooskge.evaluation import VocabularyMismatchError
from ooskge.orchestrator import (
    CHECKPOINT_NAME,
    TRAIN_LOG_NAME,
    ChecksumDriftError,
    Orchestrator,
)
from ooskge.splitgen import read_split
from ooskge.stores import read_checkpoint, write_checkpoint
from tests._fixtures.graph_builder import GraphBuilder, block_triples

TINY = {"dim": 4, "epochs": 2, "eval_every": 1, "batch_size": 100}


@pytest.fixture
def orchestrator() -> Orchestrator:
    return Orchestrator(environ={})


@pytest.fixture
def dataset(graph_builder: GraphBuilder, tmp_path: Path, orchestrator: Orchestrator) -> Path:
    triples = block_triples(0)
    half = len(triples) // 2
    first = graph_builder.write("part1.txt", triples[:half])
    second = graph_builder.write("part2.txt", triples[half:])
    orchestrator.run_build_dataset([first, second], tmp_path / "dataset", oos_fraction=0.2, seed=3)
    return tmp_path / "dataset"


def test_build_dataset_merges_inputs(dataset: Path) -> None:
    split = read_split(dataset)

    assert split.seed == 3
    assert split.valid and split.test
    histogram = (dataset / "neighbors.tsv").read_text(encoding="utf-8").splitlines()
    assert histogram[0] == "neighbors\tqueries"
    assert sum(int(line.split("\t")[1]) for line in histogram[1:]) == split.stats.test_queries


def test_build_dataset_requires_inputs(orchestrator: Orchestrator, tmp_path: Path) -> None:
    with pytest.raises(FileNotFoundError):
        orchestrator.run_build_dataset(
            [tmp_path / "missing.txt"], tmp_path / "out", oos_fraction=0.2, seed=0
        )


def test_train_writes_checkpoint_log_and_manifest(
    orchestrator: Orchestrator, dataset: Path, tmp_path: Path
) -> None:
    outcome = orchestrator.run_train(dataset, tmp_path / "run", overrides=TINY)

    model = read_checkpoint(outcome.checkpoint)
    assert model.is_bound_to(read_split(dataset).train)
    assert model.dim == 4
    assert outcome.result.best_epoch in (1, 2)

    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "train"
    assert manifest["config"]["dim"] == 4
    assert manifest["config"]["effective_agg_lambda"] == 0.01
    assert manifest["seed"] == 0
    assert set(manifest["dataset_checksums"]) == {"train.txt", "valid.txt", "test.txt", "stats.txt"}
    assert manifest["artifacts"]["checkpoint"] == CHECKPOINT_NAME
    assert manifest["artifacts"]["best_epoch"] == str(outcome.result.best_epoch)
    log = (tmp_path / "run" / TRAIN_LOG_NAME).read_text(encoding="utf-8").splitlines()
    assert len(log) == 3


def test_train_reads_yaml_config(
    orchestrator: Orchestrator, dataset: Path, tmp_path: Path
) -> None:
    config = tmp_path / "train.yml"
    config.write_text("d: 6\nepochs: 1\nseed: 12\n", encoding="utf-8")

    outcome = orchestrator.run_train(dataset, tmp_path / "run", config_path=config)

    assert outcome.config.dim == 6
    assert outcome.config.seed == 12
    with pytest.raises(ConfigError):
        orchestrator.run_train(dataset, tmp_path / "bad", config_path=tmp_path / "absent.yml")


def test_evaluate_uses_trained_aggregator(
    orchestrator: Orchestrator, dataset: Path, tmp_path: Path
) -> None:
    trained = orchestrator.run_train(
        dataset, tmp_path / "run", overrides={**TINY, "aggregator": "eavg"}
    )

    outcome = orchestrator.run_evaluate(dataset, tmp_path / "eval", checkpoint=trained.checkpoint)
    overridden = orchestrator.run_evaluate(
        dataset,
        tmp_path / "eval-ls",
        checkpoint=trained.checkpoint,
        aggregator="ls",
        agg_lambda=0.2,
        part="valid",
    )

    assert outcome.report.metadata["aggregator"] == "eavg"
    assert outcome.report.metadata["part"] == "test"
    assert outcome.report.num_queries == read_split(dataset).stats.test_queries
    assert overridden.report.metadata["aggregator"] == "ls"
    assert overridden.report.metadata["agg_lambda"] == "0.2"
    manifest = json.loads((tmp_path / "eval" / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "evaluate"
    assert manifest["artifacts"]["metrics"] == "metrics.tsv"


def test_evaluate_baselines(orchestrator: Orchestrator, dataset: Path, tmp_path: Path) -> None:
    trained = orchestrator.run_train(dataset, tmp_path / "run", overrides=TINY)

    popularity = orchestrator.run_evaluate(dataset, tmp_path / "pop", baseline="popularity", seed=2)
    oov = orchestrator.run_evaluate(
        dataset, tmp_path / "oov", checkpoint=trained.checkpoint, baseline="oov"
    )

    assert popularity.report.metadata["method"] == "popularity"
    assert popularity.report.metadata["seed"] == "2"
    assert oov.report.metadata["method"] == "oov"
    with pytest.raises(ValueError):
        orchestrator.run_evaluate(dataset, tmp_path / "x", baseline="random")


def test_evaluate_checkpoint_errors(
    orchestrator: Orchestrator, dataset: Path, tmp_path: Path
) -> None:
    with pytest.raises(ValueError):
        orchestrator.run_evaluate(dataset, tmp_path / "eval")
    with pytest.raises(FileNotFoundError):
        orchestrator.run_evaluate(dataset, tmp_path / "eval", checkpoint=tmp_path / "none.ckpt")


def test_evaluate_detects_dataset_drift(
    orchestrator: Orchestrator, dataset: Path, tmp_path: Path
) -> None:
    trained = orchestrator.run_train(dataset, tmp_path / "run", overrides=TINY)
    with (dataset / "test.txt").open("a", encoding="utf-8") as handle:
        handle.write("\n")

    with pytest.raises(ChecksumDriftError):
        orchestrator.run_evaluate(dataset, tmp_path / "eval", checkpoint=trained.checkpoint)
    forced = orchestrator.run_evaluate(
        dataset, tmp_path / "eval", checkpoint=trained.checkpoint, force=True
    )
    assert forced.report.num_queries > 0


def test_evaluate_rejects_foreign_checkpoint_from_its_header(
    orchestrator: Orchestrator, dataset: Path, tmp_path: Path
) -> None:
    foreign = EmbeddingModel(np.zeros((3, 4)), np.zeros((1, 4)), ("a", "b", "c"), ("r",))
    path = tmp_path / "foreign" / "model.ckpt"
    path.parent.mkdir()
    write_checkpoint(foreign, path)
    # Cut the tables short: only the header may be read before rejecting.
    path.write_bytes(path.read_bytes()[:-8])

    with pytest.raises(VocabularyMismatchError, match="does not match"):
        orchestrator.run_evaluate(dataset, tmp_path / "eval", checkpoint=path)


def test_sweep_psi_writes_one_row_per_value(
    orchestrator: Orchestrator, dataset: Path, tmp_path: Path
) -> None:
    rows = orchestrator.run_sweep_psi(dataset, tmp_path / "sweep", [1.0, 0.0, 1.0], overrides=TINY)

    assert [row.psi for row in rows] == [0.0, 1.0]
    assert all(row.mrr is not None and 0.0 < row.mrr <= 1.0 for row in rows)
    lines = (tmp_path / "sweep" / "psi_sweep.tsv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "psi\tmrr"
    assert [line.split("\t")[0] for line in lines[1:]] == ["0", "1"]
    with pytest.raises(ValueError):
        orchestrator.run_sweep_psi(dataset, tmp_path / "empty", [], overrides=TINY)


def test_sweep_grid_persists_the_best_run(
    orchestrator: Orchestrator, dataset: Path, tmp_path: Path
) -> None:
    rows, best = orchestrator.run_sweep_grid(
        dataset, tmp_path / "grid", lrs=[0.1, 0.01], reg_lambdas=[0.01], overrides=TINY
    )

    assert len(rows) == 2
    assert best.valid_mrr == max(row.valid_mrr or 0.0 for row in rows)
    lines = (tmp_path / "grid" / "grid_sweep.tsv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "lr\tlambda\tbest_epoch\tvalid_mrr"
    assert len(lines) == 3
    manifest = json.loads((tmp_path / "grid" / "best" / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "sweep-grid"
    assert manifest["config"]["lr"] == best.lr
    assert (tmp_path / "grid" / "best" / CHECKPOINT_NAME).is_file()


def test_zero_epochs_writes_the_initial_model(
    orchestrator: Orchestrator, dataset: Path, tmp_path: Path
) -> None:
    outcome = orchestrator.run_train(
        dataset, tmp_path / "run", overrides={"dim": 4, "epochs": 0, "seed": 2}
    )

    expected = init_for_graph(read_split(dataset).train, 4, seed=2)
    stored = read_checkpoint(outcome.checkpoint)
    assert (stored.entities == expected.entities.astype("float32")).all()
    assert outcome.result.best_epoch == 0
