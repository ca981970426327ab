"""Tests for run manifests and dataset checksums."""

from __future__ import annotations

import json
from pathlib import Path

from ooskge.stores import RunManifest, dataset_checksums, hash_file


def test_manifest_round_trip(tmp_path: Path) -> None:
    manifest = RunManifest(
        command="train",
        config={"lr": 0.1, "psi": 0.5},
        dataset="data/wn18rr",
        dataset_checksums={"train.txt": "abc"},
        seed=3,
        artifacts={"checkpoint": "model.ckpt"},
        timing={"train_seconds": 1.5},
    )

    path = manifest.persist(tmp_path)
    payload = json.loads(path.read_text(encoding="utf-8"))

    assert path.name == "manifest.json"
    assert payload["version"] == 1
    assert RunManifest.load(path) == manifest


def test_manifest_load_tolerates_missing_or_invalid(tmp_path: Path) -> None:
    assert RunManifest.load(tmp_path / "missing.json") is None
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    assert RunManifest.load(broken) is None
    stale = tmp_path / "stale.json"
    stale.write_text(json.dumps({"version": 0, "command": "train"}), encoding="utf-8")
    assert RunManifest.load(stale) is None


def test_checksums_detect_changed_files(tmp_path: Path) -> None:
    (tmp_path / "train.txt").write_text("a\tr\tb\n", encoding="utf-8")
    (tmp_path / "test.txt").write_text("x\tr\ta\n", encoding="utf-8")
    recorded = dataset_checksums(tmp_path, ["train.txt", "test.txt", "valid.txt"])
    manifest = RunManifest(command="train", dataset_checksums=recorded)

    assert set(recorded) == {"train.txt", "test.txt"}
    assert recorded["train.txt"] == hash_file(tmp_path / "train.txt")
    assert manifest.changed_files(recorded) == []

    (tmp_path / "test.txt").write_text("x\tr\tb\n", encoding="utf-8")
    current = dataset_checksums(tmp_path, ["train.txt", "test.txt", "valid.txt"])
    assert manifest.changed_files(current) == ["test.txt"]
