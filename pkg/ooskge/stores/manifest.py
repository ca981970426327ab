"""Run manifests recording everything needed to reproduce a run."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional

_MANIFEST_VERSION = 1
MANIFEST_NAME = "manifest.json"


def hash_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1024 * 1024), b""):
            digest.update(chunk)
    return digest.hexdigest()


def dataset_checksums(dataset_dir: Path, names: Iterable[str]) -> Dict[str, str]:
    """SHA-256 of each named file present in ``dataset_dir``."""
    checksums: Dict[str, str] = {}
    for name in names:
        candidate = dataset_dir / name
        if candidate.is_file():
            checksums[name] = hash_file(candidate)
    return checksums


@dataclass
class RunManifest:
    """Resolved configuration, data fingerprints and artifacts of one run."""

    command: str
    config: Dict[str, object] = field(default_factory=dict)
    dataset: Optional[str] = None
    dataset_checksums: Dict[str, str] = field(default_factory=dict)
    seed: Optional[int] = None
    artifacts: Dict[str, str] = field(default_factory=dict)
    timing: Dict[str, float] = field(default_factory=dict)

    def persist(self, run_dir: Path) -> Path:
        path = run_dir / MANIFEST_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {"version": _MANIFEST_VERSION, **asdict(self)}
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Path) -> Optional["RunManifest"]:
        """Return the manifest at ``path`` or None when absent or unreadable."""
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            return None
        except (OSError, json.JSONDecodeError):
            return None
        if not isinstance(data, dict) or data.get("version") != _MANIFEST_VERSION:
            return None
        command = data.get("command")
        if not isinstance(command, str):
            return None
        return cls(
            command=command,
            config=_as_dict(data.get("config")),
            dataset=data.get("dataset") if isinstance(data.get("dataset"), str) else None,
            dataset_checksums={
                str(k): str(v) for k, v in _as_dict(data.get("dataset_checksums")).items()
            },
            seed=data.get("seed") if isinstance(data.get("seed"), int) else None,
            artifacts={str(k): str(v) for k, v in _as_dict(data.get("artifacts")).items()},
            timing={
                str(k): float(v)
                for k, v in _as_dict(data.get("timing")).items()
                if isinstance(v, (int, float))
            },
        )

    def changed_files(self, current: Mapping[str, str]) -> list[str]:
        """Names whose recorded checksum differs from ``current``."""
        return sorted(
            name
            for name, digest in self.dataset_checksums.items()
            if current.get(name) != digest
        )


def _as_dict(value: object) -> Dict[str, object]:
    return value if isinstance(value, dict) else {}


__all__ = ["MANIFEST_NAME", "RunManifest", "dataset_checksums", "hash_file"]
