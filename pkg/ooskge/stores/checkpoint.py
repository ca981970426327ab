"""Binary checkpoint format for DistMult embedding tables.

Layout (all integers little-endian u32)::

    b"OOSKGE1\n" | |V| | |R| | d
    |V| entity labels, each u32 byte length + UTF-8 bytes
    |R| relation labels, same encoding
    Z_ent then Z_rel, row-major little-endian float32
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import BinaryIO, List, Tuple

import numpy as np

from ..distmult import EmbeddingModel

MAGIC = b"OOSKGE1\n"
_U32 = struct.Struct("<I")
_HEADER = struct.Struct("<III")


class CheckpointError(RuntimeError):
    """Raised when a checkpoint cannot be written or decoded."""


def write_checkpoint(model: EmbeddingModel, path: Path | str) -> None:
    if len(model.entity_labels) != model.num_entities or len(
        model.relation_labels
    ) != model.num_relations:
        raise CheckpointError("Checkpoint requires labels for every entity and relation")
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("wb") as handle:
        handle.write(MAGIC)
        handle.write(_HEADER.pack(model.num_entities, model.num_relations, model.dim))
        for label in (*model.entity_labels, *model.relation_labels):
            encoded = label.encode("utf-8")
            handle.write(_U32.pack(len(encoded)))
            handle.write(encoded)
        handle.write(np.ascontiguousarray(model.entities, dtype="<f4").tobytes())
        handle.write(np.ascontiguousarray(model.relations, dtype="<f4").tobytes())


def read_checkpoint(path: Path | str) -> EmbeddingModel:
    source = Path(path)
    try:
        with source.open("rb") as handle:
            return _decode(handle)
    except FileNotFoundError:
        raise
    except (OSError, struct.error, UnicodeDecodeError) as exc:
        raise CheckpointError(f"Failed to read checkpoint {source}: {exc}") from exc


def _decode(handle: BinaryIO) -> EmbeddingModel:
    if handle.read(len(MAGIC)) != MAGIC:
        raise CheckpointError("Not an ooskge checkpoint (bad magic)")
    num_entities, num_relations, dim = _HEADER.unpack(_read_exact(handle, _HEADER.size))
    labels: List[str] = []
    for _ in range(num_entities + num_relations):
        (length,) = _U32.unpack(_read_exact(handle, _U32.size))
        labels.append(_read_exact(handle, length).decode("utf-8"))
    entities = _read_table(handle, num_entities, dim)
    relations = _read_table(handle, num_relations, dim)
    if handle.read(1):
        raise CheckpointError("Trailing bytes after relation table")
    return EmbeddingModel(
        entities.astype(np.float64),
        relations.astype(np.float64),
        tuple(labels[:num_entities]),
        tuple(labels[num_entities:]),
    )


def _read_table(handle: BinaryIO, rows: int, dim: int) -> np.ndarray:
    raw = _read_exact(handle, rows * dim * 4)
    return np.frombuffer(raw, dtype="<f4").reshape(rows, dim)


def _read_exact(handle: BinaryIO, size: int) -> bytes:
    data = handle.read(size)
    if len(data) != size:
        raise CheckpointError("Checkpoint truncated")
    return data


def checkpoint_shape(path: Path | str) -> Tuple[int, int, int]:
    """Return (|V|, |R|, d) from the header without decoding the tables."""
    with Path(path).open("rb") as handle:
        if handle.read(len(MAGIC)) != MAGIC:
            raise CheckpointError("Not an ooskge checkpoint (bad magic)")
        return _HEADER.unpack(_read_exact(handle, _HEADER.size))


__all__ = ["CheckpointError", "MAGIC", "checkpoint_shape", "read_checkpoint", "write_checkpoint"]
