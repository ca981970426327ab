"""Persistent stores for ooskge artifacts."""

from .checkpoint import CheckpointError, checkpoint_shape, read_checkpoint, write_checkpoint
from .manifest import RunManifest, dataset_checksums, hash_file

__all__ = [
    "CheckpointError",
    "RunManifest",
    "checkpoint_shape",
    "dataset_checksums",
    "hash_file",
    "read_checkpoint",
    "write_checkpoint",
]
