"""Utility helpers."""

from .artifacts import artifact_path, write_artifact
from .concurrency import bounded_gather
from .seeding import cell_seed, make_rng
from .timing import stopwatch

__all__ = [
    "artifact_path",
    "bounded_gather",
    "cell_seed",
    "make_rng",
    "stopwatch",
    "write_artifact",
]
