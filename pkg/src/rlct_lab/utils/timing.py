"""Wall-clock timing of grid cells."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator


@dataclass(slots=True)
class Stopwatch:
    started_ns: int
    elapsed_ms: int = 0


@contextmanager
def stopwatch() -> Iterator[Stopwatch]:
    """Yield a stopwatch whose ``elapsed_ms`` is filled in when the block exits, even on error."""

    watch = Stopwatch(time.perf_counter_ns())
    try:
        yield watch
    finally:
        watch.elapsed_ms = (time.perf_counter_ns() - watch.started_ns) // 1_000_000
