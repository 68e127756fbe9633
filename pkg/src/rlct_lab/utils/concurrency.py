"""Async helpers for throttling concurrent grid cells."""

from __future__ import annotations

import asyncio
from collections.abc import Awaitable, Iterable
from typing import TypeVar

T = TypeVar("T")


async def bounded_gather(limit: int, tasks: Iterable[Awaitable[T]]) -> list[T | BaseException]:
    """Run awaitables with a concurrency limit.

    Results come back in submission order; an exception in one task does not cancel
    the others and is returned in its slot.
    """

    semaphore = asyncio.Semaphore(max(1, limit))

    async def _run(coro: Awaitable[T]) -> T:
        async with semaphore:
            return await coro

    return await asyncio.gather(*(_run(task) for task in tasks), return_exceptions=True)
