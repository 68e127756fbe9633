"""High level orchestration of an experiment grid over sample sizes and replications."""

from __future__ import annotations

import asyncio
import csv
import logging
import os
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Iterable

from .config import ExperimentConfig, Settings
from .errors import ConfigError
from .inference.generalization import estimate_generalization
from .inference.sampler import posterior_mcmc
from .inference.wbic import wbic_lambda
from .mixture.poisson import Lattice, log_loss, realizing_parameter, sample, truth_lattice
from .models import RECORD_FIELDS, ExperimentRecord
from .utils.concurrency import bounded_gather
from .utils.seeding import cell_seed
from .utils.timing import stopwatch

logger = logging.getLogger(__name__)


@dataclass(slots=True, frozen=True)
class CellFailure:
    n: int
    rep: int
    error: str


@dataclass(slots=True)
class ExperimentRun:
    """Outcome of one pass over the grid: every record on disk plus the cells that failed."""

    records: list[ExperimentRecord] = field(default_factory=list)
    failures: list[CellFailure] = field(default_factory=list)
    resumed: int = 0
    computed: int = 0

    @property
    def complete(self) -> bool:
        return not self.failures


def read_records(path: Path) -> list[ExperimentRecord]:
    """Load every row of a results CSV; a missing file holds no records."""

    if not path.exists():
        return []
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            return []
        if tuple(reader.fieldnames) != RECORD_FIELDS:
            raise ConfigError(f"{path} does not have the expected columns {list(RECORD_FIELDS)}")
        return [ExperimentRecord.from_row(row) for row in reader]


def write_records(path: Path, records: Iterable[ExperimentRecord]) -> None:
    """Rewrite ``path`` with the records sorted by (n, rep)."""

    ordered = sorted(records, key=lambda record: record.key)
    temporary = path.with_name(path.name + ".tmp")
    with temporary.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(RECORD_FIELDS), lineterminator="\n")
        writer.writeheader()
        for record in ordered:
            writer.writerow(record.to_row())
    os.replace(temporary, path)


def simulate_cell(config: ExperimentConfig, l0: float, lattice: Lattice, n: int, rep: int) -> ExperimentRecord:
    """Simulate one cell: data, posterior, G_n and (optionally) WBIC.

    Module level so a process pool can pickle it together with its arguments.
    """

    seed = cell_seed(config.sampler.seed, n, rep)
    with stopwatch() as watch:
        data = sample(config.truth.params, n, seed)
        settings = replace(config.sampler, seed=seed)
        samples = posterior_mcmc(data, config.sig, config.prior, settings)
        gn = estimate_generalization(samples, config.truth, config.truncation_tol, lattice=lattice)
        wbic = None
        if config.wbic:
            wbic = wbic_lambda(
                data,
                config.sig,
                config.prior,
                settings,
                truth=config.truth,
                reference=config.wbic_reference,
            ).lambda_hat

    return ExperimentRecord(
        config_hash=config.config_hash,
        M=config.sig.M,
        H=config.sig.H,
        r=config.sig.r,
        n=n,
        rep=rep,
        seed=seed,
        gn=gn,
        l0=l0,
        wbic_lambda=wbic,
        accept_w=samples.accept_w,
        accept_b=samples.accept_b,
        ess_proxy=samples.ess_proxy,
        wall_ms=watch.elapsed_ms,
    )


class ExperimentPipeline:
    """Fill the n x replication grid of one experiment config, resuming from its CSV."""

    def __init__(self, config: ExperimentConfig, settings: Settings | None = None) -> None:
        self._config = config
        self._settings = settings or Settings()
        self._hash = config.config_hash
        self._lattice = truth_lattice(config.truth, config.truncation_tol)
        w0 = realizing_parameter(config.truth, config.sig.H)
        self._l0 = log_loss(w0, config.truth, config.truncation_tol, lattice=self._lattice)

    @property
    def l0(self) -> float:
        return self._l0

    def run_cell(self, n: int, rep: int) -> ExperimentRecord:
        return simulate_cell(self._config, self._l0, self._lattice, n, rep)

    def _executor(self) -> Executor:
        workers = self._settings.max_concurrency
        if self._settings.workers == "process":
            return ProcessPoolExecutor(max_workers=workers)
        return ThreadPoolExecutor(max_workers=workers, thread_name_prefix="rlct-cell")

    async def run(self) -> ExperimentRun:
        """Execute every missing cell, appending rows as they finish, then sort the file."""

        path = self._config.output_path
        existing = self._load_existing(path)
        done = {record.key for record in existing}
        pending = [
            (n, rep)
            for n in self._config.n_grid
            for rep in range(self._config.replications)
            if (n, rep) not in done
        ]
        logger.info(
            "config %s: %d cells on disk, %d to run (%d %s workers)",
            self._hash,
            len(done),
            len(pending),
            self._settings.max_concurrency,
            self._settings.workers,
        )

        run = ExperimentRun(records=list(existing), resumed=len(existing))
        if pending:
            self._ensure_writable(path)
            with self._executor() as executor:
                results = await bounded_gather(
                    self._settings.max_concurrency,
                    [self._run_and_append(executor, path, n, rep) for n, rep in pending],
                )
            for (n, rep), result in zip(pending, results):
                if isinstance(result, BaseException):
                    logger.warning("cell n=%d rep=%d failed: %s", n, rep, result)
                    run.failures.append(CellFailure(n, rep, f"{type(result).__name__}: {result}"))
                else:
                    run.records.append(result)
                    run.computed += 1
            write_records(path, run.records)

        run.records.sort(key=lambda record: record.key)
        return run

    async def _run_and_append(self, executor: Executor, path: Path, n: int, rep: int) -> ExperimentRecord:
        loop = asyncio.get_running_loop()
        if isinstance(executor, ProcessPoolExecutor):
            job = partial(simulate_cell, self._config, self._l0, self._lattice, n, rep)
        else:
            job = partial(self.run_cell, n, rep)
        record = await loop.run_in_executor(executor, job)
        self._append(path, record)
        logger.info("n=%d rep=%d ΔG=%.6g in %.2fs", n, rep, record.delta, record.wall_ms / 1000)
        return record

    def _load_existing(self, path: Path) -> list[ExperimentRecord]:
        records = read_records(path)
        foreign = {record.config_hash for record in records} - {self._hash}
        if foreign:
            raise ConfigError(
                f"{path} holds rows of other configurations {sorted(foreign)}; expected {self._hash}"
            )
        wanted = set(self._config.n_grid)
        return [
            record
            for record in records
            if record.n in wanted and record.rep < self._config.replications
        ]

    def _ensure_writable(self, path: Path) -> None:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            if not path.exists() or path.stat().st_size == 0:
                with path.open("w", encoding="utf-8", newline="") as handle:
                    csv.DictWriter(handle, fieldnames=list(RECORD_FIELDS), lineterminator="\n").writeheader()
        except OSError as exc:
            raise ConfigError(f"cannot write results to {path}: {exc}") from exc

    def _append(self, path: Path, record: ExperimentRecord) -> None:
        with path.open("a", encoding="utf-8", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(RECORD_FIELDS), lineterminator="\n")
            writer.writerow(record.to_row())


def run_experiment(config: ExperimentConfig, settings: Settings | None = None) -> ExperimentRun:
    """Synchronous entry point around :meth:`ExperimentPipeline.run`."""

    return asyncio.run(ExperimentPipeline(config, settings).run())
