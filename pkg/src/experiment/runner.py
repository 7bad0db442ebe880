"""Experiment runner: loads a configuration, runs its tasks and assembles the report."""

import asyncio
import hashlib
import json
import logging
import os
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import aiofiles
import numpy as np
import pydantic
import scipy
from pydantic import ValidationError

from src.blockspin.types import BlockSpinFamily
from src.events.bus import EventBus
from src.events.types import Event, EventType
from src.sitespace.space import make_site_space

from . import builders
from .exceptions import ConfigValidationError, ExperimentError, TaskExecutionError
from .tasks import TaskContext, run_task
from .types import ExperimentConfig, ExperimentReport, TaskResult

logger = logging.getLogger(__name__)

WORKERS_ENV = "BLOCKSPIN_WORKERS"
PACKAGE = "blockspin-lattice"


def parse_config(document: str) -> ExperimentConfig:
    """Validate a JSON configuration document.

    Raises:
        ConfigValidationError: With one (path, message) pair per schema violation
    """
    try:
        return ExperimentConfig.model_validate_json(document)
    except ValidationError as e:
        errors = [(".".join(str(part) for part in err["loc"]), err["msg"]) for err in e.errors()]
        raise ConfigValidationError(
            f"Configuration has {len(errors)} schema violation(s): "
            + "; ".join(f"{path}: {message}" for path, message in errors),
            errors,
        ) from e


async def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate a configuration file.

    Raises:
        ExperimentError: If the file cannot be read
        ConfigValidationError: If the document violates the schema
    """
    try:
        async with aiofiles.open(path, "r") as f:
            document = await f.read()
    except OSError as e:
        raise ExperimentError(f"Cannot read configuration {path}: {e}", {"path": str(path)}) from e
    return parse_config(document)


def config_hash(config: ExperimentConfig) -> str:
    """sha256 of the canonical JSON form of the validated configuration."""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def versions() -> Dict[str, str]:
    try:
        package = metadata.version(PACKAGE)
    except metadata.PackageNotFoundError:
        package = "unknown"
    return {
        PACKAGE: package,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
    }


def worker_count() -> int:
    """Parallel task slots from ``BLOCKSPIN_WORKERS`` (at least 1)."""
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning(f"Ignoring non-integer {WORKERS_ENV}={raw!r}")
        return 1


class ExperimentRunner:
    """Runs the tasks of one configuration on every configured lattice.

    Tasks execute in worker threads. Sequential by default; with ``parallel``
    up to ``workers`` tasks run at once. Results always follow the configured
    order: tasks outermost, lattices inside.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        event_bus: Optional[EventBus] = None,
        parallel: bool = False,
        workers: Optional[int] = None,
    ) -> None:
        """Initialize runner.

        Args:
            config: Validated configuration
            event_bus: Bus receiving lifecycle events
            parallel: Run independent tasks concurrently
            workers: Concurrent task limit; defaults to ``BLOCKSPIN_WORKERS``
        """
        self.config = config
        self.event_bus = event_bus
        self.parallel = parallel
        self.workers = (workers or worker_count()) if parallel else 1

    async def _publish(self, event_type: EventType, data: Dict[str, Any]) -> None:
        if self.event_bus is not None:
            await self.event_bus.publish(Event(type=event_type, data=data))

    def contexts(self) -> List[TaskContext]:
        """One context per (task, lattice), seeds spawned in that order."""
        config = self.config
        site = make_site_space(config.site)
        blockspin = BlockSpinFamily(config.blockspin)
        k_range = builders.refinements(config.k_range)
        jobs = [(task, lattice) for task in config.task_configs for lattice in config.lattices]
        seeds = builders.task_seeds(config.estimator.seed, len(jobs))
        contexts = []
        for (task, lattice), seed in zip(jobs, seeds):
            spec = builders.lattice_spec(lattice)
            contexts.append(
                TaskContext(
                    task=task,
                    spec=spec,
                    site=site,
                    action=config.action,
                    family=builders.action_family(config.action, spec.d),
                    blockspin=blockspin,
                    k_range=k_range,
                    settings=builders.estimator(config.estimator, seed),
                    cap=config.estimator.cap,
                    seed=seed,
                    inputs={
                        "task": task.model_dump(mode="json"),
                        "lattice": lattice.model_dump(mode="json"),
                        "site": config.site.model_dump(mode="json"),
                        "action": config.action.model_dump(mode="json") if config.action else None,
                        "blockspin": config.blockspin.value,
                        "k_range": [list(k) for k in config.k_range],
                        "estimator": config.estimator.kind.value,
                        "seed": seed,
                    },
                )
            )
        return contexts

    async def _execute(self, ctx: TaskContext, slots: asyncio.Semaphore) -> TaskResult:
        label = {"task": ctx.task.name.value, "scale": list(ctx.scale)}
        async with slots:
            await self._publish(EventType.TASK_STARTED, label)
            try:
                result = await asyncio.to_thread(run_task, ctx)
            except ExperimentError as e:
                await self._publish(EventType.TASK_FAILED, {**label, "error": e.message})
                raise
            except Exception as e:
                await self._publish(EventType.TASK_FAILED, {**label, "error": str(e)})
                raise TaskExecutionError(
                    f"Task {ctx.task.name.value} failed at scale {ctx.scale}: {e}",
                    ctx.task.name.value,
                    {**label, "error_type": type(e).__name__},
                ) from e
        verdict = result.verdict.value if result.verdict else None
        await self._publish(EventType.TASK_COMPLETED, {**label, "verdict": verdict})
        if result.diagnostics:
            await self._publish(EventType.DIAGNOSTIC, {**label, **result.diagnostics})
        logger.info(f"Task {label['task']} at {ctx.scale}: verdict {verdict}")
        return result

    async def run(self) -> ExperimentReport:
        """Run every task and assemble the report.

        Raises:
            TaskExecutionError: If a task fails, with the task and lattice attached
        """
        digest = config_hash(self.config)
        contexts = self.contexts()
        await self._publish(
            EventType.EXPERIMENT_STARTED,
            {"name": self.config.name, "config_hash": digest, "tasks": len(contexts)},
        )
        slots = asyncio.Semaphore(self.workers)
        if self.parallel:
            results = list(await asyncio.gather(*(self._execute(ctx, slots) for ctx in contexts)))
        else:
            results = [await self._execute(ctx, slots) for ctx in contexts]
        report = ExperimentReport(
            name=self.config.name, config_hash=digest, versions=versions(), results=results
        )
        await self._publish(
            EventType.EXPERIMENT_COMPLETED, {"name": report.name, "passed": report.passed}
        )
        return report


async def run_experiment(
    config: Union[str, Path, ExperimentConfig],
    event_bus: Optional[EventBus] = None,
    parallel: bool = False,
) -> ExperimentReport:
    """Run a configuration given as a file path or as a validated model.

    Args:
        config: Path to a JSON configuration, or the configuration itself
        event_bus: Bus receiving lifecycle events
        parallel: Run independent tasks concurrently

    Returns:
        Report with one result per (task, lattice) in configured order

    Raises:
        ConfigValidationError: If the configuration violates the schema
        TaskExecutionError: If a task fails
    """
    if not isinstance(config, ExperimentConfig):
        config = await load_config(config)
    return await ExperimentRunner(config, event_bus, parallel).run()
