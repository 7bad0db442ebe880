import json
from unittest.mock import AsyncMock

import pytest

from src.common.types import Verdict
from src.events.bus import EventBus
from src.events.types import EventType
from src.experiment.exceptions import ExperimentError, TaskExecutionError
from src.experiment.runner import (
    ExperimentRunner,
    load_config,
    parse_config,
    run_experiment,
    worker_count,
)
from src.experiment.types import TaskName


def _config(**overrides):
    document = {
        "name": "minimal",
        "lattices": [{"d": 1, "b": 3, "n0": 0, "n1": 1}],
        "site": {"kind": "finite_spin", "values": [-1.0, 1.0]},
        "action": {"kind": "face_coupling", "coupling": 0.5},
        "estimator": {"seed": 3},
        "tasks": ["rp-check"],
    }
    document.update(overrides)
    return parse_config(json.dumps(document))


@pytest.fixture
def mock_event_bus():
    return AsyncMock(spec=EventBus)


def _published(bus):
    return [call.args[0] for call in bus.publish.call_args_list]


@pytest.mark.asyncio
async def test_empty_task_list_gives_empty_valid_report(mock_event_bus):
    report = await run_experiment(_config(tasks=[]), mock_event_bus)
    assert report.results == []
    assert report.passed
    assert len(report.config_hash) == 64
    assert set(report.versions) >= {"numpy", "scipy", "pydantic"}
    assert [e.type for e in _published(mock_event_bus)] == [
        EventType.EXPERIMENT_STARTED,
        EventType.EXPERIMENT_COMPLETED,
    ]


@pytest.mark.asyncio
async def test_minimal_rp_check_is_psd(mock_event_bus):
    report = await run_experiment(_config(), mock_event_bus)
    (result,) = report.results
    assert result.task is TaskName.RP_CHECK
    assert result.verdict is Verdict.PASS
    assert result.scale == (0, 1)
    assert result.table.columns[:2] == ["axis", "basis_size"]
    # 𝟙 plus one projection on each of the layer-0 and layer-+ cubes
    assert result.table.rows[0][:2] == [1, 3]
    assert result.table.rows[0][-1] == "pass"
    assert result.inputs["lattice"] == {"d": 1, "b": 3, "n0": 0, "n1": 1}
    assert result.inputs["action"]["coupling"] == 0.5
    assert [e.type for e in _published(mock_event_bus)] == [
        EventType.EXPERIMENT_STARTED,
        EventType.TASK_STARTED,
        EventType.TASK_COMPLETED,
        EventType.EXPERIMENT_COMPLETED,
    ]
    completed = _published(mock_event_bus)[2]
    assert completed.data == {"task": "rp-check", "scale": [0, 1], "verdict": "pass"}


@pytest.mark.asyncio
async def test_results_follow_configured_order_in_parallel():
    config = _config(
        lattices=[{"d": 1, "b": 3, "n1": 2}, {"d": 1, "b": 3, "n1": 1}],
        tasks=["invariance-check", "rp-check"],
    )
    report = await ExperimentRunner(config, parallel=True, workers=4).run()
    assert [(r.task, r.scale) for r in report.results] == [
        (TaskName.INVARIANCE_CHECK, (0, 2)),
        (TaskName.INVARIANCE_CHECK, (0, 1)),
        (TaskName.RP_CHECK, (0, 2)),
        (TaskName.RP_CHECK, (0, 1)),
    ]
    assert report.passed


@pytest.mark.asyncio
async def test_identical_configs_give_identical_reports():
    config = _config(tasks=["rp-check", "invariance-check", "axioms-check"])
    first = await run_experiment(config)
    second = await run_experiment(_config(tasks=["rp-check", "invariance-check", "axioms-check"]))
    assert first.model_dump_json() == second.model_dump_json()


@pytest.mark.asyncio
async def test_task_seeds_differ_per_task():
    report = await run_experiment(_config(tasks=["rp-check", "rp-check"]))
    seeds = [r.inputs["seed"] for r in report.results]
    assert seeds[0] != seeds[1]


@pytest.mark.asyncio
async def test_task_failure_carries_task_context(mock_event_bus):
    config = _config(
        lattices=[{"d": 2, "b": 3, "n0": 0, "n1": 1}],
        estimator={"seed": 3, "cap": 10},
        tasks=["invariance-check"],
    )
    with pytest.raises(TaskExecutionError) as info:
        await run_experiment(config, mock_event_bus)
    assert info.value.task == "invariance-check"
    assert info.value.details["scale"] == [0, 1]
    assert info.value.details["error_type"] == "ExactCapacityError"
    types = [e.type for e in _published(mock_event_bus)]
    assert EventType.TASK_FAILED in types
    assert EventType.EXPERIMENT_COMPLETED not in types


@pytest.mark.asyncio
async def test_load_config_reads_files(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(_config().model_dump_json(), encoding="utf-8")
    assert (await load_config(path)) == _config()
    with pytest.raises(ExperimentError):
        await load_config(tmp_path / "missing.json")


def test_worker_count_from_environment(monkeypatch):
    monkeypatch.delenv("BLOCKSPIN_WORKERS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("BLOCKSPIN_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("BLOCKSPIN_WORKERS", "many")
    assert worker_count() == 1


def test_sequential_runner_ignores_worker_setting(monkeypatch):
    monkeypatch.setenv("BLOCKSPIN_WORKERS", "8")
    assert ExperimentRunner(_config()).workers == 1
    assert ExperimentRunner(_config(), parallel=True).workers == 8
