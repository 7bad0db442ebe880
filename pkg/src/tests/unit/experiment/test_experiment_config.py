import json

import numpy as np
import pytest

from src.action.actions import FaceCouplingAction, ScalarAction, UltraLocalAction
from src.action.coupling import ExpCouplingFamily
from src.experiment import builders
from src.experiment.exceptions import ConfigValidationError
from src.experiment.runner import config_hash, parse_config
from src.experiment.types import (
    ActionConfig,
    ActionKind,
    EstimatorConfig,
    ExperimentConfig,
    TaskName,
)
from src.gibbs.types import EstimatorKind, ExactEstimator, MetropolisEstimator
from src.lattice.types import ScalePair
from src.renorm.types import UltraLocalFamily


def _document(**overrides):
    document = {
        "lattices": [{"d": 1, "b": 3, "n0": 0, "n1": 1}],
        "site": {"kind": "finite_spin", "values": [-1.0, 1.0]},
        "action": {"kind": "face_coupling", "coupling": 0.5},
        "estimator": {"seed": 7},
        "tasks": ["rp-check"],
    }
    document.update(overrides)
    return json.dumps(document)


def _errors(document):
    with pytest.raises(ConfigValidationError) as info:
        parse_config(document)
    return info.value


def test_bare_task_names_use_default_options():
    config = parse_config(
        _document(tasks=["rp-check", {"name": "invariance-check", "tolerance": 1e-8}])
    )
    tasks = config.task_configs
    assert [t.name for t in tasks] == [TaskName.RP_CHECK, TaskName.INVARIANCE_CHECK]
    assert tasks[0].tolerance == 1e-10
    assert tasks[1].tolerance == 1e-8
    assert config.k_range == [(0, 0), (1, 0), (2, 0)]


def test_seed_has_no_default():
    document = json.loads(_document())
    document["estimator"] = {"kind": "exact"}
    error = _errors(json.dumps(document))
    assert ("estimator.seed", "Field required") in error.errors
    assert "EstimatorConfig" in ExperimentConfig.model_json_schema()["$defs"]
    assert ExperimentConfig.model_json_schema()["$defs"]["EstimatorConfig"]["required"] == ["seed"]


def test_even_base_is_rejected_with_its_path():
    error = _errors(_document(lattices=[{"d": 1, "b": 4}]))
    assert [path for path, _ in error.errors] == ["lattices.0"]
    assert "odd" in error.errors[0][1]


def test_unknown_task_is_rejected():
    error = _errors(_document(tasks=["plot"]))
    assert all(path.startswith("tasks.0") for path, _ in error.errors)


def test_malformed_json_is_a_validation_error():
    error = _errors("{not json")
    assert error.errors


def test_tasks_must_match_the_action():
    error = _errors(_document(tasks=["renorm-check"]))
    assert "renorm-check needs" in error.message
    error = _errors(_document(tasks=["duality-check"]))
    assert "duality-check needs" in error.message


@pytest.mark.parametrize(
    "action",
    [
        {"kind": "face_coupling"},
        {"kind": "face_coupling", "coupling": 0.5, "matrix": [[1.0, 1.0], [1.0, 1.0]]},
        {"kind": "ultra_local"},
        {"kind": "ultra_local", "weights": [0.5, 1.5]},
        {"kind": "exp_coupling", "offset": 1.0, "slope": -0.5},
    ],
)
def test_action_fields_are_checked_per_kind(action):
    error = _errors(_document(action=action, tasks=[]))
    assert error.errors[0][0] == "action"


def test_config_hash_ignores_key_order_and_tracks_content():
    first = parse_config(_document())
    reordered = json.loads(_document())
    reordered = dict(reversed(list(reordered.items())))
    assert config_hash(parse_config(json.dumps(reordered))) == config_hash(first)
    assert config_hash(parse_config(_document(estimator={"seed": 8}))) != config_hash(first)
    assert len(config_hash(first)) == 64


def test_task_seeds_are_reproducible_and_distinct():
    seeds = builders.task_seeds(7, 5)
    assert seeds == builders.task_seeds(7, 5)
    assert len(set(seeds)) == 5
    assert builders.task_seeds(8, 5) != seeds


def test_estimator_settings():
    exact = builders.estimator(EstimatorConfig(seed=1, cap=1000), 11)
    assert isinstance(exact, ExactEstimator)
    assert exact.cap == 1000
    sampled = builders.estimator(
        EstimatorConfig(kind=EstimatorKind.METROPOLIS, seed=1, measure_sweeps=100), 11
    )
    assert isinstance(sampled, MetropolisEstimator)
    assert sampled.seed == 11
    assert sampled.measure_sweeps == 100


def test_action_families_per_kind():
    n = ScalePair(0, 1)
    assert builders.action_family(None, 1).at(n) is None
    scalar = ActionConfig(kind=ActionKind.SCALAR, lambda0=0.5, lambdas=[0.1])
    assert isinstance(builders.action_family(scalar, 1).at(n), ScalarAction)
    ising = ActionConfig(kind=ActionKind.FACE_COUPLING, coupling=0.5)
    assert isinstance(builders.action_family(ising, 1).at(n), FaceCouplingAction)
    table = ActionConfig(kind=ActionKind.FACE_COUPLING, matrix=[[2.0, 1.0], [1.0, 2.0]])
    action = builders.action_family(table, 1).at(n)
    assert np.array_equal(action.w.table, [[2.0, 1.0], [1.0, 2.0]])
    ultra_local = ActionConfig(kind=ActionKind.ULTRA_LOCAL, weights=[0.4, 1.0])
    assert isinstance(builders.action_family(ultra_local, 1).at(n), UltraLocalAction)
    assert isinstance(builders.coupling_source(ultra_local, 1), UltraLocalFamily)
    exp = ActionConfig(kind=ActionKind.EXP_COUPLING, offset=1.0, slope=1.0, face_order=4)
    source = builders.coupling_source(exp, 2)
    assert isinstance(source, ExpCouplingFamily)
    assert source.d == 2
    assert source.face_order == 4
    with pytest.raises(ValueError):
        builders.coupling_source(ising, 1)
