"""Общие фикстуры тестов."""

from collections.abc import Callable, Mapping, Sequence
from pathlib import Path

import numpy as np
import pytest

from swarm_scheduler.core.drift import DriftParams
from swarm_scheduler.core.engine import Scenario
from swarm_scheduler.core.models import CapacitorBank, Event, TaskSpec
from swarm_scheduler.policies.base import PolicySpec

PROJECT_ROOT = Path(__file__).parent.parent

# Небольшой сценарий для сквозных тестов: 3 "суток" по 200 слотов
SMALL_SCENARIO = """\
[nodes]
capacitance_f = 0.01

[energy]
generator = "constant"
rate_range_mw = [10.0, 30.0]

[events]
count = 40
period_range = [10, 15]
duration_range = [1, 5]

[task]
name = "dnn_audio_classification"

[policy]
kind = "PCP"

[drift]
enabled = false

[sim]
seed = 3
horizon = 600
slot_duration = 1.0
slots_per_day = 200

[output]
directory = "results"
"""


@pytest.fixture
def audio_task() -> TaskSpec:
    """Акустический DNN-классификатор: 3.89 с и 26.72 мДж при слоте 1 с."""
    return TaskSpec(
        name="dnn_audio_classification", runtime_slots=4, energy_per_slot=6.68
    )


@pytest.fixture
def unit_task() -> TaskSpec:
    return TaskSpec(name="unit", runtime_slots=1, energy_per_slot=1.0)


@pytest.fixture
def big_bank() -> CapacitorBank:
    return CapacitorBank(capacity=1000.0)


@pytest.fixture
def make_scenario(
    unit_task: TaskSpec, big_bank: CapacitorBank
) -> Callable[..., Scenario]:
    """Фабрика сценариев без дрейфа: размеры берутся из матрицы сбора."""

    def _make(
        harvest: np.ndarray,
        policy: str = "GRDY",
        events: Sequence[Event] = (),
        task: TaskSpec | None = None,
        bank: CapacitorBank | None = None,
        params: Mapping[str, object] | None = None,
        **kwargs: object,
    ) -> Scenario:
        harvest = np.asarray(harvest, dtype=float)
        options = {
            "drift": DriftParams(enabled=False),
            "seed": 11,
            "slot_duration": 1.0,
            **kwargs,
        }
        return Scenario(
            n_nodes=harvest.shape[0],
            horizon=harvest.shape[1],
            harvest=harvest,
            events=tuple(events),
            task=task or unit_task,
            bank=bank or big_bank,
            policy=PolicySpec.parse(policy, params),
            **options,
        )

    return _make


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[[str], Path]:
    """Записать TOML-сценарий во временный каталог."""

    def _write(text: str = SMALL_SCENARIO, name: str = "scenario.toml") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
