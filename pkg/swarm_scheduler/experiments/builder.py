"""Сборка сценария из RunConfig.

Все случайные величины берутся из подпотоков главного зерна sim.seed
(трассы, события, дрейф, исследование политик). Значения, выведенные
автоматически (число узлов, Q, T, единичная энергия), записываются в
разрешённую конфигурацию, чтобы её повторный прогон дал те же результаты.
"""

import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from swarm_scheduler.core.drift import DriftParams
from swarm_scheduler.core.engine import ListenMode, Scenario
from swarm_scheduler.core.exceptions import ConfigurationError
from swarm_scheduler.core.models import CapacitorBank, TaskSpec
from swarm_scheduler.core.pcp import (
    OverlapMode,
    lowest_allowed_cycle,
    min_node_count,
    scenario_hyperperiod,
)
from swarm_scheduler.core.utils import STREAM_TRACES, make_rng
from swarm_scheduler.experiments.config import RunConfig
from swarm_scheduler.infra.settings import get_settings
from swarm_scheduler.traces.catalog import (
    TaskCatalog,
    default_unit_energy,
    load_task_catalog,
)
from swarm_scheduler.traces.generators import (
    EnergyTrace,
    EventGenParams,
    PathLossModel,
    dbm_to_mw,
    gen_constant_traces,
    gen_events,
    gen_rf_trace,
    gen_solar_trace,
    mw_to_dbm,
    random_trajectory,
    traces_to_matrix,
)
from swarm_scheduler.traces.ingest import load_trace_csv

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BuiltScenario:
    """Сценарий и конфигурация с выведенными значениями."""

    scenario: Scenario
    resolved: RunConfig


# =============================================================================
# Составные части
# =============================================================================


def build_task(config: RunConfig, catalog: TaskCatalog) -> TaskSpec:
    """Задача каталога с переопределениями из [task]."""
    entry = catalog.get(config.task.name)
    overrides = {
        key: value
        for key, value in (
            ("runtime_s", config.task.runtime_s),
            ("energy_mj", config.task.energy_mj),
            ("sensing_energy_mj", config.task.sensing_energy_mj),
        )
        if value is not None
    }
    if overrides:
        entry = dataclasses.replace(entry, **overrides)
    return entry.to_task_spec(config.sim.slot_duration)


def build_bank(config: RunConfig) -> CapacitorBank:
    """Шаблон накопителя по [nodes]."""
    nodes = config.nodes
    v_max = nodes.v_max
    if v_max is None:
        v_max = float(get_settings().get("v_max", 3.3))
    return CapacitorBank.from_capacitance(
        nodes.capacitance_f,
        v_max,
        stored=nodes.initial_stored_mj,
        charge_efficiency=nodes.charge_efficiency,
        leakage_rate=nodes.leakage_rate,
    )


def _path_loss(config: RunConfig) -> PathLossModel:
    energy = config.energy
    return PathLossModel(
        exponent=energy.path_loss_exponent,
        reference_distance=energy.reference_distance,
        loss_at_d0_db=energy.loss_at_d0_db,
        obstruction_db=energy.obstruction_db,
        sigma_db=energy.fading_sigma_db,
    )


def expected_peak_rate(config: RunConfig) -> float:
    """Наибольшая ожидаемая скорость сбора узла, мДж/слот."""
    energy = config.energy
    slot = config.sim.slot_duration
    if energy.generator == "rf":
        received = _path_loss(config).received_dbm(
            mw_to_dbm(energy.tx_power_mw), energy.distance_range[0]
        )
        return float(dbm_to_mw(received)) * slot
    return min(energy.rate_range_mw[1], 100.0) * slot


def generate_traces(config: RunConfig, n_nodes: int) -> list[EnergyTrace]:
    """Синтетические трассы по [energy] для n_nodes узлов."""
    energy, sim = config.energy, config.sim
    if energy.generator == "constant":
        return gen_constant_traces(
            n_nodes, energy.rate_range_mw, sim.horizon, sim.slot_duration, sim.seed
        )
    if energy.generator == "solar":
        traces = []
        low, high = energy.rate_range_mw
        for node_id in range(n_nodes):
            rng = make_rng(sim.seed, STREAM_TRACES, node_id, 2)
            mean_mw = float(rng.uniform(low, high))
            traces.append(
                gen_solar_trace(
                    mean_mw,
                    energy.variability,
                    sim.horizon,
                    sim.slot_duration,
                    sim.seed,
                    node_id=node_id,
                    smoothing_slots=energy.smoothing_slots,
                    occlusion_rate=energy.occlusion_rate,
                    occlusion_mean_slots=energy.occlusion_mean_slots,
                )
            )
        return traces
    path_loss = _path_loss(config)
    return [
        gen_rf_trace(
            energy.tx_power_mw,
            random_trajectory(
                sim.horizon,
                sim.seed,
                node_id=node_id,
                waypoints=energy.waypoints,
                distance_range=energy.distance_range,
                los_probability=energy.los_probability,
            ),
            path_loss,
            sim.horizon,
            sim.slot_duration,
            sim.seed,
            node_id=node_id,
        )
        for node_id in range(n_nodes)
    ]


def _recorded_traces(config: RunConfig) -> np.ndarray:
    traces = load_trace_csv(Path(config.energy.trace_file or ""))
    count = config.nodes.count
    if count is not None and count != len(traces):
        raise ConfigurationError(
            "nodes.count", f"в трассе {len(traces)} узлов, задано {count}"
        )
    if min(len(trace) for trace in traces) < config.sim.horizon:
        raise ConfigurationError("sim.horizon", "трасса короче горизонта")
    return traces_to_matrix(traces, config.sim.horizon)


# =============================================================================
# Сборка
# =============================================================================


def build_scenario(
    config: RunConfig, catalog: TaskCatalog | None = None
) -> BuiltScenario:
    """Собрать Scenario и разрешённую конфигурацию.

    Число узлов по умолчанию - минимум для покрытия PCP при Q от самого
    сильного ожидаемого узла; то же число используется для всех политик.

    Raises:
        ConfigurationError: Неизвестная задача, неверная трасса.
        TraceParseError: Ошибка разбора CSV-трассы.
    """
    catalog = catalog or load_task_catalog(config.task.catalog_file)
    task = build_task(config, catalog)
    bank = build_bank(config)
    sim = config.sim
    hyper = config.policy.hyperperiod or scenario_hyperperiod(
        config.events.period_range
    )
    min_cycle = config.policy.min_cycle

    if config.energy.generator == "trace":
        harvest = _recorded_traces(config)
        n_nodes = harvest.shape[0]
    else:
        if min_cycle is None:
            peak = expected_peak_rate(config)
            min_cycle = lowest_allowed_cycle(peak, bank, task) or 2
            min_cycle = min(min_cycle, hyper)
        n_nodes = config.nodes.count or min_node_count(min_cycle, max(hyper, min_cycle))
        harvest = traces_to_matrix(generate_traces(config, n_nodes), sim.horizon)

    unit_energy = sim.unit_energy or default_unit_energy(catalog, sim.slot_duration)
    events = gen_events(
        EventGenParams(
            count=config.events.count,
            period_range=config.events.period_range,
            duration_range=config.events.duration_range,
            seed=sim.seed,
            deadline_slots=config.events.deadline_slots,
        ),
        sim.horizon,
    )
    drift = config.drift
    scenario = Scenario(
        n_nodes=n_nodes,
        slot_duration=sim.slot_duration,
        horizon=sim.horizon,
        harvest=harvest,
        events=events,
        task=task,
        bank=bank,
        policy=config.policy.spec(),
        drift=DriftParams(
            enabled=drift.enabled,
            counter_drift=drift.counter_drift,
            counter_drift_mean_slots=drift.counter_drift_mean_slots,
            reference_s=drift.reference_s,
        ),
        seed=sim.seed,
        unit_energy=unit_energy,
        hyperperiod=hyper,
        min_cycle=min_cycle,
        listen_mode=ListenMode(config.policy.listen_mode),
        wrap_hyperperiod=config.policy.wrap_hyperperiod,
        pcp_overlap=OverlapMode(config.policy.pcp_overlap),
        record_energy=sim.record_energy,
    )
    resolved = config.with_overrides(
        {
            "nodes.count": n_nodes,
            "policy.hyperperiod": hyper,
            "sim.unit_energy": unit_energy,
            "sim.slots_per_day": sim.day_slots,
            **({"policy.min_cycle": min_cycle} if min_cycle is not None else {}),
        }
    )
    logger.info(
        f"Built scenario: nodes={n_nodes} task={task.name} T={hyper} Q={min_cycle} "
        f"events={len(events)} energy={config.energy.generator}"
    )
    return BuiltScenario(scenario=scenario, resolved=resolved)
