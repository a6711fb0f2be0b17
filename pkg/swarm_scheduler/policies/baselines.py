"""Базовые политики для сравнения: ORCL, GRDY, DC и ACES."""

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from swarm_scheduler.core.exceptions import ConfigurationError, InvalidArgumentError
from swarm_scheduler.core.models import CapacitorBank, Decision, NodeState, TaskSpec
from swarm_scheduler.policies.base import (
    SLEEP,
    WAKE,
    PolicyContext,
    PolicyKind,
    SchedulingPolicy,
    Verdict,
    WakeHint,
)
from swarm_scheduler.policies.learning import LearningParams, epsilon_greedy, q_update
from swarm_scheduler.policies.registry import register_policy

logger = logging.getLogger(__name__)

# =============================================================================
# ORCL
# =============================================================================


def oracle_decide(
    nodes: Sequence[tuple[int, float, float]], e_min: float
) -> int | None:
    """Глобальный оракул: бодрствует узел с наибольшей E_H + E_C.

    Args:
        nodes: Тройки (node_id, E_H мДж/слот, E_C мДж запасено).
        e_min: Минимальная рабочая энергия, мДж (> 0).

    Returns:
        node_id выбранного узла или None, если максимум меньше e_min.
        При равенстве выигрывает меньший node_id.

    Raises:
        InvalidArgumentError: Если список узлов пуст или e_min <= 0.

    Example:
        >>> oracle_decide([(0, 2, 3), (1, 1, 1)], 2)
        0
    """
    if not nodes:
        raise InvalidArgumentError("nodes", nodes, "список узлов пуст")
    if e_min <= 0:
        raise InvalidArgumentError("e_min", e_min, "значение должно быть больше нуля")
    node_id, harvest, stored = min(
        nodes, key=lambda item: (-(item[1] + item[2]), item[0])
    )
    if harvest + stored >= e_min:
        return node_id
    return None


@register_policy
class OraclePolicy(SchedulingPolicy):
    """ORCL: решение принимает движок с глобальным знанием (см. oracle_decide)."""

    kind = PolicyKind.ORCL
    is_global = True

    def decide(self, node: NodeState, local_slot: int) -> Verdict:
        return SLEEP

    @property
    def min_energy(self) -> float:
        """Порог E_min, мДж; по умолчанию энергия одной активации."""
        return float(
            self.params.get("oracle_min_energy_mj", self.context.wake_threshold)
        )


# =============================================================================
# GRDY
# =============================================================================


def greedy_decide(node: NodeState, e_on: float) -> Decision:
    """Жадная политика: проснуться, как только накоплено e_on.

    Raises:
        InvalidArgumentError: Если e_on <= 0.
    """
    if e_on <= 0:
        raise InvalidArgumentError("e_on", e_on, "значение должно быть больше нуля")
    return Decision.WAKE if node.stored >= e_on else Decision.SLEEP


@register_policy
class GreedyPolicy(SchedulingPolicy):
    """GRDY: просыпается при достаточном запасе и работает, пока хватает энергии."""

    kind = PolicyKind.GRDY

    def __init__(self, params: Mapping[str, Any], context: PolicyContext):
        super().__init__(params, context)
        self.e_on = float(params.get("e_on_mj", context.wake_threshold))

    def decide(self, node: NodeState, local_slot: int) -> Verdict:
        return Verdict(greedy_decide(node, self.e_on))

    def active_window(self, node: NodeState) -> int | None:
        return None

    def next_wake(self, node: NodeState, local_slot: int) -> WakeHint:
        return WakeHint(None, self.e_on)


# =============================================================================
# DC
# =============================================================================


def dc_schedule(t_e: int, t_h: int, node_index: int) -> tuple[int, int]:
    """Общий рабочий цикл DC и смещение старта узла.

    Args:
        t_e: Время выполнения, слоты (>= 1).
        t_h: Время сбора энергии, слоты (>= 0).
        node_index: Номер узла n, с единицы.

    Returns:
        (duty_cycle, start_offset): t_e + t_h (если t_e | t_h) иначе
        t_e + t_h + 1; смещение (n − 1)·t_e.

    Example:
        >>> dc_schedule(2, 5, 1)
        (8, 0)
    """
    if t_e < 1:
        raise InvalidArgumentError("t_e", t_e, "нужен хотя бы один слот")
    if t_h < 0:
        raise InvalidArgumentError("t_h", t_h, "значение < 0")
    if node_index < 1:
        raise InvalidArgumentError(
            "node_index", node_index, "номер узла начинается с 1"
        )
    duty = t_e + t_h if t_h % t_e == 0 else t_e + t_h + 1
    return duty, (node_index - 1) * t_e


def harvest_slots(rate: float, bank: CapacitorBank, task: TaskSpec) -> int:
    """Слоты сбора, нужные для одной активации при скорости rate."""
    if rate <= 0:
        return 0
    need = math.ceil(task.activation_energy / (bank.charge_efficiency * rate))
    return max(0, need - task.runtime_slots)


def dc_sizing(
    rates: Sequence[float],
    bank: CapacitorBank,
    task: TaskSpec,
    n_nodes: int,
    basis: str = "mean",
) -> tuple[int, int]:
    """Подобрать (t_e, t_h) для DC.

    "mean": t_h по средней скорости сбора, но не меньше (N − 1)·t_e, чтобы
    смещённые окна узлов укладывались в цикл без наложения.
    "min": t_h по самому слабому узлу.

    Raises:
        ConfigurationError: Если basis неизвестен.
    """
    t_e = task.runtime_slots
    if basis == "mean":
        rate = float(np.mean(rates)) if len(rates) else 0.0
        return t_e, max(harvest_slots(rate, bank, task), (n_nodes - 1) * t_e)
    if basis == "min":
        rate = float(min(rates)) if len(rates) else 0.0
        return t_e, harvest_slots(rate, bank, task)
    raise ConfigurationError(
        "policy.dc_energy_basis", f"ожидается 'mean' или 'min', получено {basis!r}"
    )


def dc_required_nodes(t_e: int, duty_cycle: int) -> int:
    """Число узлов, при котором смещённые окна покрывают весь цикл."""
    return math.ceil(duty_cycle / t_e)


@register_policy
class DutyCyclePolicy(SchedulingPolicy):
    """DC: общий цикл для всех узлов со смещением (n − 1)·t_e."""

    kind = PolicyKind.DC

    def __init__(self, params: Mapping[str, Any], context: PolicyContext):
        super().__init__(params, context)
        basis = str(params.get("dc_energy_basis", "mean"))
        t_e, t_h = dc_sizing(
            context.harvest_rates, context.bank, context.task, context.n_nodes, basis
        )
        self.t_e = int(params.get("t_e", t_e))
        self.t_h = int(params.get("t_h", t_h))
        self.duty_cycle, self.offset = dc_schedule(
            self.t_e, self.t_h, context.node_index + 1
        )
        if context.node_index == 0:
            required = dc_required_nodes(self.t_e, self.duty_cycle)
            logger.info(
                f"DC schedule: t_e={self.t_e} t_h={self.t_h} duty={self.duty_cycle} "
                f"nodes={context.n_nodes} required={required}"
            )
            if required > context.n_nodes:
                logger.warning(
                    f"DC needs {required} nodes for full coverage, "
                    f"have {context.n_nodes}"
                )

    def setup(self, node: NodeState) -> None:
        node.duty_cycle = self.duty_cycle

    def decide(self, node: NodeState, local_slot: int) -> Verdict:
        position = local_slot - self.offset
        if position < 0 or position % self.duty_cycle != 0:
            return SLEEP
        if node.stored >= self.context.wake_threshold:
            return WAKE
        return Verdict(SLEEP.decision, idle_violation=True)

    def active_window(self, node: NodeState) -> int | None:
        return self.t_e

    def next_wake(self, node: NodeState, local_slot: int) -> WakeHint:
        position = max(local_slot - self.offset, 0)
        turns = -(-position // self.duty_cycle)
        return WakeHint(self.offset + turns * self.duty_cycle)

    def static_schedule(
        self, node: NodeState, local_slots: np.ndarray
    ) -> np.ndarray | None:
        position = local_slots - self.offset
        return (position >= 0) & (position % self.duty_cycle == 0)


# =============================================================================
# ACES
# =============================================================================

# Периоды действий и длина эпохи, секунды
ACES_PERIODS_S = (15.0, 60.0, 300.0, 900.0)
ACES_EPOCH_S = 900.0


def aces_periods(slot_duration: float) -> tuple[int, ...]:
    """Периоды действий ACES в слотах.

    Raises:
        ConfigurationError: Если длительность слота не делит 15 с.
    """
    ratio = ACES_PERIODS_S[0] / slot_duration
    if ratio < 1 or not math.isclose(ratio, round(ratio), rel_tol=0, abs_tol=1e-9):
        raise ConfigurationError(
            "sim.slot_duration", f"{slot_duration} с не делит 15 с (периоды ACES)"
        )
    return tuple(round(period / slot_duration) for period in ACES_PERIODS_S)


@dataclass(slots=True)
class AcesMemory:
    """Память ACES одного узла: одна строка Q по четырём периодам."""

    periods: tuple[int, ...]
    epoch_slots: int
    epsilon: float
    q: np.ndarray = field(default_factory=lambda: np.zeros(len(ACES_PERIODS_S)))
    action: int = 0
    epoch_index: int = -1
    scheduled: int = 0
    funded: int = 0
    brownouts: int = 0

    def epoch_reward(self) -> float:
        """Доля обеспеченных энергией активаций минус 1 за каждый провал питания."""
        share = self.funded / self.scheduled if self.scheduled else 0.0
        return share - self.brownouts


def aces_decide(
    memory: AcesMemory,
    epoch_clock: int,
    params: LearningParams,
    rng: np.random.Generator,
) -> int:
    """Период ACES (слоты) для текущей эпохи.

    При первом обращении в новой эпохе Q-строка обновляется наградой
    завершённой эпохи, затем ε-жадно выбирается новый период.

    Args:
        memory: Память ACES узла.
        epoch_clock: Локальный слот узла.
        params: Параметры обучения.
        rng: Генератор узла.

    Returns:
        Период активаций в слотах.
    """
    epoch = epoch_clock // memory.epoch_slots
    if epoch != memory.epoch_index:
        if memory.epoch_index >= 0:
            q_update(
                memory.q,
                memory.action,
                memory.epoch_reward(),
                float(memory.q.max()),
                params.alpha,
                params.gamma,
            )
        memory.action = epsilon_greedy(memory.q, memory.epsilon, rng)
        memory.epsilon = max(params.epsilon_min, memory.epsilon * params.epsilon_decay)
        memory.epoch_index = epoch
        memory.scheduled = memory.funded = memory.brownouts = 0
    return memory.periods[memory.action]


@register_policy
class AcesPolicy(SchedulingPolicy):
    """ACES: Q-обучение выбора периода раз в 15 минут.

    За период узел выполняет одну полную активацию (runtime_slots слотов).
    Узлы не координируются; сдвиг node_index·runtime_slots по модулю
    периода лишь разводит их старты.
    """

    kind = PolicyKind.ACES

    def __init__(self, params: Mapping[str, Any], context: PolicyContext):
        super().__init__(params, context)
        self.learning = LearningParams.from_mapping(params)
        self.periods = aces_periods(context.slot_duration)
        self.epoch_slots = round(ACES_EPOCH_S / context.slot_duration)

    def setup(self, node: NodeState) -> None:
        node.policy_memory["aces"] = AcesMemory(
            periods=self.periods,
            epoch_slots=self.epoch_slots,
            epsilon=self.learning.epsilon,
        )

    def phase(self, period: int) -> int:
        """Сдвиг пробуждений узла внутри периода."""
        return self.context.node_index * self.context.task.runtime_slots % period

    def _epoch_start(self, memory: AcesMemory, period: int) -> int:
        return memory.epoch_index * memory.epoch_slots + self.phase(period)

    def decide(self, node: NodeState, local_slot: int) -> Verdict:
        memory: AcesMemory = node.policy_memory["aces"]
        period = aces_decide(memory, local_slot, self.learning, self.context.rng)
        node.duty_cycle = period
        if (local_slot - self._epoch_start(memory, period)) % period != 0:
            return SLEEP
        memory.scheduled += 1
        if node.stored >= self.context.wake_threshold:
            memory.funded += 1
            return WAKE
        return Verdict(SLEEP.decision, idle_violation=True)

    def active_window(self, node: NodeState) -> int | None:
        return self.context.task.runtime_slots

    def next_wake(self, node: NodeState, local_slot: int) -> WakeHint:
        memory: AcesMemory = node.policy_memory["aces"]
        if local_slot // memory.epoch_slots != memory.epoch_index:
            return WakeHint(local_slot)
        period = memory.periods[memory.action]
        start = self._epoch_start(memory, period)
        scheduled = start - (start - local_slot) // period * period
        boundary = (memory.epoch_index + 1) * memory.epoch_slots
        return WakeHint(min(scheduled, boundary))

    def on_brownout(self, node: NodeState, slot: int) -> None:
        memory: AcesMemory = node.policy_memory["aces"]
        memory.brownouts += 1
