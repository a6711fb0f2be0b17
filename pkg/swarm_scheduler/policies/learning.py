"""Табличное Q-обучение: функция награды, ε-жадный выбор и эвристика SRL.

SRL (Suboptimal Reinforcement Learning): каждый узел держит локальную
Q-таблицу; состояние - (число полных активаций в запасе, ограниченное
сверху, и индекс текущего цикла), действие - выбор следующего цикла из
набора PCP. Решение пересматривается на каждой границе завершённого цикла.

Выбор идёт по сумме Q-строки и априорной таблицы переходов: узел знает
номинальные скорости сбора остальных узлов и предпочитает цикл, который
по плану PCP достался бы узлу с его текущей измеренной скоростью.
"""

import logging
from collections import deque
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from swarm_scheduler.core.energy import quantize_energy
from swarm_scheduler.core.exceptions import InvalidArgumentError
from swarm_scheduler.core.models import CaptureFeedback, JobOutcome, NodeState
from swarm_scheduler.core.utils import validate_fraction
from swarm_scheduler.policies.base import (
    SLEEP,
    Observation,
    PolicyContext,
    PolicyKind,
    Verdict,
)
from swarm_scheduler.policies.heuristics import CycleSchedulePolicy
from swarm_scheduler.policies.registry import register_policy

logger = logging.getLogger(__name__)

# Число корзин уровня энергии в состоянии SRL
DEFAULT_ENERGY_BUCKETS = 8

# Вес априорной таблицы переходов в сумме с Q-строкой
DEFAULT_PRIOR_WEIGHT = 10.0

State = tuple[int, int]


# =============================================================================
# Параметры обучения
# =============================================================================


@dataclass(frozen=True, slots=True)
class LearningParams:
    """Параметры Q-обучения.

    Attributes:
        alpha: Скорость обучения, (0, 1].
        gamma: Коэффициент дисконтирования для бутстрэпа, [0, 1].
        epsilon: Начальная вероятность исследования, [0, 1].
        epsilon_decay: Множитель ε после каждого решения, (0, 1].
        epsilon_min: Нижняя граница ε.
    """

    alpha: float = 0.1
    gamma: float = 0.9
    epsilon: float = 0.2
    epsilon_decay: float = 0.999
    epsilon_min: float = 0.0

    def __post_init__(self) -> None:
        validate_fraction("alpha", self.alpha, low_open=True)
        validate_fraction("gamma", self.gamma)
        validate_fraction("epsilon", self.epsilon)
        validate_fraction("epsilon_decay", self.epsilon_decay, low_open=True)
        validate_fraction("epsilon_min", self.epsilon_min)

    @classmethod
    def from_mapping(cls, params: Mapping[str, Any]) -> "LearningParams":
        """Собрать параметры из словаря политики, игнорируя чужие ключи."""
        known = {
            name: params[name] for name in cls.__dataclass_fields__ if name in params
        }
        return cls(**known)


# =============================================================================
# Примитивы Q-обучения
# =============================================================================


def epsilon_greedy(q_row: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
    """ε-жадный выбор действия; при равенстве Q - меньший индекс.

    Example:
        >>> epsilon_greedy(np.array([0.0, 0.7, 0.3]), 0.0, rng)
        1
    """
    if len(q_row) == 0:
        raise InvalidArgumentError("q_row", q_row, "нет действий")
    if rng.random() < epsilon:
        return int(rng.integers(len(q_row)))
    return int(np.argmax(q_row))


def q_update(
    q_row: np.ndarray,
    action: int,
    reward_value: float,
    next_max: float,
    alpha: float,
    gamma: float,
) -> float:
    """Табличное обновление Q(s,a) ← Q(s,a) + α·(r + γ·max Q(s′) − Q(s,a)).

    Изменяет q_row на месте и возвращает новое значение.

    Example:
        Q=0, r=1, α=0.1, γ=0 → 0.1
    """
    q_row[action] += alpha * (reward_value + gamma * next_max - q_row[action])
    return float(q_row[action])


def reward(observation: Observation, rng: np.random.Generator) -> float:
    """Награда за наблюдение узла.

    +1 за захват с начала и обработку в срок; случайная в [-1, 0) за
    пробуждение посреди события; 0 в остальных случаях.
    """
    feedback = observation.capture_feedback
    if (
        feedback is CaptureFeedback.CAPTURED_FROM_START
        and observation.job_outcome is JobOutcome.PROCESSED_IN_DEADLINE
    ):
        return 1.0
    if feedback is CaptureFeedback.CAPTURED_MID_EVENT:
        return float(rng.uniform(-1.0, 0.0))
    return 0.0


# =============================================================================
# SRL
# =============================================================================


@dataclass(slots=True)
class SrlMemory:
    """Память SRL одного узла.

    Attributes:
        n_actions: Число действий (циклов PCP).
        epsilon: Текущая вероятность исследования.
        q: Q-таблица: состояние -> строка значений по действиям.
        state: Последнее состояние (None до первого решения).
        action: Последнее выбранное действие.
        pending_reward: Награда, накопленная за текущий цикл.
        harvested: Недавняя собранная энергия по слотам.
    """

    n_actions: int
    epsilon: float
    q: dict[State, np.ndarray] = field(default_factory=dict)
    state: State | None = None
    action: int = 0
    pending_reward: float = 0.0
    harvested: deque[float] = field(default_factory=deque)

    def row(self, state: State) -> np.ndarray:
        """Строка Q-таблицы (создаётся нулевой при первом обращении)."""
        if state not in self.q:
            self.q[state] = np.zeros(self.n_actions)
        return self.q[state]


def energy_bucket(stored: float, unit_energy: float, buckets: int) -> int:
    """Корзина уровня энергии: квантованный уровень, ограниченный сверху."""
    return min(quantize_energy(stored, unit_energy).level, buckets - 1)


def ranked_index(
    rate: float, node_index: int, nominal: Sequence[float], size: int
) -> int:
    """Индекс цикла, который план PCP дал бы узлу со скоростью rate.

    Узел ранжируется среди номинальных скоростей остальных узлов так же,
    как при назначении циклов: больше энергии - раньше, при равенстве -
    меньший индекс узла.

    Example:
        rate=5, номинальные скорости (9, 5, 1), узел 1 → 1.
    """
    ahead = sum(
        1
        for other, other_rate in enumerate(nominal)
        if other != node_index
        and (other_rate > rate or (other_rate == rate and other < node_index))
    )
    return min(ahead, size - 1)


def srl_update(
    memory: SrlMemory,
    next_state: State,
    reward_value: float,
    params: LearningParams,
    rng: np.random.Generator,
    prior: np.ndarray | None = None,
) -> int:
    """Обновить Q-таблицу за завершённый цикл и выбрать следующий цикл.

    Args:
        memory: Память SRL узла.
        next_state: Новое состояние (корзина энергии, индекс цикла).
        reward_value: Награда, накопленная за цикл.
        params: Параметры обучения.
        rng: Генератор узла.
        prior: Априорные предпочтения действий; выбор идёт по Q + prior,
            а обновление касается только Q.

    Returns:
        Индекс выбранного цикла.
    """
    next_row = memory.row(next_state)
    if memory.state is not None:
        q_update(
            memory.row(memory.state),
            memory.action,
            reward_value,
            float(next_row.max()),
            params.alpha,
            params.gamma,
        )
    scores = next_row if prior is None else next_row + prior
    action = epsilon_greedy(scores, memory.epsilon, rng)
    memory.epsilon = max(params.epsilon_min, memory.epsilon * params.epsilon_decay)
    memory.state = next_state
    memory.action = action
    return action


@register_policy
class SrlPolicy(CycleSchedulePolicy):
    """SRL: выбор цикла PCP локальным Q-обучением по наградам захвата."""

    kind = PolicyKind.SRL

    def __init__(self, params: Mapping[str, Any], context: PolicyContext):
        super().__init__(params, context)
        self.learning = LearningParams.from_mapping(params)
        self.buckets = int(params.get("energy_buckets", DEFAULT_ENERGY_BUCKETS))
        if self.buckets < 1:
            raise InvalidArgumentError(
                "energy_buckets", self.buckets, "нужна хотя бы одна корзина"
            )
        # по умолчанию ширина корзины - энергия одной активации
        self.bucket_energy = float(
            params.get("bucket_energy_mj", context.wake_threshold)
        )
        if self.bucket_energy <= 0:
            raise InvalidArgumentError(
                "bucket_energy_mj", self.bucket_energy, "ширина корзины должна быть > 0"
            )
        self.prior_weight = float(params.get("prior_weight", DEFAULT_PRIOR_WEIGHT))
        if self.prior_weight < 0:
            raise InvalidArgumentError(
                "prior_weight", self.prior_weight, "вес не может быть отрицательным"
            )

    def setup(self, node: NodeState) -> None:
        super().setup(node)
        if node.duty_cycle is None:
            return
        memory = SrlMemory(
            n_actions=len(self.cycles),
            epsilon=self.learning.epsilon,
            harvested=deque(maxlen=max(self.cycles)),
        )
        memory.state = self._state(node)
        memory.action = self.duty_set.index_of(node.duty_cycle)
        node.policy_memory["srl"] = memory

    def _state(self, node: NodeState) -> State:
        bucket = energy_bucket(node.stored, self.bucket_energy, self.buckets)
        return bucket, self.duty_set.index_of(node.duty_cycle)

    def prior(self, memory: SrlMemory) -> np.ndarray:
        """Априорная строка: вес на цикле для измеренной скорости сбора."""
        context = self.context
        if memory.harvested:
            rate = float(np.mean(memory.harvested))
        else:
            rate = context.harvest_rates[context.node_index]
        size = len(self.cycles)
        target = ranked_index(rate, context.node_index, context.harvest_rates, size)
        row = np.zeros(size)
        row[max(target, self.floor_index(rate))] = self.prior_weight
        return row

    def decide(self, node: NodeState, local_slot: int) -> Verdict:
        if node.duty_cycle is None:
            return SLEEP
        verdict, scheduled = self.scheduled_verdict(node, local_slot)
        if scheduled:
            memory: SrlMemory = node.policy_memory["srl"]
            gained = memory.pending_reward
            memory.pending_reward = 0.0
            action = srl_update(
                memory,
                self._state(node),
                gained,
                self.learning,
                self.context.rng,
                prior=self.prior(memory),
            )
            if self.cycles[action] != node.duty_cycle:
                logger.debug(
                    f"SRL node {node.node_id}: "
                    f"cycle {node.duty_cycle} -> {self.cycles[action]}"
                )
            node.duty_cycle = self.cycles[action]
        return verdict

    def observe(self, node: NodeState, observation: Observation) -> float | None:
        memory: SrlMemory | None = node.policy_memory.get("srl")
        if memory is None:
            return None
        gained = reward(observation, self.context.reward_rng)
        memory.pending_reward += gained
        return gained

    def on_slot_end(
        self, node: NodeState, local_slot: int, harvested: float, overflow: float
    ) -> None:
        memory: SrlMemory | None = node.policy_memory.get("srl")
        if memory is not None:
            memory.harvested.append(harvested)

    def on_span_end(
        self, node: NodeState, harvested: np.ndarray, overflow: np.ndarray
    ) -> None:
        memory: SrlMemory | None = node.policy_memory.get("srl")
        if memory is not None:
            memory.harvested.extend(harvested[-memory.harvested.maxlen :].tolist())
