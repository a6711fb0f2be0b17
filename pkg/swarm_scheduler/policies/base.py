"""Базовые типы политик сна/пробуждения.

Содержит абстрактный класс SchedulingPolicy, контекст политики, наблюдения
и разбор спецификации политики вида "GRDY" или "GRDY:1".
"""

from abc import ABC, abstractmethod
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any, ClassVar, NamedTuple

import numpy as np

from swarm_scheduler.core.exceptions import PolicyNotFoundError
from swarm_scheduler.core.models import (
    CapacitorBank,
    CaptureFeedback,
    Decision,
    EnergyLevel,
    JobOutcome,
    NodeState,
    SlotTime,
    TaskSpec,
)
from swarm_scheduler.core.pcp import Assignment, DutyCycleSet, OverlapMode

# =============================================================================
# Виды политик и спецификация
# =============================================================================


class PolicyKind(StrEnum):
    """Виды политик."""

    ORCL = "ORCL"
    GRDY = "GRDY"
    DC = "DC"
    PCP_STATIC = "PCP_STATIC"
    ACES = "ACES"
    RBS = "RBS"
    SRL = "SRL"


# Синонимы для командной строки
_ALIASES = {"PCP": PolicyKind.PCP_STATIC}


def parse_policy_kind(name: str) -> PolicyKind:
    """Разобрать имя политики (регистр не важен).

    Raises:
        PolicyNotFoundError: Если имя неизвестно.
    """
    key = name.strip().upper()
    if key in _ALIASES:
        return _ALIASES[key]
    try:
        return PolicyKind(key)
    except ValueError as e:
        raise PolicyNotFoundError(name) from e


@dataclass(frozen=True, slots=True)
class PolicySpec:
    """Выбранная политика и её параметры.

    Attributes:
        kind: Вид политики.
        node_limit: Ограничение числа узлов (например, 1 для GRDY(1)).
        params: Параметры политики из конфигурации.
    """

    kind: PolicyKind
    node_limit: int | None = None
    params: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str, params: Mapping[str, Any] | None = None) -> "PolicySpec":
        """Разобрать строку "KIND" или "KIND:n".

        Raises:
            PolicyNotFoundError: Если вид неизвестен или n некорректно.
        """
        name, _, limit = text.partition(":")
        node_limit: int | None = None
        if limit:
            if not limit.isdigit() or int(limit) < 1:
                raise PolicyNotFoundError(text)
            node_limit = int(limit)
        return cls(
            kind=parse_policy_kind(name), node_limit=node_limit, params=params or {}
        )

    @property
    def label(self) -> str:
        """Подпись для отчётов: GRDY(1), PCP_STATIC, ..."""
        if self.node_limit is None:
            return self.kind.value
        return f"{self.kind.value}({self.node_limit})"


# =============================================================================
# Наблюдения и вердикты
# =============================================================================


@dataclass(frozen=True, slots=True)
class Observation:
    """Локальное наблюдение узла в слоте.

    Attributes:
        slot: Слот (глобальное время).
        local_energy: Квантованный запас энергии.
        stored: Запас энергии, мДж.
        capture_feedback: Обратная связь о захвате.
        job_outcome: Исход задачи (если задача завершилась в этом слоте).
    """

    slot: SlotTime
    local_energy: EnergyLevel
    stored: float
    capture_feedback: CaptureFeedback = CaptureFeedback.NONE
    job_outcome: JobOutcome | None = None


class Verdict(NamedTuple):
    """Решение политики и признак пропуска по расписанию из-за нехватки энергии."""

    decision: Decision
    idle_violation: bool = False


SLEEP = Verdict(Decision.SLEEP)
WAKE = Verdict(Decision.WAKE)


class WakeHint(NamedTuple):
    """Когда спящему узлу без задачи снова понадобится decide().

    Attributes:
        slot: Ближайший локальный слот, где решение может измениться
            (None - по расписанию никогда).
        energy: Запас, с которым узел просыпается в любом слоте, мДж
            (None - решение не зависит только от запаса).
    """

    slot: int | None
    energy: float | None = None


# =============================================================================
# Контекст
# =============================================================================


@dataclass(slots=True)
class PolicyContext:
    """Неизменяемые для сценария данные, доступные политике узла.

    Attributes:
        task: Выполняемая задача.
        bank: Шаблон накопителя.
        slot_duration: Длительность слота, с.
        n_nodes: Число узлов в сценарии.
        node_index: Позиция узла (0..n-1) в порядке node_id.
        harvest_rates: Номинальные скорости сбора всех узлов (априорное знание).
        duty_set: Набор циклов PCP.
        assignment: Назначение циклов PCP.
        wake_threshold: Минимальный запас для пробуждения по расписанию, мДж.
        unit_energy: Единичная энергия для квантования, мДж.
        wrap_hyperperiod: Брать локальный слот по модулю гиперпериода.
        listen_slots: Длина окна прослушивания при пустом пробуждении.
        pcp_overlap: Кто просыпается в слотах, кратных нескольким циклам PCP.
        rng: Генератор случайности узла (исследование).
        reward_rng: Генератор случайных отрицательных наград.
    """

    task: TaskSpec
    bank: CapacitorBank
    slot_duration: float
    n_nodes: int
    node_index: int
    harvest_rates: tuple[float, ...]
    duty_set: DutyCycleSet | None
    assignment: Assignment | None
    wake_threshold: float
    unit_energy: float
    wrap_hyperperiod: bool = True
    listen_slots: int = 1
    pcp_overlap: OverlapMode = OverlapMode.OWNER
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    reward_rng: np.random.Generator = field(default_factory=np.random.default_rng)


# =============================================================================
# Абстрактная политика
# =============================================================================


class SchedulingPolicy(ABC):
    """Абстрактная политика одного узла.

    Экземпляр привязан к одному узлу; узлы не разделяют память политик.
    Глобальные политики (оракул) решают за весь рой в движке.
    """

    kind: ClassVar[PolicyKind]
    is_global: ClassVar[bool] = False

    def __init__(self, params: Mapping[str, Any], context: PolicyContext):
        self.params = dict(params)
        self.context = context

    def setup(self, node: NodeState) -> None:
        """Инициализировать память политики у узла перед первым слотом."""

    @abstractmethod
    def decide(self, node: NodeState, local_slot: int) -> Verdict:
        """Решение для спящего узла без задачи."""

    def active_window(self, node: NodeState) -> int | None:
        """Сколько слотов оставаться активным после пробуждения.

        None означает "пока хватает энергии на слот".
        """
        return self.context.listen_slots

    def observe(self, node: NodeState, observation: Observation) -> float | None:
        """Принять обратную связь (захват, исход задачи).

        Returns:
            Начисленная награда или None для политик без обучения.
        """
        return None

    def on_brownout(self, node: NodeState, slot: int) -> None:
        """Узел потерял питание посреди активности."""

    def on_slot_end(
        self, node: NodeState, local_slot: int, harvested: float, overflow: float
    ) -> None:
        """Конец слота: энергия, собранная и отброшенная на ограничении."""

    # -------------------------------------------------------------------------
    # Подсказки движку для пропуска сна
    # -------------------------------------------------------------------------

    def next_wake(self, node: NodeState, local_slot: int) -> WakeHint:
        """Когда спящему узлу без задачи снова понадобится decide().

        Контракт: в локальных слотах [local_slot, hint.slot), пока запас
        ниже hint.energy, decide() вернул бы Sleep без побочных эффектов.
        По умолчанию решение нужно в каждом слоте.
        """
        return WakeHint(local_slot)

    def static_schedule(
        self, node: NodeState, local_slots: np.ndarray
    ) -> np.ndarray | None:
        """Маска слотов неизменного расписания для массива локальных слотов.

        Политика с неизменным расписанием возвращает маску, и тогда в
        отмеченном слоте decide() даёт ровно Wake при запасе не ниже
        wake_threshold, иначе Sleep с пропуском; в прочих слотах - Sleep.
        Окно active_window у такой политики постоянно, а на пустых
        пробуждениях движок не вызывает on_slot_end.
        None - расписание меняется по ходу прогона.
        """
        return None

    def on_span_end(
        self, node: NodeState, harvested: np.ndarray, overflow: np.ndarray
    ) -> None:
        """Узел проспал подряд несколько слотов; то же, что on_slot_end по каждому."""

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(params={self.params})"
