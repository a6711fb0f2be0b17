"""Модели данных для Swarm Scheduler.

Значимые типы (время слота, уровни энергии, накопитель, задачи, события)
неизменяемы; состояние узла изменяется только движком симуляции.
"""

from dataclasses import dataclass, field, replace
from enum import StrEnum
from typing import Any

from swarm_scheduler.core.exceptions import (
    EnergyUnderflowError,
    InvalidArgumentError,
)
from swarm_scheduler.core.utils import (
    validate_fraction,
    validate_non_negative,
    validate_positive,
)

# Диапазон допустимых ёмкостей, Ф
MIN_CAPACITANCE_F = 2.2e-9
MAX_CAPACITANCE_F = 1.0

# Типичное напряжение питания MSP430, В
DEFAULT_V_MAX = 3.3


# =============================================================================
# Перечисления
# =============================================================================


class Mode(StrEnum):
    """Режим узла в слоте."""

    ASLEEP = "asleep"
    ACTIVE = "active"


class Decision(StrEnum):
    """Решение политики для спящего узла."""

    WAKE = "wake"
    SLEEP = "sleep"


class JobOutcome(StrEnum):
    """Результат продвижения задачи на один слот."""

    IN_PROGRESS = "in_progress"
    PROCESSED_IN_DEADLINE = "processed_in_deadline"
    MISSED_DEADLINE = "missed_deadline"


class CaptureFeedback(StrEnum):
    """Локальная обратная связь узла о захвате события."""

    NONE = "none"
    CAPTURED_FROM_START = "captured_from_start"
    CAPTURED_MID_EVENT = "captured_mid_event"


# =============================================================================
# Время и энергия
# =============================================================================


@dataclass(frozen=True, slots=True)
class SlotTime:
    """Дискретное время сценария.

    Attributes:
        index: Номер слота (с нуля).
        slot_duration: Длительность слота в секундах, постоянна для сценария.
    """

    index: int
    slot_duration: float

    def __post_init__(self) -> None:
        if self.index < 0:
            raise InvalidArgumentError("index", self.index, "номер слота < 0")
        validate_positive("slot_duration", self.slot_duration)


@dataclass(frozen=True, slots=True)
class EnergyLevel:
    """Квантованный уровень энергии (кратный единичной энергии).

    Attributes:
        level: Число единиц энергии.
        unit_energy: Единичная энергия, мДж.
    """

    level: int
    unit_energy: float

    def __post_init__(self) -> None:
        if self.level < 0:
            raise InvalidArgumentError("level", self.level, "уровень < 0")
        validate_positive("unit_energy", self.unit_energy)

    @property
    def millijoules(self) -> float:
        """Энергия уровня в мДж."""
        return self.level * self.unit_energy


@dataclass(frozen=True, slots=True)
class CapacitorBank:
    """Накопитель энергии узла (конденсатор).

    Attributes:
        capacity: Ёмкость по энергии, мДж.
        stored: Запасённая энергия, мДж, в [0, capacity].
        charge_efficiency: КПД заряда, (0, 1].
        leakage_rate: Доля запаса, теряемая за слот, [0, 1).
        capacitance_label: Номинальная ёмкость, Ф (справочно).
    """

    capacity: float
    stored: float = 0.0
    charge_efficiency: float = 1.0
    leakage_rate: float = 0.0
    capacitance_label: float | None = None

    def __post_init__(self) -> None:
        validate_positive("capacity", self.capacity)
        validate_non_negative("stored", self.stored)
        if self.stored > self.capacity:
            raise InvalidArgumentError("stored", self.stored, "запас больше ёмкости")
        validate_fraction("charge_efficiency", self.charge_efficiency, low_open=True)
        validate_fraction("leakage_rate", self.leakage_rate, high_open=True)
        if self.capacitance_label is not None and not (
            MIN_CAPACITANCE_F <= self.capacitance_label <= MAX_CAPACITANCE_F
        ):
            raise InvalidArgumentError(
                "capacitance_label",
                self.capacitance_label,
                f"ожидается диапазон [{MIN_CAPACITANCE_F}, {MAX_CAPACITANCE_F}] Ф",
            )

    @classmethod
    def from_capacitance(
        cls,
        capacitance_f: float,
        v_max: float = DEFAULT_V_MAX,
        *,
        stored: float = 0.0,
        charge_efficiency: float = 1.0,
        leakage_rate: float = 0.0,
    ) -> "CapacitorBank":
        """Построить накопитель по ёмкости: E = ½·C·V², в мДж.

        Args:
            capacitance_f: Ёмкость, Ф (приводится к допустимому диапазону).
            v_max: Максимальное напряжение, В.
            stored: Начальный запас, мДж (обрезается по ёмкости).
            charge_efficiency: КПД заряда.
            leakage_rate: Доля саморазряда за слот.

        Returns:
            Новый CapacitorBank.
        """
        validate_positive("capacitance_f", capacitance_f)
        validate_positive("v_max", v_max)
        label = min(max(capacitance_f, MIN_CAPACITANCE_F), MAX_CAPACITANCE_F)
        capacity = 0.5 * label * v_max * v_max * 1000.0
        return cls(
            capacity=capacity,
            stored=min(stored, capacity),
            charge_efficiency=charge_efficiency,
            leakage_rate=leakage_rate,
            capacitance_label=label,
        )

    def with_stored(self, stored: float) -> "CapacitorBank":
        """Копия накопителя с другим запасом."""
        return replace(self, stored=stored)

    def draw(self, amount: float) -> "CapacitorBank":
        """Списать энергию без утечки и заряда.

        Raises:
            EnergyUnderflowError: Если amount больше запаса.
        """
        validate_non_negative("amount", amount)
        if amount > self.stored:
            raise EnergyUnderflowError(requested=amount, available=self.stored)
        return replace(self, stored=self.stored - amount)


# =============================================================================
# Задачи и события
# =============================================================================


@dataclass(frozen=True, slots=True)
class TaskSpec:
    """Задача, выполняемая узлом после захвата события.

    Attributes:
        name: Имя задачи.
        runtime_slots: Число слотов выполнения (>= 1).
        energy_per_slot: Энергия на слот активности, мДж.
        sensing_energy: Разовая энергия на захват, мДж.
        illustrative: Значения не измерены, а подставлены для примера.
    """

    name: str
    runtime_slots: int
    energy_per_slot: float
    sensing_energy: float = 0.0
    illustrative: bool = False

    def __post_init__(self) -> None:
        if not self.name or not self.name.strip():
            raise InvalidArgumentError("name", self.name, "имя задачи пустое")
        if self.runtime_slots < 1:
            raise InvalidArgumentError(
                "runtime_slots", self.runtime_slots, "нужен хотя бы один слот"
            )
        validate_positive("energy_per_slot", self.energy_per_slot)
        validate_non_negative("sensing_energy", self.sensing_energy)

    @property
    def activation_energy(self) -> float:
        """Энергия одной полной активации: захват плюс все слоты задачи."""
        return self.sensing_energy + self.energy_per_slot * self.runtime_slots


@dataclass(frozen=True, slots=True)
class Event:
    """Спорадическое событие.

    Attributes:
        id: Идентификатор события.
        start_slot: Слот начала.
        duration_slots: Длительность в слотах.
        deadline_slot: Крайний слот обработки (строго после начала).
    """

    id: int
    start_slot: int
    duration_slots: int
    deadline_slot: int

    def __post_init__(self) -> None:
        if self.start_slot < 0:
            raise InvalidArgumentError("start_slot", self.start_slot, "слот < 0")
        if self.duration_slots < 1:
            raise InvalidArgumentError(
                "duration_slots", self.duration_slots, "длительность < 1"
            )
        if self.deadline_slot <= self.start_slot:
            raise InvalidArgumentError(
                "deadline_slot", self.deadline_slot, "дедлайн не позже начала"
            )

    @property
    def end_slot(self) -> int:
        """Первый слот после окончания события."""
        return self.start_slot + self.duration_slots

    def is_ongoing(self, slot: int) -> bool:
        """Идёт ли событие в указанном слоте."""
        return self.start_slot <= slot < self.end_slot


# =============================================================================
# Состояние узла
# =============================================================================


@dataclass(slots=True)
class Job:
    """Незавершённая задача узла (прогресс сохраняется между отключениями)."""

    event_id: int
    remaining_slots: int
    deadline: int


@dataclass(slots=True)
class NodeState:
    """Состояние одного узла роя.

    Attributes:
        node_id: Номер узла.
        bank: Параметры накопителя и начальный запас.
        local_clock: Локальное (с дрейфом) время, секунды.
        mode: Режим в текущем слоте.
        duty_cycle: Текущий рабочий цикл в слотах (если есть).
        policy_memory: Память политики (Q-таблица, границы поиска и т.д.).
        job: Задача в работе.
        stored: Текущий запас энергии, мДж (движок меняет его на месте).
    """

    node_id: int
    bank: CapacitorBank
    local_clock: float = 0.0
    mode: Mode = Mode.ASLEEP
    duty_cycle: int | None = None
    policy_memory: dict[str, Any] = field(default_factory=dict)
    job: Job | None = None
    stored: float = field(init=False)

    def __post_init__(self) -> None:
        self.stored = self.bank.stored

    @property
    def is_active(self) -> bool:
        """Активен ли узел."""
        return self.mode is Mode.ACTIVE

    @property
    def is_busy(self) -> bool:
        """Есть ли у узла задача в работе."""
        return self.job is not None
