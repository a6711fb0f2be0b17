"""Офлайн-выбор рабочих циклов Prime-Co-Prime (PCP).

Алгоритм:
    1. Гиперпериод T - НОК периодов событий.
    2. Решето по возрастанию q от Q до T: q выбирается, если не делится ни на
       одно ранее выбранное значение. Это простые числа из [Q, T] плюс
       взаимно простые с ними составные (для Q = 3, T = 15 это {3,4,5,7,11,13}).
    3. Самый короткий цикл получает узел с наибольшей скоростью сбора энергии.
    4. Слот гиперпериода, кратный нескольким циклам, по умолчанию достаётся
       наименьшему из них (режим OWNER); режим SHARED будит всех.
"""

import functools
import logging
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from swarm_scheduler.core.exceptions import (
    HyperperiodOverflowError,
    InsufficientNodesError,
    InvalidArgumentError,
)
from swarm_scheduler.core.models import CapacitorBank, TaskSpec

logger = logging.getLogger(__name__)

# Предел гиперпериода (знаковое 64-битное целое)
MAX_HYPERPERIOD = 2**63 - 1


# =============================================================================
# Типы
# =============================================================================


class OverlapMode(StrEnum):
    """Кто просыпается в слоте, кратном нескольким циклам набора."""

    OWNER = "owner"
    SHARED = "shared"


@dataclass(frozen=True, slots=True)
class DutyCycleSet:
    """Набор рабочих циклов PCP.

    Attributes:
        min_cycle: Наименьший допустимый цикл Q (>= 2).
        hyperperiod: Гиперпериод T (>= Q).
        cycles: Отсортированные различные циклы из [Q, T].
    """

    min_cycle: int
    hyperperiod: int
    cycles: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.min_cycle < 2:
            raise InvalidArgumentError(
                "min_cycle", self.min_cycle, "Q должно быть >= 2"
            )
        if self.hyperperiod < self.min_cycle:
            raise InvalidArgumentError("hyperperiod", self.hyperperiod, "T < Q")
        if list(self.cycles) != sorted(set(self.cycles)):
            raise InvalidArgumentError("cycles", self.cycles, "циклы не упорядочены")
        for cycle in self.cycles:
            if not self.min_cycle <= cycle <= self.hyperperiod:
                raise InvalidArgumentError("cycles", cycle, "цикл вне [Q, T]")

    def __len__(self) -> int:
        return len(self.cycles)

    def __iter__(self) -> Iterator[int]:
        return iter(self.cycles)

    def index_of(self, cycle: int) -> int:
        """Индекс цикла в отсортированном списке."""
        return self.cycles.index(cycle)


@dataclass(frozen=True, slots=True)
class Assignment:
    """Назначение циклов узлам.

    Attributes:
        pairs: Пары (node_id, cycle) в порядке возрастания цикла.
        phase: Смещение старта узла в слотах (по умолчанию 0).
    """

    pairs: tuple[tuple[int, int], ...]
    phase: dict[int, int] = field(default_factory=dict)

    def cycle_of(self, node_id: int) -> int | None:
        """Цикл узла или None, если узел без цикла (резервный)."""
        for assigned_node, cycle in self.pairs:
            if assigned_node == node_id:
                return cycle
        return None

    def phase_of(self, node_id: int) -> int:
        """Смещение узла."""
        return self.phase.get(node_id, 0)

    @property
    def nodes(self) -> tuple[int, ...]:
        """Узлы, получившие цикл."""
        return tuple(node_id for node_id, _ in self.pairs)


@dataclass(frozen=True, slots=True)
class CoverageReport:
    """Отчёт о покрытии слотов [Q, T] набором циклов.

    Attributes:
        covered: Каждый слот из [Q, T] делится хотя бы на один цикл.
        uncovered_slots: Слоты без делителя в наборе.
        counts: Число активных узлов для слотов Q..T (массив numpy).
        first_slot: Слот, соответствующий counts[0] (равен Q).
    """

    covered: bool
    uncovered_slots: list[int]
    counts: np.ndarray
    first_slot: int

    @property
    def multiplicity(self) -> dict[int, int]:
        """Соответствие слот -> число активных узлов."""
        return {
            self.first_slot + offset: int(count)
            for offset, count in enumerate(self.counts)
        }

    @property
    def redundant_slots(self) -> list[int]:
        """Слоты, где по расписанию активно больше одного узла."""
        return [
            self.first_slot + int(offset) for offset in np.flatnonzero(self.counts > 1)
        ]


@dataclass(frozen=True, slots=True)
class PcpPlan:
    """Полный офлайн-план PCP для сценария."""

    duty_set: DutyCycleSet
    assignment: Assignment
    infeasible_nodes: tuple[int, ...] = ()
    overlap: OverlapMode = OverlapMode.OWNER


class WakeSchedule:
    """Слоты пробуждения по циклам PCP.

    В режиме OWNER позиция принадлежит наименьшему циклу набора, который её
    делит, и просыпается только узел с этим циклом. В режиме SHARED
    просыпается каждый узел, чей цикл делит позицию. Позиция - локальный
    слот минус фаза узла, при wrap взятая по модулю гиперпериода.
    """

    def __init__(
        self,
        duty_set: DutyCycleSet,
        overlap: OverlapMode = OverlapMode.OWNER,
        wrap: bool = True,
    ):
        self.duty_set = duty_set
        self.overlap = OverlapMode(overlap)
        self.period: int | None = duty_set.hyperperiod if wrap else None
        self._owners = owner_table(duty_set) if wrap else None
        self._positions: dict[int, np.ndarray] = {}

    def owner(self, position: int) -> int | None:
        """Цикл-владелец позиции или None, если её не делит ни один цикл."""
        if self._owners is not None:
            return int(self._owners[position % self.period]) or None
        for cycle in self.duty_set.cycles:
            if position % cycle == 0:
                return cycle
        return None

    def is_scheduled(self, local_slot: int, cycle: int, phase: int = 0) -> bool:
        """Просыпается ли узел с циклом cycle в локальном слоте."""
        position = local_slot - phase
        if position < 0:
            return False
        if self.overlap is OverlapMode.SHARED:
            if self.period is not None:
                position %= self.period
            return position % cycle == 0
        return self.owner(position) == cycle

    def mask(self, local_slots: np.ndarray, cycle: int, phase: int = 0) -> np.ndarray:
        """Векторный is_scheduled для массива локальных слотов."""
        position = np.asarray(local_slots, dtype=np.int64) - phase
        valid = position >= 0
        position = np.maximum(position, 0)
        if self.period is not None:
            position %= self.period
        if self.overlap is OverlapMode.SHARED:
            return valid & (position % cycle == 0)
        if self.period is not None:
            return valid & (self._owners[position] == cycle)
        if cycle not in self.duty_set.cycles:
            return np.zeros(position.shape, dtype=bool)
        hit = valid & (position % cycle == 0)
        for smaller in self.duty_set.cycles:
            if smaller >= cycle:
                break
            hit &= position % smaller != 0
        return hit

    def positions(self, cycle: int) -> np.ndarray:
        """Позиции пробуждения цикла внутри гиперпериода (только при wrap)."""
        cached = self._positions.get(cycle)
        if cached is None:
            slots = np.arange(self.period)
            if self.overlap is OverlapMode.SHARED:
                cached = np.flatnonzero(slots % cycle == 0)
            else:
                cached = np.flatnonzero(self._owners == cycle)
            self._positions[cycle] = cached
        return cached

    def next_scheduled(self, local_slot: int, cycle: int, phase: int = 0) -> int | None:
        """Ближайший локальный слот >= local_slot по расписанию цикла.

        Returns:
            Локальный слот или None, если цикл не просыпается никогда.
        """
        base = max(local_slot - phase, 0)
        if self.period is not None:
            positions = self.positions(cycle)
            if positions.size == 0:
                return None
            # ближайшая позиция в этом гиперпериоде или первая в следующем
            turn, offset = divmod(base, self.period)
            index = int(np.searchsorted(positions, offset))
            if index == positions.size:
                turn, index = turn + 1, 0
            return phase + turn * self.period + int(positions[index])
        if self.overlap is OverlapMode.OWNER and cycle not in self.duty_set.cycles:
            return None
        # без wrap: кратные цикла подряд, пока позицию не заберёт меньший цикл
        candidate = -(-base // cycle) * cycle
        while not self.is_scheduled(candidate + phase, cycle, phase):
            candidate += cycle
        return candidate + phase


# =============================================================================
# Операции
# =============================================================================


def hyperperiod(periods: Sequence[int], limit: int = MAX_HYPERPERIOD) -> int:
    """Гиперпериод - НОК всех периодов.

    Args:
        periods: Непустой список периодов (>= 1).
        limit: Наибольшее допустимое значение результата.

    Returns:
        НОК периодов.

    Raises:
        InvalidArgumentError: Если список пуст или период < 1.
        HyperperiodOverflowError: Если НОК превышает limit.

    Example:
        >>> hyperperiod([3, 5])
        15
    """
    if not periods:
        raise InvalidArgumentError("periods", periods, "список периодов пуст")
    result = 1
    for period in periods:
        if not isinstance(period, int) or period < 1:
            raise InvalidArgumentError("periods", period, "период должен быть >= 1")
        result = math.lcm(result, period)
        if result > limit:
            raise HyperperiodOverflowError(list(periods), limit)
    return result


def scenario_hyperperiod(period_range: tuple[int, int]) -> int:
    """Гиперпериод сценария по границам диапазона периодов событий."""
    low, high = period_range
    return hyperperiod(sorted({int(low), int(high)}))


def _check_bounds(min_cycle: int, hyper: int) -> None:
    if min_cycle < 2:
        raise InvalidArgumentError("Q", min_cycle, "наименьший цикл должен быть >= 2")
    if hyper < min_cycle:
        raise InvalidArgumentError("T", hyper, "гиперпериод меньше наименьшего цикла")


def select_duty_cycles(min_cycle: int, hyper: int) -> DutyCycleSet:
    """Выбрать набор циклов решетом Эратосфена на [Q, T].

    q выбирается, если не делится ни на один ранее выбранный цикл.

    Args:
        min_cycle: Наименьший допустимый цикл Q.
        hyper: Гиперпериод T.

    Returns:
        DutyCycleSet с выбранными циклами.

    Raises:
        InvalidArgumentError: Если Q < 2 или T < Q.

    Example:
        >>> select_duty_cycles(3, 15).cycles
        (3, 4, 5, 7, 11, 13)
    """
    _check_bounds(min_cycle, hyper)
    struck = np.zeros(hyper + 1, dtype=bool)
    cycles: list[int] = []
    for candidate in range(min_cycle, hyper + 1):
        if not struck[candidate]:
            cycles.append(candidate)
            # все кратные выбранного цикла уже покрыты
            struck[candidate::candidate] = True
    return DutyCycleSet(min_cycle=min_cycle, hyperperiod=hyper, cycles=tuple(cycles))


def min_node_count(min_cycle: int, hyper: int) -> int:
    """Минимальное число узлов для непрерывного покрытия [Q, T]."""
    return len(select_duty_cycles(min_cycle, hyper))


def owner_table(duty_set: DutyCycleSet) -> np.ndarray:
    """Цикл-владелец каждой позиции гиперпериода.

    Returns:
        Массив длины T: owners[p] - наименьший цикл набора, делящий p
        (позиция 0 соответствует T), или 0 для непокрытых позиций 1..Q-1.

    Example:
        Для {3, 4, 5, 7, 11, 13} и T = 15: owners[12] == 3, owners[0] == 3.
    """
    hyper = duty_set.hyperperiod
    owners = np.zeros(hyper + 1, dtype=np.int64)
    # от большего к меньшему: наименьший делитель записывается последним
    for cycle in reversed(duty_set.cycles):
        owners[cycle::cycle] = cycle
    owners[0] = owners[hyper]
    return owners[:hyper]


@functools.cache
def wake_schedule(
    duty_set: DutyCycleSet, overlap: OverlapMode = OverlapMode.OWNER, wrap: bool = True
) -> WakeSchedule:
    """Общее для узлов сценария расписание (кешируется по набору циклов)."""
    return WakeSchedule(duty_set, overlap, wrap)


def verify_coverage(
    duty_set: DutyCycleSet, overlap: OverlapMode = OverlapMode.SHARED
) -> CoverageReport:
    """Проверить, что каждый слот из [Q, T] делится на один из циклов.

    Слоты 1..Q-1 гиперпериода не входят в гарантию покрытия. В режиме
    SHARED counts - число циклов-делителей слота, в режиме OWNER - число
    узлов, просыпающихся в слоте по расписанию (0 или 1).
    """
    first, last = duty_set.min_cycle, duty_set.hyperperiod
    counts = np.zeros(last + 1, dtype=np.int64)
    if OverlapMode(overlap) is OverlapMode.OWNER:
        owners = owner_table(duty_set)
        # позиция 0 таблицы владельцев - это слот T
        counts[1:last] = owners[1:] > 0
        counts[last] = owners[0] > 0
    else:
        for cycle in duty_set.cycles:
            counts[cycle::cycle] += 1
    # гарантия покрытия начинается с Q
    window = counts[first : last + 1]
    uncovered = [first + int(offset) for offset in np.flatnonzero(window == 0)]
    return CoverageReport(
        covered=not uncovered,
        uncovered_slots=uncovered,
        counts=window,
        first_slot=first,
    )


def assign_duty_cycles(
    harvest_rates: Sequence[tuple[int, float]], duty_set: DutyCycleSet
) -> Assignment:
    """Назначить циклы узлам: больше энергии - короче цикл.

    Узлы сортируются по убыванию скорости сбора (при равенстве - по
    возрастанию node_id); лишние узлы остаются без цикла.

    Raises:
        InsufficientNodesError: Если узлов меньше, чем циклов.
    """
    if len(harvest_rates) < len(duty_set):
        raise InsufficientNodesError(
            available=len(harvest_rates), required=len(duty_set)
        )
    # больше энергии - раньше; при равенстве меньший node_id
    ranked = sorted(harvest_rates, key=lambda item: (-item[1], item[0]))
    # узлы сверх числа циклов остаются в резерве
    pairs = tuple(
        (node_id, cycle)
        for (node_id, _), cycle in zip(ranked, duty_set.cycles, strict=False)
    )
    return Assignment(pairs=pairs)


def feasibility_check(
    cycle: int, rate: float, bank: CapacitorBank, task: TaskSpec
) -> bool:
    """Может ли узел накопить одну полную активацию за цикл.

    Args:
        cycle: Рабочий цикл в слотах (>= 1).
        rate: Скорость сбора, мДж/слот (>= 0).
        bank: Шаблон накопителя (КПД и ёмкость).
        task: Выполняемая задача.

    Returns:
        True, если eff·rate·cycle >= энергии активации и ёмкость её вмещает.
    """
    need = task.activation_energy
    if bank.capacity < need:
        return False
    return bank.charge_efficiency * rate * cycle >= need


def lowest_allowed_cycle(
    rate: float, bank: CapacitorBank, task: TaskSpec
) -> int | None:
    """Наименьший цикл (>= 2), выполнимый при данной скорости сбора.

    Returns:
        Цикл в слотах или None, если активация невозможна вовсе.
    """
    if rate <= 0 or bank.capacity < task.activation_energy:
        return None
    cycle = max(2, math.ceil(task.activation_energy / (bank.charge_efficiency * rate)))
    # ceil может недобрать из-за округления
    while not feasibility_check(cycle, rate, bank, task):
        cycle += 1
    return cycle


def plan_pcp(
    harvest_rates: Sequence[tuple[int, float]],
    bank: CapacitorBank,
    task: TaskSpec,
    hyper: int,
    min_cycle: int | None = None,
    overlap: OverlapMode = OverlapMode.OWNER,
) -> PcpPlan:
    """Полный офлайн-план: Q, набор циклов, назначение и проверка выполнимости.

    Args:
        harvest_rates: Пары (node_id, мДж/слот).
        bank: Шаблон накопителя.
        task: Выполняемая задача.
        hyper: Гиперпериод T.
        min_cycle: Явное Q; по умолчанию выводится из самого сильного узла.
        overlap: Кто просыпается в слотах, кратных нескольким циклам.

    Returns:
        PcpPlan.

    Raises:
        InsufficientNodesError: Если узлов не хватает на все циклы.
    """
    # Q - наименьший цикл, выполнимый для самого сильного узла
    if min_cycle is None:
        best_rate = max((rate for _, rate in harvest_rates), default=0.0)
        min_cycle = lowest_allowed_cycle(best_rate, bank, task) or 2
    min_cycle = min(max(min_cycle, 2), max(hyper, 2))

    # Решето и назначение по убыванию скорости сбора
    duty_set = select_duty_cycles(min_cycle, max(hyper, min_cycle))
    assignment = assign_duty_cycles(harvest_rates, duty_set)

    # Выполнимость проверяется, но не меняет назначения
    rates = dict(harvest_rates)
    infeasible = tuple(
        node_id
        for node_id, cycle in assignment.pairs
        if not feasibility_check(cycle, rates[node_id], bank, task)
    )
    for node_id in infeasible:
        logger.warning(
            f"Node {node_id} cannot sustain cycle {assignment.cycle_of(node_id)} "
            f"at {rates[node_id]:.4f} mJ/slot"
        )
    logger.info(
        f"PCP plan: Q={duty_set.min_cycle} T={duty_set.hyperperiod} "
        f"cycles={list(duty_set.cycles)} infeasible={len(infeasible)}"
    )
    return PcpPlan(
        duty_set=duty_set,
        assignment=assignment,
        infeasible_nodes=infeasible,
        overlap=OverlapMode(overlap),
    )
