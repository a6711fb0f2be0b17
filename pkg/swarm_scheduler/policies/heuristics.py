"""Расписания по циклам PCP: статическое расписание и эвристика RBS.

RBS (Randomized Binary Search) ищет выполнимый цикл среди отсортированных
циклов PCP: вместо середины диапазона [lo, hi] выбирается случайная позиция,
а обратная связь сужает диапазон. При изменении скорости сбора поиск идёт
в сторону коротких циклов (энергии больше) или длинных (меньше), но не
ниже наименьшего цикла, выполнимого при новой скорости.
"""

import bisect
import logging
from collections import deque
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from swarm_scheduler.core.exceptions import InvalidArgumentError
from swarm_scheduler.core.models import NodeState
from swarm_scheduler.core.pcp import (
    Assignment,
    WakeSchedule,
    lowest_allowed_cycle,
    wake_schedule,
)
from swarm_scheduler.policies.base import (
    SLEEP,
    WAKE,
    PolicyContext,
    PolicyKind,
    SchedulingPolicy,
    Verdict,
    WakeHint,
)
from swarm_scheduler.policies.registry import register_policy

logger = logging.getLogger(__name__)

# Относительное изменение скорости сбора, запускающее новый поиск
DEFAULT_CHANGE_THRESHOLD = 0.2


# =============================================================================
# Статическое расписание
# =============================================================================


def is_scheduled(
    local_slot: int, cycle: int, phase: int = 0, hyper: int | None = None
) -> bool:
    """Попадает ли локальный слот на кратное цикла.

    При заданном hyper слот берётся по модулю гиперпериода.
    """
    position = local_slot - phase
    if position < 0:
        return False
    if hyper is not None:
        position %= hyper
    return position % cycle == 0


def cycle_verdict(
    stored: float, scheduled: bool, wake_energy: float
) -> tuple[Verdict, bool]:
    """Решение по расписанию цикла.

    Returns:
        Пара (вердикт, слот по расписанию). Нехватка энергии в слот по
        расписанию даёт Sleep с признаком пропуска.
    """
    if not scheduled:
        return SLEEP, False
    if stored >= wake_energy:
        return WAKE, True
    return Verdict(SLEEP.decision, idle_violation=True), True


def pcp_static_decide(
    node: NodeState,
    assignment: Assignment,
    local_slot: int,
    wake_energy: float,
    schedule: WakeSchedule | None = None,
) -> Verdict:
    """Статическое расписание PCP: пробуждение по назначенному циклу.

    Args:
        node: Узел (спящий, без задачи).
        assignment: Назначение циклов PCP.
        local_slot: Локальный (с дрейфом) номер слота.
        wake_energy: Энергия одной активации, мДж.
        schedule: Расписание набора циклов; None - простая кратность циклу.

    Returns:
        Verdict; узел без цикла всегда спит.

    Example:
        c=3, слот 9, энергии достаточно → Wake; слот 10 → Sleep.
    """
    cycle = assignment.cycle_of(node.node_id)
    if cycle is None:
        return SLEEP
    phase = assignment.phase_of(node.node_id)
    if schedule is None:
        scheduled = is_scheduled(local_slot, cycle, phase)
    else:
        scheduled = schedule.is_scheduled(local_slot, cycle, phase)
    verdict, _ = cycle_verdict(node.stored, scheduled, wake_energy)
    return verdict


class CycleSchedulePolicy(SchedulingPolicy):
    """Общая основа политик, работающих по циклам PCP."""

    def __init__(self, params: Mapping[str, Any], context: PolicyContext):
        super().__init__(params, context)
        self.duty_set = context.duty_set
        self.cycles: tuple[int, ...] = self.duty_set.cycles if self.duty_set else ()
        self.schedule: WakeSchedule | None = (
            wake_schedule(self.duty_set, context.pcp_overlap, context.wrap_hyperperiod)
            if self.duty_set is not None
            else None
        )

    def setup(self, node: NodeState) -> None:
        assignment = self.context.assignment
        node.duty_cycle = assignment.cycle_of(node.node_id) if assignment else None

    def phase(self, node: NodeState) -> int:
        """Смещение расписания узла."""
        assignment = self.context.assignment
        return assignment.phase_of(node.node_id) if assignment else 0

    def scheduled_verdict(
        self, node: NodeState, local_slot: int
    ) -> tuple[Verdict, bool]:
        """Вердикт по текущему циклу узла."""
        if node.duty_cycle is None or self.schedule is None:
            return SLEEP, False
        scheduled = self.schedule.is_scheduled(
            local_slot, node.duty_cycle, self.phase(node)
        )
        return cycle_verdict(node.stored, scheduled, self.context.wake_threshold)

    def floor_index(self, rate: float) -> int:
        """Индекс наименьшего цикла набора, выполнимого при скорости rate.

        При расписании по модулю гиперпериода считаются настоящие пробуждения
        цикла за T (в режиме OWNER их меньше, чем T / cycle), иначе - период.
        """
        last = len(self.cycles) - 1
        allowed = lowest_allowed_cycle(rate, self.context.bank, self.context.task)
        if allowed is None:
            return last
        schedule = self.schedule
        if schedule is None or schedule.period is None:
            return min(bisect.bisect_left(self.cycles, allowed), last)
        budget = self.context.bank.charge_efficiency * rate * schedule.period
        need = self.context.task.activation_energy
        for index, cycle in enumerate(self.cycles):
            if schedule.positions(cycle).size * need <= budget:
                return index
        return last

    def next_wake(self, node: NodeState, local_slot: int) -> WakeHint:
        if node.duty_cycle is None or self.schedule is None:
            return WakeHint(None)
        slot = self.schedule.next_scheduled(
            local_slot, node.duty_cycle, self.phase(node)
        )
        return WakeHint(slot)


@register_policy
class PcpStaticPolicy(CycleSchedulePolicy):
    """PCP_STATIC: циклы фиксируются офлайн и не меняются."""

    kind = PolicyKind.PCP_STATIC

    def decide(self, node: NodeState, local_slot: int) -> Verdict:
        verdict, _ = self.scheduled_verdict(node, local_slot)
        return verdict

    def static_schedule(
        self, node: NodeState, local_slots: np.ndarray
    ) -> np.ndarray | None:
        if node.duty_cycle is None or self.schedule is None:
            return np.zeros(len(local_slots), dtype=bool)
        return self.schedule.mask(local_slots, node.duty_cycle, self.phase(node))


# =============================================================================
# RBS
# =============================================================================


@dataclass(slots=True)
class RbsMemory:
    """Память RBS одного узла.

    Attributes:
        lo: Нижняя граница диапазона индексов.
        hi: Верхняя граница диапазона индексов.
        index: Текущий выбранный индекс.
        floor: Индекс наименьшего цикла, выполнимого при текущей скорости.
        reference_rate: Скорость сбора на момент последнего поиска, мДж/слот.
        harvested: Недавняя собранная энергия по слотам.
        infeasible: За цикл был провал питания или пропуск по расписанию.
        surplus: За цикл наблюдалось переполнение накопителя.
    """

    lo: int
    hi: int
    index: int
    floor: int = 0
    reference_rate: float | None = None
    harvested: deque[float] = field(default_factory=deque)
    infeasible: bool = False
    surplus: bool = False

    def reset(self, size: int) -> None:
        """Вернуть диапазон ко всем допустимым циклам."""
        self.lo, self.hi = min(self.floor, size - 1), size - 1


def rbs_transition(
    memory: RbsMemory, cycles: Sequence[int], rng: np.random.Generator
) -> int:
    """Выбрать цикл равномерно по индексу из [lo, hi].

    Если lo > hi, диапазон сначала сбрасывается к допустимым циклам.

    Args:
        memory: Память RBS (index обновляется).
        cycles: Отсортированные циклы PCP.
        rng: Генератор узла.

    Returns:
        Новый цикл.

    Raises:
        InvalidArgumentError: Если список циклов пуст.
    """
    if not cycles:
        raise InvalidArgumentError("cycles", cycles, "список циклов пуст")
    memory.lo = max(memory.lo, 0)
    memory.hi = min(memory.hi, len(cycles) - 1)
    if memory.lo > memory.hi:
        memory.reset(len(cycles))
    memory.index = int(rng.integers(memory.lo, memory.hi + 1))
    return cycles[memory.index]


def rbs_feedback(
    memory: RbsMemory, *, infeasible: bool, surplus: bool, size: int
) -> bool:
    """Сузить диапазон по обратной связи.

    Невыполнимый цикл → lo = max(index + 1, floor); избыток энергии →
    hi = index − 1, если узел выше и lo, и floor (иначе избыток не
    учитывается). Пересечение границ сбрасывает диапазон.

    Returns:
        True, если диапазон изменился и нужен новый выбор цикла.
    """
    if infeasible:
        memory.lo = max(memory.index + 1, memory.floor)
    elif surplus and memory.index > max(memory.lo, memory.floor):
        memory.lo = max(memory.lo, memory.floor)
        memory.hi = memory.index - 1
    else:
        return False
    if memory.lo > memory.hi:
        memory.reset(size)
    return True


def rbs_redirect(memory: RbsMemory, *, rising: bool, size: int) -> None:
    """Новый диапазон после изменения скорости сбора.

    Рост энергии ведёт к более коротким циклам [floor, index − 1], спад -
    к более длинным [index + 1, size − 1]. Пустой диапазон оставляет
    текущий цикл, если он ещё допустим, иначе ставит наименьший допустимый.

    Example:
        index=3, floor=1, рост → [1, 2]; index=3, floor=5, спад → [5, size − 1].
    """
    if rising:
        lo, hi = memory.floor, memory.index - 1
    else:
        lo, hi = max(memory.index + 1, memory.floor), size - 1
    if lo > hi:
        lo = hi = min(max(memory.index, memory.floor), size - 1)
    memory.lo, memory.hi = lo, hi


def harvest_changed(
    recent: Sequence[float], reference: float, threshold: float
) -> bool:
    """Изменилась ли средняя скорость сбора больше чем на threshold (относительно)."""
    if not recent:
        return False
    rate = float(np.mean(recent))
    if reference <= 0:
        return rate > 0
    return abs(rate - reference) / reference > threshold


@register_policy
class RbsPolicy(CycleSchedulePolicy):
    """RBS: случайный бинарный поиск выполнимого цикла PCP."""

    kind = PolicyKind.RBS

    def __init__(self, params: Mapping[str, Any], context: PolicyContext):
        super().__init__(params, context)
        self.threshold = float(params.get("change_threshold", DEFAULT_CHANGE_THRESHOLD))
        if self.threshold <= 0:
            raise InvalidArgumentError(
                "change_threshold", self.threshold, "порог должен быть > 0"
            )

    def setup(self, node: NodeState) -> None:
        super().setup(node)
        if node.duty_cycle is None:
            return
        # до первого изменения сбора поиск не уходит короче цикла из плана
        index = self.duty_set.index_of(node.duty_cycle)
        node.policy_memory["rbs"] = RbsMemory(
            lo=index,
            hi=len(self.cycles) - 1,
            index=index,
            harvested=deque(maxlen=max(self.cycles)),
        )

    def decide(self, node: NodeState, local_slot: int) -> Verdict:
        verdict, scheduled = self.scheduled_verdict(node, local_slot)
        if scheduled:
            memory: RbsMemory = node.policy_memory["rbs"]
            if verdict.idle_violation:
                memory.infeasible = True
            self._at_cycle_end(node, memory)
        return verdict

    def _at_cycle_end(self, node: NodeState, memory: RbsMemory) -> None:
        cycle = node.duty_cycle or 1
        recent = list(memory.harvested)[-cycle:]
        if not recent:
            memory.infeasible = memory.surplus = False
            return
        rate = float(np.mean(recent))
        size = len(self.cycles)
        if memory.reference_rate is None:
            memory.reference_rate = rate
            memory.floor = self.floor_index(rate)
        elif harvest_changed(recent, memory.reference_rate, self.threshold):
            rising = rate > memory.reference_rate
            memory.reference_rate = rate
            memory.floor = self.floor_index(rate)
            rbs_redirect(memory, rising=rising, size=size)
            node.duty_cycle = rbs_transition(memory, self.cycles, self.context.rng)
            logger.debug(
                f"RBS node {node.node_id}: energy change, new cycle {node.duty_cycle}"
            )
        elif rbs_feedback(
            memory, infeasible=memory.infeasible, surplus=memory.surplus, size=size
        ):
            node.duty_cycle = rbs_transition(memory, self.cycles, self.context.rng)
        memory.infeasible = False
        memory.surplus = False

    def on_brownout(self, node: NodeState, slot: int) -> None:
        memory: RbsMemory | None = node.policy_memory.get("rbs")
        if memory is not None:
            memory.infeasible = True

    def on_slot_end(
        self, node: NodeState, local_slot: int, harvested: float, overflow: float
    ) -> None:
        memory: RbsMemory | None = node.policy_memory.get("rbs")
        if memory is None:
            return
        memory.harvested.append(harvested)
        if overflow > 0:
            memory.surplus = True

    def on_span_end(
        self, node: NodeState, harvested: np.ndarray, overflow: np.ndarray
    ) -> None:
        memory: RbsMemory | None = node.policy_memory.get("rbs")
        if memory is None:
            return
        memory.harvested.extend(harvested[-memory.harvested.maxlen :].tolist())
        if overflow.size and overflow.max() > 0:
            memory.surplus = True
