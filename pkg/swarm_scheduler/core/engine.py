"""Детерминированная дискретная симуляция роя.

Порядок внутри слота t для каждого узла:
    1. сбор энергии trace[t] в накопитель;
    2. снятие просроченной задачи;
    3. возобновление задачи или решение политики (ORCL - одно глобальное решение);
    4. оплата слота активным узлом, провал питания при нехватке;
    5. захват события, начинающегося в t;
    6. обратная связь о пробуждении посреди события;
    7. продвижение задачи;
    8. наблюдение и награда, окно активности, конец слота.

Узлы связаны только событиями, поэтому прогон идёт узел за узлом, а итог
события - лучший исход среди всех узлов. Спящий узел без задачи проходит
промежутки до следующего решения политики разом, если у накопителя нет
утечки. ORCL решает за весь рой и идёт слот за слотом.
"""

import bisect
import functools
import logging
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

import numpy as np

from swarm_scheduler.core.drift import DriftModel, DriftParams, sample_drift_model
from swarm_scheduler.core.energy import charge_balance, quantize_energy
from swarm_scheduler.core.exceptions import InvalidArgumentError
from swarm_scheduler.core.models import (
    CapacitorBank,
    CaptureFeedback,
    Decision,
    Event,
    Job,
    JobOutcome,
    Mode,
    NodeState,
    SlotTime,
    TaskSpec,
)
from swarm_scheduler.core.pcp import OverlapMode, PcpPlan, plan_pcp
from swarm_scheduler.core.utils import (
    STREAM_DRIFT,
    STREAM_POLICY,
    STREAM_REWARD,
    make_rng,
)
from swarm_scheduler.policies import (
    Observation,
    PolicyContext,
    PolicyKind,
    PolicySpec,
    SchedulingPolicy,
    create_policy,
)
from swarm_scheduler.policies.baselines import OraclePolicy, oracle_decide

logger = logging.getLogger(__name__)

# Политики, которым нужно полное назначение циклов PCP
PCP_KINDS = frozenset({PolicyKind.PCP_STATIC, PolicyKind.RBS, PolicyKind.SRL})

# Допуск при оплате слота
PAYMENT_TOLERANCE = 1e-12

# Начальная ширина окна поиска по локальным слотам с дрейфом
LOCAL_SEARCH_WINDOW = 64


# =============================================================================
# Типы
# =============================================================================


class EventOutcome(StrEnum):
    """Итог события."""

    MISSED = "missed"
    CAPTURED_ONLY = "captured_only"
    CAPTURED_AND_PROCESSED = "captured_and_processed"


OUTCOME_RANK = {
    EventOutcome.MISSED: 0,
    EventOutcome.CAPTURED_ONLY: 1,
    EventOutcome.CAPTURED_AND_PROCESSED: 2,
}


class ListenMode(StrEnum):
    """Сколько бодрствует узел после пустого пробуждения."""

    LISTEN = "listen"
    FULL = "full"


@dataclass(frozen=True)
class Scenario:
    """Полное описание одного прогона.

    Attributes:
        n_nodes: Число узлов.
        slot_duration: Длительность слота, с.
        horizon: Горизонт h, слоты.
        harvest: Матрица (n_nodes × длина) собираемой энергии, мДж/слот.
        events: События, упорядоченные по началу.
        task: Задача.
        bank: Шаблон накопителя (общий для всех узлов).
        policy: Политика и её параметры.
        drift: Параметры дрейфа часов.
        seed: Зерно сценария.
        unit_energy: Единичная энергия для квантования, мДж.
        hyperperiod: Гиперпериод событий T.
        min_cycle: Явное Q для PCP (None - из энергии лучшего узла).
        harvest_rates: Номинальные скорости узлов (None - средние по трассе).
        listen_mode: Окно после пустого пробуждения.
        wrap_hyperperiod: Расписания PCP по модулю гиперпериода.
        pcp_overlap: Кто из узлов PCP просыпается в слотах, кратных нескольким циклам.
        record_energy: Сохранять посекундные ряды энергии.
    """

    n_nodes: int
    slot_duration: float
    horizon: int
    harvest: np.ndarray
    events: tuple[Event, ...]
    task: TaskSpec
    bank: CapacitorBank
    policy: PolicySpec
    drift: DriftParams = field(default_factory=DriftParams)
    seed: int = 0
    unit_energy: float = 1.0
    hyperperiod: int = 2
    min_cycle: int | None = None
    harvest_rates: tuple[float, ...] | None = None
    listen_mode: ListenMode = ListenMode.LISTEN
    wrap_hyperperiod: bool = True
    pcp_overlap: OverlapMode = OverlapMode.OWNER
    record_energy: bool = True

    def validate(self) -> None:
        """Проверить инварианты сценария.

        Raises:
            InvalidArgumentError: Если трасса короче горизонта или размеры не совпадают.
        """
        if self.n_nodes < 1:
            raise InvalidArgumentError(
                "n_nodes", self.n_nodes, "нужен хотя бы один узел"
            )
        if self.horizon < 1:
            raise InvalidArgumentError("horizon", self.horizon, "горизонт < 1")
        if self.harvest.ndim != 2 or self.harvest.shape[0] != self.n_nodes:
            raise InvalidArgumentError(
                "harvest", self.harvest.shape, f"ожидается {self.n_nodes} трасс"
            )
        if self.harvest.shape[1] < self.horizon:
            raise InvalidArgumentError(
                "harvest",
                self.harvest.shape[1],
                f"трасса короче горизонта {self.horizon}",
            )
        if np.any(self.harvest < 0):
            raise InvalidArgumentError("harvest", "<0", "энергия трассы отрицательна")
        if self.harvest_rates is not None and len(self.harvest_rates) != self.n_nodes:
            raise InvalidArgumentError(
                "harvest_rates",
                len(self.harvest_rates),
                "число скоростей не равно числу узлов",
            )

    @property
    def active_nodes(self) -> int:
        """Число узлов с учётом ограничения вида GRDY(1)."""
        limit = self.policy.node_limit
        return self.n_nodes if limit is None else min(limit, self.n_nodes)


@dataclass(slots=True)
class EventRecord:
    """Итог одного события."""

    event: Event
    outcome: EventOutcome = EventOutcome.MISSED
    capturing_node: int | None = None


@dataclass
class SimResult:
    """Результат прогона.

    Attributes:
        policy_label: Подпись политики.
        slot_duration: Длительность слота, с.
        horizon: Горизонт, слоты.
        node_ids: Номера узлов (столбцы матриц).
        activity: Матрица активности (horizon × узлы), bool.
        events: Итоги событий.
        stored: Запас в конце слота (или None без записи энергии).
        harvested: Собранная энергия по слотам.
        overflow: Отброшенная на ограничении энергия по слотам.
        idle_violations: Пары (слот, узел) пропусков по расписанию.
        brownouts: Пары (слот, узел) провалов питания.
        rewards: Истории наград по узлам: (слот, награда).
        totals: Энергетический баланс прогона, мДж.
        pcp_plan: Офлайн-план PCP (если применялся).
    """

    policy_label: str
    slot_duration: float
    horizon: int
    node_ids: tuple[int, ...]
    activity: np.ndarray
    events: list[EventRecord]
    stored: np.ndarray | None = None
    harvested: np.ndarray | None = None
    overflow: np.ndarray | None = None
    idle_violations: list[tuple[int, int]] = field(default_factory=list)
    brownouts: list[tuple[int, int]] = field(default_factory=list)
    rewards: dict[int, list[tuple[int, float]]] = field(default_factory=dict)
    totals: dict[str, float] = field(default_factory=dict)
    pcp_plan: PcpPlan | None = None

    @property
    def active_counts(self) -> np.ndarray:
        """Число активных узлов в каждом слоте."""
        return self.activity.sum(axis=1)

    def activity_rows(self) -> Iterator[tuple[Any, ...]]:
        """Строки activity.csv: slot, node_id, state."""
        for slot in range(self.horizon):
            for column, node_id in enumerate(self.node_ids):
                state = Mode.ACTIVE if self.activity[slot, column] else Mode.ASLEEP
                yield slot, node_id, state.value

    def event_rows(self) -> Iterator[tuple[Any, ...]]:
        """Строки events.csv: id, start, deadline, outcome, capturing_node."""
        for record in self.events:
            capturing = "" if record.capturing_node is None else record.capturing_node
            yield (
                record.event.id,
                record.event.start_slot,
                record.event.deadline_slot,
                record.outcome.value,
                capturing,
            )

    def energy_rows(self) -> Iterator[tuple[Any, ...]]:
        """Строки energy.csv: slot, node_id, stored, harvested, overflow."""
        if self.stored is None or self.harvested is None or self.overflow is None:
            return
        for slot in range(self.horizon):
            for column, node_id in enumerate(self.node_ids):
                yield (
                    slot,
                    node_id,
                    float(self.stored[slot, column]),
                    float(self.harvested[slot, column]),
                    float(self.overflow[slot, column]),
                )


# =============================================================================
# Задачи
# =============================================================================


def advance_task(job: Job, now: int) -> JobOutcome:
    """Продвинуть задачу на один оплаченный слот.

    Args:
        job: Задача (remaining_slots уменьшается на месте).
        now: Текущий слот.

    Returns:
        MISSED_DEADLINE, если now > deadline; PROCESSED_IN_DEADLINE, когда
        остаток доходит до нуля; иначе IN_PROGRESS.

    Example:
        Задача (3, дедлайн 8) в слоте 8 → IN_PROGRESS, в слоте 9 → MISSED_DEADLINE.
    """
    if now > job.deadline:
        return JobOutcome.MISSED_DEADLINE
    job.remaining_slots -= 1
    if job.remaining_slots <= 0:
        return JobOutcome.PROCESSED_IN_DEADLINE
    return JobOutcome.IN_PROGRESS


# =============================================================================
# Прогон
# =============================================================================


class _Run:
    """Изменяемое состояние одного прогона."""

    def __init__(self, scenario: Scenario):
        scenario.validate()
        self.s = scenario
        n = scenario.active_nodes
        h = scenario.horizon
        self.harvest = np.asarray(scenario.harvest[:n, :h], dtype=float)
        rates = scenario.harvest_rates or tuple(
            float(row.mean()) for row in scenario.harvest
        )
        self.rates = tuple(float(rate) for rate in rates[:n])
        self.nodes = [NodeState(node_id=i, bank=scenario.bank) for i in range(n)]
        self.plan = self._plan()
        self.policies = self._policies()
        self.oracle = isinstance(self.policies[0], OraclePolicy)
        self.drifts = self._drifts()
        self.leak_free = scenario.bank.leakage_rate == 0.0

        # локальные слоты и накопленный сбор узла, которого сейчас ведём
        self.local: list[np.ndarray | None] = [None] * n
        self.cumulative: list[np.ndarray | None] = [None] * n

        self.activity = np.zeros((h, n), dtype=bool)
        self.records = [EventRecord(event) for event in scenario.events]
        self.by_id = {record.event.id: record for record in self.records}
        self.ordered = sorted(self.records, key=lambda record: record.event.start_slot)
        self.starts = [record.event.start_slot for record in self.ordered]
        self.starting: dict[int, list[EventRecord]] = {}
        for record in self.ordered:
            self.starting.setdefault(record.event.start_slot, []).append(record)

        self.windows: list[int | None] = [0] * n
        self.expired: list[JobOutcome | None] = [None] * n
        self.slot_overflow = [0.0] * n
        self.idle_violations: list[tuple[int, int]] = []
        self.brownouts: list[tuple[int, int]] = []
        self.rewards: dict[int, list[tuple[int, float]]] = {i: [] for i in range(n)}
        self.totals = {
            "initial_stored": sum(node.stored for node in self.nodes),
            "harvested": scenario.bank.charge_efficiency * float(self.harvest.sum()),
            "consumed": 0.0,
            "overflow": 0.0,
            "leaked": 0.0,
        }
        if scenario.record_energy:
            self.stored = np.zeros((h, n))
            self.harvested = self.harvest.copy()
            self.overflow = np.zeros((h, n))
        else:
            self.stored = self.harvested = self.overflow = None

    def _plan(self) -> PcpPlan | None:
        if self.s.policy.kind not in PCP_KINDS:
            return None
        pairs = [
            (node.node_id, rate)
            for node, rate in zip(self.nodes, self.rates, strict=True)
        ]
        return plan_pcp(
            pairs,
            self.s.bank,
            self.s.task,
            self.s.hyperperiod,
            self.s.min_cycle,
            overlap=self.s.pcp_overlap,
        )

    def _policies(self) -> list[SchedulingPolicy]:
        s = self.s
        listen = s.task.runtime_slots if s.listen_mode is ListenMode.FULL else 1
        policies = []
        for index, node in enumerate(self.nodes):
            context = PolicyContext(
                task=s.task,
                bank=s.bank,
                slot_duration=s.slot_duration,
                n_nodes=len(self.nodes),
                node_index=index,
                harvest_rates=self.rates,
                duty_set=self.plan.duty_set if self.plan else None,
                assignment=self.plan.assignment if self.plan else None,
                wake_threshold=s.task.activation_energy,
                unit_energy=s.unit_energy,
                wrap_hyperperiod=s.wrap_hyperperiod,
                listen_slots=listen,
                pcp_overlap=self.plan.overlap if self.plan else s.pcp_overlap,
                rng=make_rng(s.seed, STREAM_POLICY, node.node_id),
                reward_rng=make_rng(s.seed, STREAM_REWARD, node.node_id),
            )
            policy = create_policy(s.policy, context)
            policy.setup(node)
            policies.append(policy)
        return policies

    def _drifts(self) -> list[DriftModel]:
        s = self.s
        if self.oracle or not s.drift.enabled:
            return [DriftModel.disabled(s.slot_duration) for _ in self.nodes]
        capacitance = s.bank.capacitance_label or 2.2e-6
        return [
            sample_drift_model(
                capacitance,
                s.slot_duration,
                s.horizon,
                make_rng(s.seed, STREAM_DRIFT, node.node_id),
                reference_s=s.drift.reference_s,
                counter_drift=s.drift.counter_drift,
                counter_drift_mean_slots=s.drift.counter_drift_mean_slots,
            )
            for node in self.nodes
        ]

    @functools.cached_property
    def busy_prefix(self) -> list[int]:
        """busy_prefix[t] - сколько слотов из [0, t) занято хотя бы одним событием."""
        h = self.s.horizon
        marks = np.zeros(h + 1, dtype=np.int64)
        starts = np.array([event.start_slot for event in self.s.events], dtype=np.int64)
        ends = np.array([event.end_slot for event in self.s.events], dtype=np.int64)
        inside = starts < h
        np.add.at(marks, starts[inside], 1)
        np.add.at(marks, np.minimum(ends[inside], h), -1)
        busy = np.cumsum(marks[:h]) > 0
        return np.concatenate(([0], np.cumsum(busy))).tolist()

    # -------------------------------------------------------------------------

    def run(self) -> SimResult:
        if self.oracle:
            h = self.s.horizon
            for i, drift in enumerate(self.drifts):
                self.local[i] = drift.local_slots(h)
            for t in range(h):
                self._oracle_slot(t)
        else:
            for i in range(len(self.nodes)):
                self._run_node(i)
        return self._result()

    def _run_node(self, i: int) -> None:
        node, policy = self.nodes[i], self.policies[i]
        h = self.s.horizon
        self.local[i] = self.drifts[i].local_slots(h)
        self.cumulative[i] = np.concatenate(([0.0], np.cumsum(self.harvest[i])))
        # с утечкой запас спящего узла не монотонен, и сон не пропускается
        mask = policy.static_schedule(node, self.local[i]) if self.leak_free else None
        scheduled = None if mask is None else np.flatnonzero(mask).tolist()
        # без записи рядов энергии расписание проходится без numpy на каждом шаге
        walk = None
        if scheduled is not None and self.stored is None:
            walk = self.cumulative[i].tolist()

        t = 0
        while t < h:
            if self.leak_free and not node.is_active and node.job is None:
                if walk is not None:
                    t = self._walk_schedule(i, t, scheduled, walk)
                else:
                    end = self._next_decision(i, t, scheduled)
                    if end > t:
                        self._sleep(i, t, end)
                        t = end
                if t >= h:
                    break
            self._slot(i, t)
            t += 1
        self.local[i] = self.cumulative[i] = None
        logger.debug(f"Node {node.node_id} done: stored={node.stored:.4f} mJ")

    def _oracle_slot(self, t: int) -> None:
        # запас до сбора: оракул сравнивает E_H + E_C
        before = [node.stored for node in self.nodes]
        idle: list[int] = []
        for i, node in enumerate(self.nodes):
            self._open_slot(i, t)
            if node.job is None:
                idle.append(i)
            else:
                self._decide(i, t)
        # узлы с задачей продолжают её, выбор идёт среди свободных
        chosen = None
        if idle:
            candidates = [(i, float(self.harvest[i, t]), before[i]) for i in idle]
            chosen = oracle_decide(candidates, self.policies[0].min_energy)
        woke = set()
        for i in idle:
            node = self.nodes[i]
            if i == chosen:
                if not node.is_active:
                    woke.add(i)
                self._wake(i)
            else:
                node.mode = Mode.ASLEEP
        # шаги 4-8 для всех узлов после общего решения
        for i in range(len(self.nodes)):
            self._close_slot(i, t, i in woke)

    # -------------------------------------------------------------------------
    # Пропуск сна
    # -------------------------------------------------------------------------

    def _next_decision(self, i: int, t: int, scheduled: list[int] | None) -> int:
        """Первый слот >= t, в котором спящему узлу без задачи нужен decide()."""
        h = self.s.horizon
        if scheduled is not None:
            index = bisect.bisect_left(scheduled, t)
            return scheduled[index] if index < len(scheduled) else h
        hint = self.policies[i].next_wake(self.nodes[i], int(self.local[i][t]))
        end = h if hint.slot is None else self._first_local_at(i, t, hint.slot)
        if hint.energy is not None:
            end = min(end, self._energy_crossing(i, t, hint.energy))
        return end

    def _first_local_at(self, i: int, t: int, target: int) -> int:
        """Первый слот >= t с локальным слотом >= target или со скачком часов назад."""
        h = self.s.horizon
        local = self.local[i]
        start = int(local[t])
        if target <= start:
            return t
        if self.drifts[i].rate == 0.0:
            return min(t + target - start, h)
        low, width = t, LOCAL_SEARCH_WINDOW
        while low < h:
            high = min(h, low + width)
            chunk = local[low:high]
            hits = np.flatnonzero((chunk >= target) | (chunk < start))
            if hits.size:
                return low + int(hits[0])
            low, width = high, width * 2
        return h

    def _energy_crossing(self, i: int, t: int, energy: float) -> int:
        """Первый слот >= t, после сбора в котором запас спящего узла >= energy."""
        node, bank = self.nodes[i], self.s.bank
        h = self.s.horizon
        if energy > bank.capacity:
            return h
        need = (energy - node.stored) / bank.charge_efficiency
        if need <= 0:
            return t
        cumulative = self.cumulative[i]
        index = int(np.searchsorted(cumulative, cumulative[t] + need, side="left"))
        return min(max(index - 1, t), h)

    def _sleep(self, i: int, t: int, end: int) -> None:
        """Провести спящий узел без задачи через слоты [t, end) разом."""
        node, bank = self.nodes[i], self.s.bank
        efficiency, capacity = bank.charge_efficiency, bank.capacity
        cumulative = self.cumulative[i]
        # без утечки и расхода запас растёт монотонно до ёмкости
        gained = cumulative[t + 1 : end + 1] - cumulative[t]
        levels = node.stored + efficiency * gained
        stored = np.minimum(levels, capacity)
        previous = np.concatenate(([node.stored], stored[:-1]))
        harvest = self.harvest[i, t:end]
        spill = np.maximum(previous + efficiency * harvest - capacity, 0.0)
        overflow = np.where(levels > capacity, spill, 0.0)
        self.totals["overflow"] += float(overflow.sum())
        if self.stored is not None and self.overflow is not None:
            self.stored[t:end, i] = stored
            self.overflow[t:end, i] = overflow
        node.stored = float(stored[-1])
        node.local_clock = float(self.local[i][end - 1]) * self.s.slot_duration
        self.policies[i].on_span_end(node, harvest, overflow)

    def _walk_schedule(
        self, i: int, t: int, scheduled: list[int], cumulative: list[float]
    ) -> int:
        """Пройти неизменное расписание спящего узла, начиная со слота t.

        Пропуски по расписанию и тихие пробуждения (в окне нет событий, запаса
        хватает на всё окно) считаются на месте, без decide().

        Returns:
            Слот, который нужно провести обычным шагом, или горизонт.
        """
        node, policy = self.nodes[i], self.policies[i]
        bank, task = self.s.bank, self.s.task
        h = self.s.horizon
        capacity, efficiency = bank.capacity, bank.charge_efficiency
        threshold = policy.context.wake_threshold
        cost = task.energy_per_slot
        window = policy.active_window(node)
        busy = self.busy_prefix

        stored, anchor = node.stored, t
        overflow = consumed = 0.0
        woken: list[int] = []
        index, count = bisect.bisect_left(scheduled, t), len(scheduled)
        result = h
        while index < count:
            slot = scheduled[index]
            level = stored + efficiency * (cumulative[slot + 1] - cumulative[anchor])
            if min(level, capacity) < threshold:
                # все слоты расписания до набора порога - пропуски
                if threshold > capacity:
                    crossing = h
                else:
                    target = cumulative[anchor] + (threshold - stored) / efficiency
                    crossing = bisect.bisect_left(cumulative, target, slot + 1) - 1
                upto = max(bisect.bisect_left(scheduled, crossing, index), index + 1)
                self.idle_violations.extend((s, i) for s in scheduled[index:upto])
                index = upto
                continue
            end = slot + (window or 0)
            quiet = (
                window is not None
                and window >= 1
                and end <= h
                and busy[end] == busy[slot]
                and min(level, capacity) >= window * cost
            )
            if not quiet:
                level = stored + efficiency * (cumulative[slot] - cumulative[anchor])
                if level > capacity:
                    overflow += level - capacity
                    level = capacity
                stored, result = level, slot
                break
            # тихое пробуждение: окно оплачивается слот за слотом
            if level > capacity:
                overflow += level - capacity
                level = capacity
            for u in range(slot, end):
                if u > slot:
                    level = stored + efficiency * (cumulative[u + 1] - cumulative[u])
                    if level > capacity:
                        overflow += level - capacity
                        level = capacity
                paid = min(cost, level)
                stored = level - paid
                consumed += paid
            woken.append(slot)
            anchor = end
            index = bisect.bisect_left(scheduled, end, index + 1)
        else:
            level = stored + efficiency * (cumulative[h] - cumulative[anchor])
            if level > capacity:
                overflow += level - capacity
                level = capacity
            stored = level

        node.stored = stored
        self.totals["overflow"] += overflow
        self.totals["consumed"] += consumed
        if woken:
            slots = np.add.outer(np.asarray(woken), np.arange(window)).ravel()
            self.activity[slots, i] = True
        if result > 0:
            node.local_clock = float(self.local[i][result - 1]) * self.s.slot_duration
        return result

    # -------------------------------------------------------------------------
    # Шаг слота
    # -------------------------------------------------------------------------

    def _slot(self, i: int, t: int) -> None:
        self._open_slot(i, t)
        woke = self._decide(i, t)
        self._close_slot(i, t, woke)

    def _open_slot(self, i: int, t: int) -> None:
        node, bank = self.nodes[i], self.s.bank
        node.local_clock = float(self.local[i][t]) * self.s.slot_duration
        # 1. сбор энергии
        node.stored, overflow, leaked = charge_balance(
            node.stored,
            bank.capacity,
            bank.charge_efficiency,
            bank.leakage_rate,
            float(self.harvest[i, t]),
            0.0,
        )
        self.totals["overflow"] += overflow
        self.totals["leaked"] += leaked
        self.slot_overflow[i] = overflow
        if self.overflow is not None:
            self.overflow[t, i] = overflow
        # 2. просроченная задача снимается
        if node.job is not None and t > node.job.deadline:
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug(
                    f"slot {t}: node {i} dropped stale job {node.job.event_id}"
                )
            node.job = None
            self.expired[i] = JobOutcome.MISSED_DEADLINE

    def _wake(self, i: int) -> None:
        node = self.nodes[i]
        node.mode = Mode.ACTIVE
        self.windows[i] = self.policies[i].active_window(node)

    def _decide(self, i: int, t: int) -> bool:
        """Шаг 3: возобновление задачи или решение политики; True - узел проснулся."""
        node = self.nodes[i]
        if node.job is not None:
            if not node.is_active and node.stored >= self.s.task.energy_per_slot:
                node.mode = Mode.ACTIVE
                self.windows[i] = 0
            return False
        if node.is_active or self.oracle:
            return False
        verdict = self.policies[i].decide(node, int(self.local[i][t]))
        if verdict.idle_violation:
            self.idle_violations.append((t, i))
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug(
                    f"slot {t}: node {i} idle violation at {node.stored:.4f} mJ"
                )
        if verdict.decision is Decision.WAKE:
            self._wake(i)
            return True
        return False

    def _draw(self, node: NodeState, amount: float) -> None:
        paid = min(amount, node.stored)
        node.stored -= paid
        self.totals["consumed"] += paid

    def _close_slot(self, i: int, t: int, woke: bool) -> None:
        node, task = self.nodes[i], self.s.task
        feedback = CaptureFeedback.NONE
        outcome, self.expired[i] = self.expired[i], None

        # 4. оплата слота или провал питания
        if node.is_active:
            if node.stored + PAYMENT_TOLERANCE >= task.energy_per_slot:
                self._draw(node, task.energy_per_slot)
            else:
                node.mode = Mode.ASLEEP
                self.windows[i] = 0
                self.brownouts.append((t, i))
                self.policies[i].on_brownout(node, t)
                if logger.isEnabledFor(logging.DEBUG):
                    logger.debug(
                        f"slot {t}: node {i} brown-out at {node.stored:.4f} mJ"
                    )

        # 5. захват события, начинающегося в t
        for record in self.starting.get(t, ()):
            if not node.is_active or node.job is not None:
                break
            if node.stored + PAYMENT_TOLERANCE < task.sensing_energy:
                break
            self._draw(node, task.sensing_energy)
            node.job = Job(
                event_id=record.event.id,
                remaining_slots=task.runtime_slots,
                deadline=record.event.deadline_slot,
            )
            self.windows[i] = 0
            self._credit(record, EventOutcome.CAPTURED_ONLY, node.node_id)
            feedback = CaptureFeedback.CAPTURED_FROM_START

        # 6. проснулся посреди события, которое проспал с начала
        if woke and node.is_active and feedback is CaptureFeedback.NONE:
            ongoing = self._ongoing(t)
            if ongoing is not None and not self.activity[ongoing.event.start_slot, i]:
                feedback = CaptureFeedback.CAPTURED_MID_EVENT

        # 7. продвижение задачи
        if node.is_active and node.job is not None:
            progress = advance_task(node.job, t)
            if progress is not JobOutcome.IN_PROGRESS:
                if progress is JobOutcome.PROCESSED_IN_DEADLINE:
                    record = self.by_id[node.job.event_id]
                    self._credit(
                        record, EventOutcome.CAPTURED_AND_PROCESSED, node.node_id
                    )
                node.job = None
                outcome = progress

        self.activity[t, i] = node.is_active
        # 8. наблюдение, окно активности, конец слота
        if feedback is not CaptureFeedback.NONE or outcome is not None:
            self._deliver(i, t, feedback, outcome)
        if node.is_active and node.job is None:
            window = self.windows[i]
            if window is None:
                if node.stored < task.energy_per_slot:
                    node.mode = Mode.ASLEEP
            else:
                window -= 1
                self.windows[i] = window
                if window <= 0:
                    node.mode = Mode.ASLEEP
        self.policies[i].on_slot_end(
            node,
            int(self.local[i][t]),
            float(self.harvest[i, t]),
            self.slot_overflow[i],
        )
        if self.stored is not None:
            self.stored[t, i] = node.stored

    def _ongoing(self, t: int) -> EventRecord | None:
        """Последнее начавшееся до t событие, если оно ещё идёт."""
        index = bisect.bisect_right(self.starts, t) - 1
        if index < 0:
            return None
        record = self.ordered[index]
        if record.event.start_slot < t and record.event.is_ongoing(t):
            return record
        return None

    @staticmethod
    def _credit(record: EventRecord, outcome: EventOutcome, node_id: int) -> None:
        """Лучший исход события; при равенстве - узел с меньшим номером."""
        rank, current = OUTCOME_RANK[outcome], OUTCOME_RANK[record.outcome]
        lower = record.capturing_node is not None and node_id < record.capturing_node
        if rank > current or (rank == current and lower):
            record.outcome = outcome
            record.capturing_node = node_id

    def _deliver(
        self, i: int, t: int, feedback: CaptureFeedback, outcome: JobOutcome | None
    ) -> None:
        node = self.nodes[i]
        if outcome is JobOutcome.PROCESSED_IN_DEADLINE:
            feedback = CaptureFeedback.CAPTURED_FROM_START
        observation = Observation(
            slot=SlotTime(t, self.s.slot_duration),
            local_energy=quantize_energy(node.stored, self.s.unit_energy),
            stored=node.stored,
            capture_feedback=feedback,
            job_outcome=outcome,
        )
        gained = self.policies[i].observe(node, observation)
        if gained is not None:
            self.rewards[i].append((t, gained))

    def _result(self) -> SimResult:
        self.totals["final_stored"] = sum(node.stored for node in self.nodes)
        return SimResult(
            policy_label=self.s.policy.label,
            slot_duration=self.s.slot_duration,
            horizon=self.s.horizon,
            node_ids=tuple(node.node_id for node in self.nodes),
            activity=self.activity,
            events=self.records,
            stored=self.stored,
            harvested=self.harvested,
            overflow=self.overflow,
            idle_violations=sorted(self.idle_violations),
            brownouts=sorted(self.brownouts),
            rewards=self.rewards,
            totals=self.totals,
            pcp_plan=self.plan,
        )


def run_scenario(scenario: Scenario) -> SimResult:
    """Выполнить сценарий.

    Args:
        scenario: Сценарий.

    Returns:
        SimResult; прогон полностью детерминирован при заданном зерне.

    Raises:
        InvalidArgumentError: Если трасса короче горизонта.
        InsufficientNodesError: Если узлов меньше, чем циклов PCP.
    """
    logger.info(
        f"Scenario start: policy={scenario.policy.label} nodes={scenario.active_nodes} "
        f"horizon={scenario.horizon} seed={scenario.seed}"
    )
    result = _Run(scenario).run()
    processed = sum(
        r.outcome is EventOutcome.CAPTURED_AND_PROCESSED for r in result.events
    )
    logger.info(
        f"Scenario done: policy={result.policy_label} events={len(result.events)} "
        f"processed={processed} brownouts={len(result.brownouts)}"
    )
    return result
