"""Синтетические энергетические трассы (постоянные, солнечные, RF) и
генератор спорадических событий.

Все генераторы - чистые функции параметров и зерна.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from swarm_scheduler.core.exceptions import InvalidArgumentError
from swarm_scheduler.core.models import Event
from swarm_scheduler.core.utils import (
    STREAM_EVENTS,
    STREAM_TRACES,
    make_rng,
    validate_fraction,
    validate_non_negative,
    validate_positive,
    validate_range,
)

logger = logging.getLogger(__name__)

# Наблюдаемый потолок солнечного сборщика, мВт
SOLAR_CEILING_MW = 100.0

# Остаточная доля мощности при затенении
OCCLUSION_FACTOR = 0.02

# Допустимый диапазон показателя затухания
PATH_LOSS_EXPONENT_RANGE = (1.6, 6.0)


# =============================================================================
# Трассы
# =============================================================================


class TraceRegime(StrEnum):
    """Режим доступности энергии."""

    CONSTANT_PER_NODE = "constant_per_node"
    VARIABLE_OVER_TIME = "variable_over_time"


def classify_regime(samples: np.ndarray) -> TraceRegime:
    """Нулевая дисперсия - постоянный режим."""
    if len(samples) == 0 or float(np.ptp(samples)) == 0.0:
        return TraceRegime.CONSTANT_PER_NODE
    return TraceRegime.VARIABLE_OVER_TIME


@dataclass(frozen=True, slots=True, eq=False)
class EnergyTrace:
    """Энергия, доступная узлу в каждом слоте.

    Attributes:
        node_id: Номер узла.
        samples: Собираемая энергия по слотам, мДж (>= 0).
        regime: Режим доступности энергии.
    """

    node_id: int
    samples: np.ndarray
    regime: TraceRegime

    def __post_init__(self) -> None:
        if np.any(self.samples < 0):
            raise InvalidArgumentError(
                "samples", self.node_id, "энергия трассы отрицательна"
            )

    @classmethod
    def from_samples(
        cls, node_id: int, samples: Sequence[float] | np.ndarray
    ) -> "EnergyTrace":
        """Трасса с режимом, определённым по дисперсии."""
        array = np.asarray(samples, dtype=float)
        return cls(node_id=node_id, samples=array, regime=classify_regime(array))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def mean_rate(self) -> float:
        """Средняя энергия на слот, мДж."""
        return float(self.samples.mean()) if len(self.samples) else 0.0


def traces_to_matrix(traces: Sequence[EnergyTrace], horizon: int) -> np.ndarray:
    """Собрать матрицу (узлы × horizon) в порядке node_id.

    Raises:
        InvalidArgumentError: Если трасс нет или какая-то короче горизонта.
    """
    if not traces:
        raise InvalidArgumentError("traces", traces, "нет трасс")
    ordered = sorted(traces, key=lambda trace: trace.node_id)
    for trace in ordered:
        if len(trace) < horizon:
            raise InvalidArgumentError(
                "traces",
                trace.node_id,
                f"длина {len(trace)} меньше горизонта {horizon}",
            )
    return np.vstack([trace.samples[:horizon] for trace in ordered])


def gen_constant_traces(
    n_nodes: int,
    rate_range_mw: tuple[float, float],
    horizon: int,
    slot_duration: float,
    seed: int,
) -> list[EnergyTrace]:
    """Постоянная мощность на каждом узле, разная между узлами.

    Мощность узла равномерна в rate_range_mw (ограничена потолком 100 мВт).
    """
    low, high = validate_range("rate_range_mw", rate_range_mw)
    validate_non_negative("rate_range_mw", low)
    validate_positive("slot_duration", slot_duration)
    traces = []
    for node_id in range(n_nodes):
        rng = make_rng(seed, STREAM_TRACES, node_id)
        power = min(float(rng.uniform(low, high)), SOLAR_CEILING_MW)
        samples = np.full(horizon, power * slot_duration)
        traces.append(EnergyTrace(node_id, samples, TraceRegime.CONSTANT_PER_NODE))
    return traces


def gen_solar_trace(
    mean_mw: float,
    variability: float,
    horizon: int,
    slot_duration: float,
    seed: int,
    *,
    node_id: int = 0,
    smoothing_slots: int = 60,
    occlusion_rate: float = 0.0,
    occlusion_mean_slots: float = 30.0,
) -> EnergyTrace:
    """Солнечная трасса: среднее плюс сглаженный шум и затенения.

    мДж/слот = clamp(mean·(1 + variability·noise_t), 0, 100)·slot_duration,
    noise_t - гауссов шум, сглаженный скользящим средним и нормированный.

    Args:
        mean_mw: Средняя мощность, мВт (обрезается до 100).
        variability: Относительная амплитуда шума, [0, 1].
        horizon: Число слотов.
        slot_duration: Длительность слота, с.
        seed: Зерно.
        node_id: Номер узла (подпоток случайности).
        smoothing_slots: Окно сглаживания шума.
        occlusion_rate: Вероятность начала затенения в слоте.
        occlusion_mean_slots: Средняя длительность затенения.

    Raises:
        InvalidArgumentError: Если mean_mw < 0 или variability вне [0, 1].
    """
    validate_non_negative("mean_mw", mean_mw)
    validate_fraction("variability", variability)
    validate_fraction("occlusion_rate", occlusion_rate)
    validate_positive("slot_duration", slot_duration)
    mean_mw = min(mean_mw, SOLAR_CEILING_MW)
    rng = make_rng(seed, STREAM_TRACES, node_id)

    window = max(1, int(smoothing_slots))
    raw = rng.normal(size=horizon + window - 1)
    noise = np.convolve(raw, np.ones(window) / window, mode="valid")
    if noise.std() > 0:
        noise = (noise - noise.mean()) / noise.std()
    power = np.clip(mean_mw * (1.0 + variability * noise), 0.0, SOLAR_CEILING_MW)

    if occlusion_rate > 0:
        starts = np.flatnonzero(rng.random(horizon) < occlusion_rate)
        for start in starts:
            length = max(1, int(rng.exponential(occlusion_mean_slots)))
            power[start : start + length] *= OCCLUSION_FACTOR
    return EnergyTrace.from_samples(node_id, power * slot_duration)


# =============================================================================
# RF
# =============================================================================


def mw_to_dbm(power_mw: float) -> float:
    """мВт → дБм."""
    return 10.0 * math.log10(power_mw)


def dbm_to_mw(power_dbm: np.ndarray | float) -> np.ndarray | float:
    """дБм → мВт."""
    return np.power(10.0, np.asarray(power_dbm) / 10.0)


@dataclass(frozen=True, slots=True)
class PathLossModel:
    """Логарифмическая модель потерь на трассе.

    Attributes:
        exponent: Показатель затухания n, [1.6, 6].
        reference_distance: Опорное расстояние d0, м.
        loss_at_d0_db: Потери на d0, дБ.
        obstruction_db: Потери при отсутствии прямой видимости, дБ.
        sigma_db: СКО замираний, дБ (0 - без замираний).
    """

    exponent: float = 2.0
    reference_distance: float = 1.0
    loss_at_d0_db: float = 30.0
    obstruction_db: float = 10.0
    sigma_db: float = 0.0

    def __post_init__(self) -> None:
        low, high = PATH_LOSS_EXPONENT_RANGE
        if not low <= self.exponent <= high:
            raise InvalidArgumentError(
                "exponent", self.exponent, f"ожидается [{low}, {high}]"
            )
        validate_positive("reference_distance", self.reference_distance)
        validate_non_negative("obstruction_db", self.obstruction_db)
        validate_non_negative("sigma_db", self.sigma_db)

    def received_dbm(
        self,
        tx_dbm: float,
        distance: np.ndarray | float,
        line_of_sight: np.ndarray | bool = True,
    ) -> np.ndarray | float:
        """Мощность на приёмнике без замираний, дБм.

        На расстояниях не больше d0 потери равны потерям на d0.
        """
        ratio = np.maximum(np.asarray(distance, dtype=float), self.reference_distance)
        spread = np.log10(ratio / self.reference_distance)
        loss = self.loss_at_d0_db + 10.0 * self.exponent * spread
        blocked = np.logical_not(line_of_sight) * self.obstruction_db
        result = tx_dbm - loss - blocked
        return float(result) if np.ndim(result) == 0 else result


def random_trajectory(
    horizon: int,
    seed: int,
    *,
    node_id: int = 0,
    waypoints: int = 10,
    distance_range: tuple[float, float] = (0.5, 5.0),
    los_probability: float = 0.8,
) -> list[tuple[int, float, bool]]:
    """Случайная траектория передатчика: точки (слот, расстояние, LOS)."""
    low, high = validate_range("distance_range", distance_range)
    validate_positive("distance_range", low)
    validate_fraction("los_probability", los_probability)
    rng = make_rng(seed, STREAM_TRACES, node_id, 1)
    grid = np.linspace(0, max(horizon - 1, 0), max(waypoints, 1))
    slots = np.unique(grid.astype(int))
    distances = rng.uniform(low, high, size=len(slots))
    los = rng.random(len(slots)) < los_probability
    return [
        (int(s), float(d), bool(v))
        for s, d, v in zip(slots, distances, los, strict=True)
    ]


def gen_rf_trace(
    tx_power_mw: float,
    trajectory: Sequence[tuple[int, float, bool]],
    path_loss: PathLossModel,
    horizon: int,
    slot_duration: float,
    seed: int,
    *,
    node_id: int = 0,
) -> EnergyTrace:
    """RF-трасса по траектории передатчика.

    Расстояние линейно интерполируется между точками траектории, признак
    прямой видимости берётся от последней точки не позже слота.

    Raises:
        InvalidArgumentError: Если траектория пуста или расстояние <= 0.
    """
    if not trajectory:
        raise InvalidArgumentError("trajectory", trajectory, "траектория пуста")
    validate_positive("tx_power_mw", tx_power_mw)
    validate_positive("slot_duration", slot_duration)
    points = sorted(trajectory, key=lambda point: point[0])
    slots = np.array([point[0] for point in points], dtype=float)
    distances = np.array([point[1] for point in points], dtype=float)
    if np.any(distances <= 0):
        raise InvalidArgumentError(
            "trajectory", trajectory, "расстояние должно быть > 0"
        )
    flags = np.array([bool(point[2]) for point in points])

    timeline = np.arange(horizon, dtype=float)
    distance = np.interp(timeline, slots, distances)
    index = np.searchsorted(slots, timeline, side="right") - 1
    index = np.clip(index, 0, len(points) - 1)
    line_of_sight = flags[index]

    received = np.asarray(
        path_loss.received_dbm(mw_to_dbm(tx_power_mw), distance, line_of_sight)
    )
    if path_loss.sigma_db > 0:
        rng = make_rng(seed, STREAM_TRACES, node_id)
        received = received + rng.normal(0.0, path_loss.sigma_db, size=horizon)
    power = np.maximum(dbm_to_mw(received), 0.0)
    return EnergyTrace.from_samples(node_id, power * slot_duration)


# =============================================================================
# События
# =============================================================================


@dataclass(frozen=True, slots=True)
class EventGenParams:
    """Параметры генератора событий.

    Attributes:
        count: Наибольшее число событий.
        period_range: [min, max] интервала между началами событий, слоты.
        duration_range: [min, max] длительности события, слоты.
        seed: Зерно.
        deadline_slots: Явный срок обработки от начала события (None - до
            следующего события).
    """

    count: int = 1000
    period_range: tuple[int, int] = (10, 15)
    duration_range: tuple[int, int] = (1, 5)
    seed: int = 0
    deadline_slots: int | None = None

    def __post_init__(self) -> None:
        validate_range("period_range", self.period_range)
        validate_range("duration_range", self.duration_range)
        if self.period_range[0] < 1:
            raise InvalidArgumentError(
                "period_range", self.period_range, "минимум должен быть >= 1"
            )
        if self.duration_range[0] < 1:
            raise InvalidArgumentError(
                "duration_range", self.duration_range, "минимум должен быть >= 1"
            )
        if self.count < 0:
            raise InvalidArgumentError("count", self.count, "значение < 0")
        if self.deadline_slots is not None and self.deadline_slots < 1:
            raise InvalidArgumentError(
                "deadline_slots", self.deadline_slots, "значение < 1"
            )


def gen_events(params: EventGenParams, horizon: int) -> tuple[Event, ...]:
    """Сгенерировать неперекрывающиеся спорадические события.

    Первое событие начинается через один разыгранный интервал; у каждого
    события свой интервал до следующего, длительность не больше интервала,
    дедлайн - начало плюс интервал.

    Example:
        period_range=[10, 10], duration_range=[3, 3], count=3 →
        события в слотах 10, 20, 30 длительностью 3.
    """
    rng = make_rng(params.seed, STREAM_EVENTS)
    period_low, period_high = params.period_range
    duration_low, duration_high = params.duration_range
    events: list[Event] = []
    cursor = int(rng.integers(period_low, period_high + 1))
    while len(events) < params.count and cursor < horizon:
        gap = int(rng.integers(period_low, period_high + 1))
        duration = min(int(rng.integers(duration_low, duration_high + 1)), gap)
        deadline = cursor + (params.deadline_slots or gap)
        events.append(Event(len(events), cursor, duration, deadline))
        cursor += gap
    logger.debug(f"Generated {len(events)} events over {horizon} slots")
    return tuple(events)
