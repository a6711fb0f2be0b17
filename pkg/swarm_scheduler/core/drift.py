"""Дрейф локальных часов узлов и случайные контр-дрейфы."""

import math
from dataclasses import dataclass

import numpy as np

from swarm_scheduler.core.models import NodeState

# Границы ошибки безбатарейного таймера: ±1 мс на 2.2 нФ ... 1 с на 2200 нФ
DRIFT_BOUND_LOW = (2.2e-9, 1e-3)
DRIFT_BOUND_HIGH = (2.2e-6, 1.0)


@dataclass(frozen=True, slots=True)
class DriftParams:
    """Параметры дрейфа сценария.

    Attributes:
        enabled: Моделировать дрейф часов.
        counter_drift: Добавлять случайные контр-дрейфы.
        counter_drift_mean_slots: Средний интервал между контр-дрейфами, слоты.
        reference_s: Интервал, за который дрейф достигает границы, с.
    """

    enabled: bool = True
    counter_drift: bool = True
    counter_drift_mean_slots: float = 3600.0
    reference_s: float = 3600.0


@dataclass(frozen=True, slots=True)
class DriftModel:
    """Модель дрейфа часов одного узла.

    Attributes:
        rate: Дрейф в секундах на секунду реального времени.
        slot_duration: Длительность слота, с.
        bound_s: Предел накопленного дрейфа между коррекциями, с.
        corrections: Слоты контр-дрейфа (накопленный дрейф сбрасывается в 0).
    """

    rate: float
    slot_duration: float
    bound_s: float = math.inf
    corrections: tuple[int, ...] = ()

    @classmethod
    def disabled(cls, slot_duration: float) -> "DriftModel":
        """Модель без дрейфа."""
        return cls(rate=0.0, slot_duration=slot_duration)

    def accumulated(self, true_slots: int | np.ndarray) -> np.ndarray:
        """Накопленный дрейф в секундах к началу слотов."""
        slots = np.asarray(true_slots, dtype=np.int64)
        if self.rate == 0.0:
            return np.zeros(slots.shape)
        # последний контр-дрейф не позже слота (0, если его ещё не было)
        corrections = np.asarray((0, *self.corrections), dtype=np.int64)
        base = corrections[np.searchsorted(corrections, slots, side="right") - 1]
        drift = self.rate * (slots - base) * self.slot_duration
        return np.clip(drift, -self.bound_s, self.bound_s)

    def local_slots(self, horizon: int) -> np.ndarray:
        """Локальные номера слотов 0..horizon-1; политики видят только их.

        Example:
            Дрейф +1.2 слота к t=1000 даёт локальный слот 1001.
        """
        slots = np.arange(horizon, dtype=np.int64)
        if self.rate == 0.0:
            return slots
        shift = self.accumulated(slots) / self.slot_duration + 0.5
        offset = np.floor(shift).astype(np.int64)
        return np.maximum(slots + offset, 0)


def drift_bound_for(capacitance_f: float) -> float:
    """Граница ошибки таймера (с), лог-линейная интерполяция по ёмкости."""
    (c_low, e_low), (c_high, e_high) = DRIFT_BOUND_LOW, DRIFT_BOUND_HIGH
    capacitance = min(max(capacitance_f, c_low), c_high)
    share = math.log(capacitance / c_low) / math.log(c_high / c_low)
    return math.exp(math.log(e_low) + share * (math.log(e_high) - math.log(e_low)))


def sample_drift_model(
    capacitance_f: float,
    slot_duration: float,
    horizon: int,
    rng: np.random.Generator,
    *,
    reference_s: float = 3600.0,
    counter_drift: bool = True,
    counter_drift_mean_slots: float = 3600.0,
) -> DriftModel:
    """Сгенерировать дрейф узла.

    Скорость равномерна в ±bound/reference_s, контр-дрейфы - пуассоновский
    поток со средним интервалом counter_drift_mean_slots.
    """
    bound = drift_bound_for(capacitance_f)
    rate = float(rng.uniform(-bound, bound)) / reference_s
    corrections: list[int] = []
    if counter_drift and counter_drift_mean_slots > 0:
        slot = 0.0
        while True:
            slot += float(rng.exponential(counter_drift_mean_slots))
            if slot >= horizon:
                break
            corrections.append(int(slot))
    return DriftModel(
        rate=rate,
        slot_duration=slot_duration,
        bound_s=bound,
        corrections=tuple(sorted(set(corrections))),
    )


def drifted_slot(node: NodeState, true_slot: int, drift: DriftModel) -> int:
    """Локальный номер слота узла с учётом дрейфа и контр-дрейфов.

    Обновляет node.local_clock. Движок берёт те же номера разом из
    DriftModel.local_slots.

    Example:
        Дрейф +1.2 слота к t=1000 даёт локальный слот 1001.
    """
    offset = float(drift.accumulated(true_slot)) / drift.slot_duration
    local = max(0, true_slot + math.floor(offset + 0.5))
    node.local_clock = local * drift.slot_duration
    return local
