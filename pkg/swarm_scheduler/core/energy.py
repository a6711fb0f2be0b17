"""Квантование энергии и модель заряда/разряда накопителя."""

import math
from dataclasses import dataclass

from swarm_scheduler.core.exceptions import EnergyUnderflowError, InvalidArgumentError
from swarm_scheduler.core.models import CapacitorBank, EnergyLevel

# Допуск сравнения при проверке недостатка энергии
UNDERFLOW_TOLERANCE = 1e-9


@dataclass(frozen=True, slots=True)
class StepReport:
    """Результат одного шага накопителя.

    Attributes:
        bank: Накопитель после шага.
        overflow: Энергия, отброшенная на ограничении ёмкости, мДж.
        leaked: Энергия саморазряда за шаг, мДж.
    """

    bank: CapacitorBank
    overflow: float
    leaked: float


def quantize_energy(raw: float, unit: float) -> EnergyLevel:
    """Квантовать энергию в целое число единиц.

    Дробный остаток отбрасывается и не переносится.

    Args:
        raw: Энергия, мДж (>= 0).
        unit: Единичная энергия, мДж (> 0).

    Returns:
        EnergyLevel с level = floor(raw / unit).

    Raises:
        InvalidArgumentError: Если unit <= 0 или raw < 0.

    Example:
        >>> quantize_energy(10.0, 3.0).level
        3
    """
    if unit <= 0:
        raise InvalidArgumentError("unit", unit, "единичная энергия должна быть > 0")
    if raw < 0:
        raise InvalidArgumentError("raw", raw, "энергия не может быть отрицательной")
    ratio = raw / unit
    level = math.floor(ratio)
    # k·unit / unit может дать k - ε в плавающей точке
    if math.isclose(ratio, level + 1, rel_tol=1e-12):
        level += 1
    return EnergyLevel(level=level, unit_energy=unit)


def charge_balance(
    stored: float,
    capacity: float,
    charge_efficiency: float,
    leakage_rate: float,
    harvested: float,
    consumed: float,
) -> tuple[float, float, float]:
    """Скалярная арифметика шага накопителя.

    Утечка применяется до заряда.

    Returns:
        Кортеж (новый запас, переполнение, утечка), мДж.

    Raises:
        EnergyUnderflowError: Если consumed превышает доступную энергию.
    """
    leaked = stored * leakage_rate
    available = stored - leaked + charge_efficiency * harvested
    if consumed > available + UNDERFLOW_TOLERANCE:
        raise EnergyUnderflowError(requested=consumed, available=available)
    level = available - consumed
    overflow = max(0.0, level - capacity)
    return min(max(level, 0.0), capacity), overflow, leaked


def capacitor_step(
    bank: CapacitorBank, harvested: float, consumed: float
) -> StepReport:
    """Один слот накопителя: утечка, заряд, расход и ограничение ёмкостью.

    stored' = clamp(stored·(1 − leak) + eff·harvested − consumed, 0, capacity)

    Args:
        bank: Текущее состояние накопителя.
        harvested: Собранная за слот энергия, мДж (>= 0).
        consumed: Израсходованная за слот энергия, мДж (>= 0).

    Returns:
        StepReport с новым накопителем, переполнением и утечкой.

    Raises:
        InvalidArgumentError: Если harvested или consumed отрицательны.
        EnergyUnderflowError: Если расход больше доступной энергии.
    """
    if harvested < 0:
        raise InvalidArgumentError("harvested", harvested, "значение < 0")
    if consumed < 0:
        raise InvalidArgumentError("consumed", consumed, "значение < 0")
    stored, overflow, leaked = charge_balance(
        bank.stored,
        bank.capacity,
        bank.charge_efficiency,
        bank.leakage_rate,
        harvested,
        consumed,
    )
    return StepReport(bank=bank.with_stored(stored), overflow=overflow, leaked=leaked)
