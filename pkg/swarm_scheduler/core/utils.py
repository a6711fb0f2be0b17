"""Вспомогательные функции: валидаторы и детерминированные потоки случайности."""

import math

import numpy as np

from swarm_scheduler.core.exceptions import InvalidArgumentError

# =============================================================================
# Validators
# =============================================================================


def validate_positive(field: str, value: float) -> float:
    """Валидация строго положительного числа.

    Args:
        field: Имя поля для сообщения об ошибке.
        value: Проверяемое значение.

    Returns:
        Значение, приведённое к float.

    Raises:
        InvalidArgumentError: Если значение не число, не конечно или <= 0.
    """
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise InvalidArgumentError(field, value, "ожидается число")
    if not math.isfinite(value) or value <= 0:
        raise InvalidArgumentError(field, value, "значение должно быть больше нуля")
    return float(value)


def validate_non_negative(field: str, value: float) -> float:
    """Валидация неотрицательного конечного числа.

    Raises:
        InvalidArgumentError: Если значение не число, не конечно или < 0.
    """
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise InvalidArgumentError(field, value, "ожидается число")
    if not math.isfinite(value) or value < 0:
        raise InvalidArgumentError(field, value, "значение не может быть отрицательным")
    return float(value)


def validate_fraction(
    field: str, value: float, *, low_open: bool = False, high_open: bool = False
) -> float:
    """Валидация доли в интервале [0, 1] с настраиваемыми открытыми концами."""
    value = validate_non_negative(field, value)
    if (low_open and value == 0.0) or value > 1.0 or (high_open and value == 1.0):
        raise InvalidArgumentError(field, value, "значение вне допустимого интервала")
    return value


def validate_range(field: str, bounds: tuple[float, float]) -> tuple[float, float]:
    """Валидация пары [min, max] с min <= max."""
    if len(bounds) != 2:
        raise InvalidArgumentError(field, bounds, "ожидается пара [min, max]")
    low, high = bounds
    if low > high:
        raise InvalidArgumentError(field, bounds, "диапазон перевёрнут (min > max)")
    return low, high


# =============================================================================
# Random streams
# =============================================================================

# Назначения подпотоков; порядок и значения - часть формата воспроизводимости
STREAM_TRACES = 1
STREAM_EVENTS = 2
STREAM_DRIFT = 3
STREAM_POLICY = 4
STREAM_REWARD = 5


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Получить генератор для подпотока (seed, назначение, узел, ...).

    Args:
        seed: Главное зерно сценария.
        *key: Уточняющие целые (назначение подпотока, номер узла).

    Returns:
        Независимый детерминированный генератор numpy.
    """
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def derive_seed(master_seed: int, scenario_index: int) -> int:
    """Получить зерно сценария из главного зерна и индекса сценария.

    Одинаково для последовательного и параллельного прогона.
    """
    state = np.random.SeedSequence([master_seed, scenario_index]).generate_state(1)
    return int(state[0])
