"""Пользовательские исключения для Swarm Scheduler.

Этот модуль содержит специализированные исключения для ошибок
моделирования энергии, выбора рабочих циклов, симуляции и ввода-вывода.
"""

from typing import Any

# =============================================================================
# Исключения для аргументов и арифметики
# =============================================================================


class InvalidArgumentError(ValueError):
    """Исключение при невалидном аргументе операции.

    Сообщение: "Невалидный аргумент '{field}' = {value}: {reason}"
    Выбрасывается: quantize_energy(), select_duty_cycles(), генераторы трасс
    """

    def __init__(self, field: str, value: Any, reason: str):
        self.field = field
        self.value = value
        self.reason = reason
        super().__init__(f"Невалидный аргумент '{field}' = {value!r}: {reason}")


class HyperperiodOverflowError(OverflowError):
    """Исключение, когда НОК периодов выходит за допустимую разрядность."""

    def __init__(self, periods: list[int], limit: int):
        self.periods = periods
        self.limit = limit
        super().__init__(
            f"Гиперпериод для {len(periods)} периодов превышает предел {limit}"
        )


# =============================================================================
# Исключения для энергии и узлов
# =============================================================================


class EnergyUnderflowError(ValueError):
    """Исключение при попытке потратить больше энергии, чем доступно.

    Сигнализирует об ошибке движка: он никогда не должен запрашивать
    у конденсатора больше, чем в нём есть.

    Выбрасывается: capacitor_step(), CapacitorBank.draw()
    """

    def __init__(self, requested: float, available: float):
        self.requested = requested
        self.available = available
        super().__init__(
            f"Недостаточно энергии: доступно {available:.6f} мДж, "
            f"требуется {requested:.6f} мДж"
        )


class InsufficientNodesError(ValueError):
    """Исключение, когда узлов меньше, чем рабочих циклов в наборе."""

    def __init__(self, available: int, required: int):
        self.available = available
        self.required = required
        self.min_node_count = required
        super().__init__(
            f"Недостаточно узлов: доступно {available}, требуется минимум {required}"
        )


# =============================================================================
# Исключения для политик
# =============================================================================


class PolicyNotFoundError(ValueError):
    """Исключение, когда политика с указанным именем не зарегистрирована."""

    def __init__(self, kind: str):
        self.kind = kind
        super().__init__(f"Неизвестная политика '{kind}'")


# =============================================================================
# Исключения для конфигурации и данных
# =============================================================================


class ConfigurationError(ValueError):
    """Исключение при ошибке в конфигурации сценария.

    Сообщение: "Ошибка конфигурации [{key}]: {reason}"
    Выбрасывается: загрузчик RunConfig, проверка периодов ACES
    """

    def __init__(self, key: str, reason: str, line: int | None = None):
        self.key = key
        self.reason = reason
        self.line = line
        location = f" (строка {line})" if line is not None else ""
        super().__init__(f"Ошибка конфигурации [{key}]{location}: {reason}")


class TraceParseError(ValueError):
    """Исключение при разборе CSV-файла энергетической трассы."""

    def __init__(self, path: str, line: int, reason: str):
        self.path = path
        self.line = line
        self.reason = reason
        super().__init__(f"Ошибка разбора '{path}', строка {line}: {reason}")


class UndefinedMetricError(ValueError):
    """Исключение, когда метрика не определена (например, нет событий)."""

    def __init__(self, metric: str, reason: str):
        self.metric = metric
        self.reason = reason
        super().__init__(f"Метрика '{metric}' не определена: {reason}")


class StorageError(Exception):
    """Исключение при ошибках записи или чтения результатов.

    Выбрасывается: infra.storage (атомарная запись CSV/JSON)
    """

    pass


# =============================================================================
# Исключения для симуляции
# =============================================================================


class SimulationError(Exception):
    """Исключение при сбое прогона сценария."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"Ошибка симуляции: {reason}")
