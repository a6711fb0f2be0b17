"""Чтение записанных энергетических трасс из CSV.

Формат: заголовок ``slot,node_id,mj``; строки отсортированы по
(node_id, slot); слоты каждого узла идут подряд с нуля.
"""

import csv
import logging
import math
from pathlib import Path

import numpy as np

from swarm_scheduler.core.exceptions import TraceParseError
from swarm_scheduler.traces.generators import EnergyTrace

logger = logging.getLogger(__name__)

TRACE_HEADER = ("slot", "node_id", "mj")


def _parse_row(path: str, line: int, row: list[str]) -> tuple[int, int, float]:
    if len(row) != len(TRACE_HEADER):
        reason = f"ожидается {len(TRACE_HEADER)} столбца, получено {len(row)}"
        raise TraceParseError(path, line, reason)
    try:
        slot, node_id, energy = int(row[0]), int(row[1]), float(row[2])
    except ValueError as e:
        raise TraceParseError(path, line, f"некорректное значение: {e}") from e
    if not math.isfinite(energy) or energy < 0:
        raise TraceParseError(
            path, line, f"энергия должна быть >= 0, получено {row[2]}"
        )
    return slot, node_id, energy


def load_trace_csv(filepath: str | Path) -> list[EnergyTrace]:
    """Загрузить трассы всех узлов из CSV.

    Returns:
        По одной EnergyTrace на node_id, в порядке номеров узлов. Режим
        определяется по дисперсии.

    Raises:
        TraceParseError: Файл отсутствует, неверный заголовок, пропуск
            слота, нарушен порядок, отрицательная энергия или битая строка.
    """
    path = str(filepath)
    try:
        handle = open(filepath, encoding="utf-8", newline="")
    except OSError as e:
        raise TraceParseError(path, 0, f"файл недоступен: {e}") from e

    samples: dict[int, list[float]] = {}
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(cell.strip() for cell in header) != TRACE_HEADER:
            raise TraceParseError(
                path, 1, f"ожидается заголовок {','.join(TRACE_HEADER)}"
            )

        last_node: int | None = None
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            slot, node_id, energy = _parse_row(path, line, row)
            if last_node is not None and node_id < last_node:
                raise TraceParseError(
                    path, line, f"узел {node_id} после узла {last_node}"
                )
            expected = len(samples.setdefault(node_id, []))
            if slot != expected:
                reason = (
                    f"пропуск слота у узла {node_id}: "
                    f"ожидался {expected}, получен {slot}"
                )
                raise TraceParseError(path, line, reason)
            samples[node_id].append(energy)
            last_node = node_id

    if not samples:
        raise TraceParseError(path, 2, "нет строк данных")
    traces = [
        EnergyTrace.from_samples(node_id, np.array(values))
        for node_id, values in samples.items()
    ]
    logger.info(f"Loaded {len(traces)} traces from {path}")
    return traces
