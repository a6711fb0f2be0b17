"""Атомарная запись результатов: CSV и JSON.

Файл сначала пишется во временный файл рядом с целевым, затем
переименовывается через os.replace. CSV - UTF-8, окончания строк LF,
вещественные числа с 9 значащими цифрами.
"""

import csv
import json
import logging
import os
import tempfile
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

from swarm_scheduler.core.exceptions import StorageError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".9g"


def format_cell(value: Any) -> Any:
    """Привести значение к виду для CSV (float - 9 значащих цифр, None - пусто)."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    return value


def _atomic_write(filepath: Path, write: Any) -> None:
    filepath.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = None
    try:
        with tempfile.NamedTemporaryFile(
            mode="w",
            encoding="utf-8",
            newline="",
            dir=filepath.parent,
            delete=False,
            suffix=".tmp",
        ) as tmp_file:
            tmp_path = tmp_file.name
            write(tmp_file)
        os.replace(tmp_path, filepath)
    except OSError as e:
        if tmp_path is not None and Path(tmp_path).exists():
            Path(tmp_path).unlink()
        raise StorageError(f"Ошибка записи файла {filepath}: {e}") from e


def write_csv_atomic(
    filepath: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> int:
    """Записать CSV атомарно.

    Args:
        filepath: Целевой файл.
        header: Заголовок (фиксированный порядок столбцов).
        rows: Строки значений.

    Returns:
        Число записанных строк (без заголовка).

    Raises:
        StorageError: При ошибке записи.
    """
    filepath = Path(filepath)
    count = 0

    def write(handle: Any) -> None:
        nonlocal count
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(value) for value in row])
            count += 1

    _atomic_write(filepath, write)
    logger.debug(f"Saved {count} rows to {filepath}")
    return count


def write_json_atomic(filepath: str | Path, data: Any) -> None:
    """Записать JSON атомарно (отступ 2, ключи отсортированы).

    Raises:
        StorageError: При ошибке записи или несериализуемых данных.
    """
    filepath = Path(filepath)
    try:
        payload = json.dumps(data, indent=2, ensure_ascii=False, sort_keys=True)
    except (TypeError, ValueError) as e:
        raise StorageError(f"Данные для {filepath} не сериализуются в JSON: {e}") from e
    _atomic_write(filepath, lambda handle: handle.write(payload + "\n"))
    logger.debug(f"Saved JSON to {filepath}")


def write_text_atomic(filepath: str | Path, text: str) -> None:
    """Записать текстовый файл атомарно."""
    _atomic_write(Path(filepath), lambda handle: handle.write(text))


def read_json(filepath: str | Path) -> Any:
    """Прочитать JSON-файл.

    Raises:
        StorageError: Если файл отсутствует или повреждён.
    """
    filepath = Path(filepath)
    try:
        with open(filepath, encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise StorageError(f"Ошибка чтения файла {filepath}: {e}") from e
