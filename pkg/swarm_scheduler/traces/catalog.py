"""Каталог из 15 задач узла.

Каталог хранится в data/task_catalog.json. Измерены только значения
акустического DNN-классификатора; остальные записи помечены
illustrative и служат заполнителями.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path

from swarm_scheduler.core.exceptions import (
    ConfigurationError,
    InvalidArgumentError,
    StorageError,
)
from swarm_scheduler.core.models import TaskSpec
from swarm_scheduler.core.utils import validate_non_negative, validate_positive
from swarm_scheduler.infra.settings import get_settings
from swarm_scheduler.infra.storage import read_json

logger = logging.getLogger(__name__)

TASK_NAMES = (
    "rsa_encryption",
    "speaker_detection",
    "knn_audio_classification",
    "dnn_audio_classification",
    "dnn_keyword_spotting",
    "dnn_image_classification",
    "decision_tree_image_classification",
    "lof_temperature_anomaly",
    "shape_detection",
    "activity_recognition",
    "cuckoo_filtering",
    "blowfish_encryption",
    "bit_count",
    "dnn_visual_wake_word",
    "dnn_image_recognition",
)

DEFAULT_TASK = "dnn_audio_classification"


@dataclass(frozen=True, slots=True)
class CatalogEntry:
    """Запись каталога в физических единицах.

    Attributes:
        name: Ключ задачи.
        description: Описание.
        runtime_s: Время выполнения, с.
        energy_mj: Энергия выполнения, мДж.
        sensing_energy_mj: Энергия захвата, мДж.
        illustrative: Значения не измерены.
    """

    name: str
    description: str
    runtime_s: float
    energy_mj: float
    sensing_energy_mj: float = 0.0
    illustrative: bool = True

    def __post_init__(self) -> None:
        validate_positive("runtime_s", self.runtime_s)
        validate_positive("energy_mj", self.energy_mj)
        validate_non_negative("sensing_energy_mj", self.sensing_energy_mj)

    def runtime_slots(self, slot_duration: float) -> int:
        """Число слотов выполнения (округление вверх)."""
        validate_positive("slot_duration", slot_duration)
        return max(1, math.ceil(round(self.runtime_s / slot_duration, 9)))

    def to_task_spec(self, slot_duration: float) -> TaskSpec:
        """TaskSpec для заданной длительности слота.

        Example:
            3.89 с, 26.72 мДж, слот 1 с → 4 слота по 6.68 мДж.
        """
        slots = self.runtime_slots(slot_duration)
        return TaskSpec(
            name=self.name,
            runtime_slots=slots,
            energy_per_slot=self.energy_mj / slots,
            sensing_energy=self.sensing_energy_mj,
            illustrative=self.illustrative,
        )


class TaskCatalog:
    """Каталог задач с доступом по имени."""

    def __init__(self, entries: list[CatalogEntry]):
        self._entries = {entry.name: entry for entry in entries}
        missing = [name for name in TASK_NAMES if name not in self._entries]
        extra = [name for name in self._entries if name not in TASK_NAMES]
        if missing or extra or len(entries) != len(TASK_NAMES):
            raise ConfigurationError(
                "task_catalog",
                f"ожидается ровно {len(TASK_NAMES)} задач; "
                f"нет: {missing}, лишние: {extra}",
            )

    def get(self, name: str) -> CatalogEntry:
        """Получить запись по имени.

        Raises:
            ConfigurationError: Если задачи нет в каталоге.
        """
        entry = self._entries.get(name.strip().lower())
        if entry is None:
            known = ", ".join(TASK_NAMES)
            raise ConfigurationError(
                "task.name", f"неизвестная задача '{name}'. Доступные: {known}"
            )
        return entry

    def names(self) -> list[str]:
        """Имена в каноническом порядке."""
        return list(TASK_NAMES)

    def __iter__(self):
        return (self._entries[name] for name in TASK_NAMES)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, name: object) -> bool:
        return name in self._entries

    def __repr__(self) -> str:
        measured = sum(not entry.illustrative for entry in self._entries.values())
        return f"TaskCatalog(tasks={len(self)}, measured={measured})"


def load_task_catalog(filepath: str | Path | None = None) -> TaskCatalog:
    """Загрузить каталог задач.

    Args:
        filepath: Путь к JSON-файлу; по умолчанию файл из настроек.

    Raises:
        ConfigurationError: Если файл отсутствует, повреждён или неполон.
    """
    if filepath is None:
        settings = get_settings()
        filename = settings.get("task_catalog_file", "task_catalog.json")
        filepath = settings.get_data_path(filename)
    try:
        payload = read_json(filepath)
    except StorageError as e:
        raise ConfigurationError("task_catalog", str(e)) from e

    records = payload.get("tasks") if isinstance(payload, dict) else None
    if not isinstance(records, list):
        raise ConfigurationError("task_catalog", "ожидается объект с массивом 'tasks'")
    try:
        entries = [CatalogEntry(**record) for record in records]
    except (TypeError, InvalidArgumentError) as e:
        raise ConfigurationError("task_catalog", f"некорректная запись: {e}") from e
    catalog = TaskCatalog(entries)
    logger.debug(f"Loaded task catalog from {filepath}: {catalog!r}")
    return catalog


def get_task(
    name: str, slot_duration: float, catalog: TaskCatalog | None = None
) -> TaskSpec:
    """TaskSpec задачи каталога по имени."""
    catalog = catalog or load_task_catalog()
    return catalog.get(name).to_task_spec(slot_duration)


def default_unit_energy(catalog: TaskCatalog, slot_duration: float) -> float:
    """Единичная энергия по умолчанию: стоимость слота самой дешёвой задачи."""
    cheapest = min(catalog, key=lambda entry: entry.energy_mj)
    return cheapest.to_task_spec(slot_duration).energy_per_slot
