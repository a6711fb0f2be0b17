"""Настройки приложения (Singleton).

Модуль содержит класс SettingsLoader, реализующий паттерн Singleton
для единой точки доступа к настройкам симулятора (data/config.json).
"""

import json
import logging
from pathlib import Path
from typing import Any

logger = logging.getLogger(__name__)

# Корень проекта (рядом лежат data/ и logs/)
PROJECT_ROOT = Path(__file__).parent.parent.parent


class SettingsLoader:
    """Singleton для загрузки и кеширования настроек приложения.

    Ключи конфигурации:
        - data_dir: Директория данных (по умолчанию "data")
        - logs_dir: Директория логов (по умолчанию "logs")
        - log_level: Уровень логирования (по умолчанию "INFO")
        - log_to_console: Дублировать лог в консоль (по умолчанию False)
        - max_log_size_mb: Максимальный размер лог-файла в MB
        - log_backup_count: Количество резервных копий логов
        - results_dir: Директория результатов по умолчанию
        - task_catalog_file: Файл каталога задач
        - v_max: Напряжение накопителя для пересчёта ёмкости в энергию, В

    Пример использования:
        >>> settings = SettingsLoader()
        >>> settings.get("v_max")
        3.3
    """

    _instance: "SettingsLoader | None" = None
    _initialized: bool = False

    def __new__(cls) -> "SettingsLoader":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self) -> None:
        if self._initialized:
            return

        self._config_path = PROJECT_ROOT / "data" / "config.json"
        self._settings: dict[str, Any] = {}
        self._defaults: dict[str, Any] = {
            "data_dir": "data",
            "logs_dir": "logs",
            "log_level": "INFO",
            "log_to_console": False,
            "max_log_size_mb": 10,
            "log_backup_count": 5,
            "results_dir": "results",
            "task_catalog_file": "task_catalog.json",
            "v_max": 3.3,
        }
        self._load()
        self.__class__._initialized = True

    def _load(self) -> None:
        """Загрузить настройки; при ошибке используются значения по умолчанию."""
        try:
            if self._config_path.exists():
                with open(self._config_path, encoding="utf-8") as f:
                    self._settings = {**self._defaults, **json.load(f)}
            else:
                self._settings = self._defaults.copy()
        except (json.JSONDecodeError, OSError) as e:
            logger.warning(f"Failed to load settings ({e}), using defaults")
            self._settings = self._defaults.copy()

    def get(self, key: str, default: Any = None) -> Any:
        """Получить значение настройки по ключу."""
        return self._settings.get(key, default)

    def get_data_path(self, filename: str = "") -> Path:
        """Путь к файлу в директории данных."""
        data_dir = PROJECT_ROOT / self.get("data_dir", "data")
        return data_dir / filename if filename else data_dir

    def get_logs_path(self) -> Path:
        """Путь к директории логов."""
        return PROJECT_ROOT / self.get("logs_dir", "logs")

    def get_results_path(self) -> Path:
        """Директория результатов по умолчанию."""
        return Path(self.get("results_dir", "results"))

    def __repr__(self) -> str:
        return (
            f"SettingsLoader(config_path='{self._config_path}', "
            f"settings_count={len(self._settings)})"
        )


def get_settings() -> SettingsLoader:
    """Получить экземпляр SettingsLoader."""
    return SettingsLoader()
