"""Конфигурация системы логирования.

Настраивает логирование для всего приложения:
- Формат логов с временными метками (человекочитаемый)
- Ротацию лог-файлов по размеру
- Отдельный лог для команд экспериментов (actions.log)

Логирование настраивает точка входа CLI; импорт модуля ничего не настраивает.
"""

import logging
import logging.handlers
from pathlib import Path

from swarm_scheduler.infra.settings import get_settings

# Пример: "INFO     2026-10-09T12:05:22 | swarm_scheduler.core.engine | Run done: ..."
LOG_FORMAT = "%(levelname)-8s %(asctime)s | %(name)s | %(message)s"
DATE_FORMAT = "%Y-%m-%dT%H:%M:%S"

# Пример: "INFO  2026-10-09T12:05:22 RUN policy='PCP' seed=7 zeta=0.8120 result=OK"
ACTION_LOG_FORMAT = "%(levelname)-5s %(asctime)s %(message)s"

ACTION_LOGGER_NAME = "swarm_scheduler.actions"

DEFAULT_LOG_LEVEL = logging.INFO


def _logs_dir(logs_dir: Path | None) -> Path:
    directory = logs_dir or get_settings().get_logs_path()
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def setup_logging(
    level: int = DEFAULT_LOG_LEVEL,
    log_to_file: bool = True,
    log_to_console: bool = False,
    main_log_file: str = "swarmsim.log",
    max_bytes: int = 10 * 1024 * 1024,  # 10 MB
    backup_count: int = 5,
    logs_dir: Path | None = None,
) -> None:
    """Настроить корневой логгер.

    Args:
        level: Уровень логирования.
        log_to_file: Логировать в файл.
        log_to_console: Логировать в консоль (stderr).
        main_log_file: Имя основного файла логов.
        max_bytes: Максимальный размер файла лога перед ротацией.
        backup_count: Количество резервных копий логов.
        logs_dir: Директория логов (по умолчанию из настроек).
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    main_formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    if log_to_file:
        main_file_handler = logging.handlers.RotatingFileHandler(
            _logs_dir(logs_dir) / main_log_file,
            maxBytes=max_bytes,
            backupCount=backup_count,
            encoding="utf-8",
        )
        main_file_handler.setLevel(level)
        main_file_handler.setFormatter(main_formatter)
        root_logger.addHandler(main_file_handler)

    if log_to_console:
        console_handler = logging.StreamHandler()
        console_handler.setLevel(level)
        console_handler.setFormatter(main_formatter)
        root_logger.addHandler(console_handler)


def setup_action_logger(
    level: int = logging.INFO,
    log_file: str = "actions.log",
    max_bytes: int = 10 * 1024 * 1024,  # 10 MB
    backup_count: int = 5,
    logs_dir: Path | None = None,
) -> logging.Logger:
    """Настроить логгер команд экспериментов (RUN/COMPARE/SWEEP/REPORT).

    Returns:
        Настроенный логгер, не передающий записи в корневой.
    """
    action_logger = logging.getLogger(ACTION_LOGGER_NAME)
    action_logger.setLevel(level)
    action_logger.propagate = False
    action_logger.handlers.clear()

    action_file_handler = logging.handlers.RotatingFileHandler(
        _logs_dir(logs_dir) / log_file,
        maxBytes=max_bytes,
        backupCount=backup_count,
        encoding="utf-8",
    )
    action_file_handler.setLevel(level)
    action_file_handler.setFormatter(
        logging.Formatter(ACTION_LOG_FORMAT, datefmt=DATE_FORMAT)
    )
    action_logger.addHandler(action_file_handler)

    return action_logger


def configure_from_settings() -> None:
    """Настроить оба логгера по data/config.json."""
    settings = get_settings()
    level_name = str(settings.get("log_level", "INFO")).upper()
    level = getattr(logging, level_name, DEFAULT_LOG_LEVEL)
    max_bytes = int(settings.get("max_log_size_mb", 10)) * 1024 * 1024
    backup_count = int(settings.get("log_backup_count", 5))
    setup_logging(
        level=level,
        log_to_console=bool(settings.get("log_to_console", False)),
        max_bytes=max_bytes,
        backup_count=backup_count,
    )
    setup_action_logger(max_bytes=max_bytes, backup_count=backup_count)


def get_action_logger() -> logging.Logger:
    """Получить логгер команд экспериментов."""
    return logging.getLogger(ACTION_LOGGER_NAME)
