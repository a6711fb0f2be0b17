"""Декораторы для логирования команд экспериментов.

Содержит декоратор @log_action для трассировки RUN/COMPARE/SWEEP/REPORT.
"""

import functools
from collections.abc import Callable
from typing import Any

from swarm_scheduler.logging_config import get_action_logger

# Поля результата, попадающие в строку лога
_RESULT_FIELDS = ("policy", "zeta", "gamma_pct", "rows", "failed", "files")


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    if isinstance(value, str):
        return f"'{value}'"
    if isinstance(value, (list, tuple)):
        return f"{len(value)}"
    return str(value)


def log_action(
    action_type: str | None = None, verbose: bool = False
) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
    """Декоратор для логирования команд экспериментов.

    Структура лога:
        action (RUN/COMPARE/SWEEP/REPORT), параметры вызова (policies,
        seed, out_dir), ключевые поля результата (zeta, gamma_pct, rows),
        result (OK/ERROR), error_type/error_message при исключениях.

    Декоратор НЕ глотает исключения - пробрасывает дальше, но фиксирует их в лог.

    Args:
        action_type: Тип действия. Если None, берётся имя функции.
        verbose: Добавлять все поля результата.

    Example:
        @log_action("RUN")
        def run_experiment(config: RunConfig, out_dir: Path) -> dict: ...

        # Лог: INFO  2026-10-09T12:05:22 RUN policy='PCP' seed=7
        #      out_dir='results' zeta=0.8120 gamma_pct=35.0000 result=OK
    """

    def decorator(func: Callable[..., Any]) -> Callable[..., Any]:
        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            logger = get_action_logger()
            action = action_type or func.__name__.upper()

            log_parts = [action]
            log_parts.extend(_describe_call(args, kwargs))

            try:
                result = func(*args, **kwargs)

                if isinstance(result, dict):
                    fields = result.keys() if verbose else _RESULT_FIELDS
                    for key in fields:
                        if key in result and result[key] is not None:
                            log_parts.append(f"{key}={_format_value(result[key])}")

                log_parts.append("result=OK")
                logger.info(" ".join(log_parts))
                return result

            except Exception as e:
                log_parts.append("result=ERROR")
                log_parts.append(f"error_type={type(e).__name__}")
                log_parts.append(f"error_message='{e}'")
                logger.error(" ".join(log_parts))
                raise

        return wrapper

    return decorator


def _describe_call(args: tuple, kwargs: dict) -> list[str]:
    """Извлечь из аргументов политику, зерно и каталог результатов.

    Первый позиционный аргумент с атрибутами policy/sim считается RunConfig.
    """
    parts = []
    config = args[0] if args and hasattr(args[0], "sim") else kwargs.get("config")
    if config is not None:
        parts.append(f"policy='{config.policy.kind}'")
        parts.append(f"seed={config.sim.seed}")
    if "policies" in kwargs:
        parts.append(f"policies='{','.join(kwargs['policies'])}'")
    for key in ("out_dir", "results_dir"):
        if key in kwargs:
            parts.append(f"{key}='{kwargs[key]}'")
    return parts
