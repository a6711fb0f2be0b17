"""Сценарии экспериментов: одиночный прогон и сравнение политик.

Каждый сценарий пишет результаты атомарно в каталог вывода и
возвращает словарь с итогами для CLI и лога действий.
"""

import dataclasses
import logging
import statistics
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from swarm_scheduler.core.engine import SimResult, run_scenario
from swarm_scheduler.core.exceptions import (
    ConfigurationError,
    InvalidArgumentError,
    SimulationError,
)
from swarm_scheduler.core.metrics import (
    METRICS_COLUMNS,
    MetricReport,
    summarize,
    write_metrics_csv,
)
from swarm_scheduler.decorators import log_action
from swarm_scheduler.experiments.builder import build_scenario
from swarm_scheduler.experiments.config import RunConfig
from swarm_scheduler.infra.storage import (
    write_csv_atomic,
    write_json_atomic,
    write_text_atomic,
)

logger = logging.getLogger(__name__)

ACTIVITY_COLUMNS = ("slot", "node_id", "state")
EVENTS_COLUMNS = ("id", "start", "deadline", "outcome", "capturing_node")
ENERGY_COLUMNS = ("slot", "node_id", "stored", "harvested", "overflow")
COMPARE_COLUMNS = ("policy", *METRICS_COLUMNS)

RUN_FILES = (
    "activity.csv",
    "events.csv",
    "energy.csv",
    "metrics.csv",
    "resolved_config.json",
)


# =============================================================================
# Прогон
# =============================================================================


def simulate(config: RunConfig) -> tuple[SimResult, MetricReport, RunConfig]:
    """Собрать сценарий, выполнить его и посчитать метрики.

    Raises:
        ConfigurationError: Ошибка конфигурации или трассы.
        SimulationError: Сбой прогона (оборачивает доменные ошибки движка).
    """
    try:
        built = build_scenario(config)
    except InvalidArgumentError as e:
        raise ConfigurationError(e.field, e.reason) from e
    try:
        result = run_scenario(built.scenario)
    except (ValueError, OverflowError) as e:
        raise SimulationError(str(e)) from e
    report = summarize(result, built.resolved.sim.day_slots)
    return result, report, built.resolved


def write_run_bundle(
    result: SimResult, report: MetricReport, resolved: RunConfig, out_dir: Path
) -> list[Path]:
    """Записать пять файлов прогона в out_dir."""
    out_dir = Path(out_dir)
    write_csv_atomic(out_dir / "activity.csv", ACTIVITY_COLUMNS, result.activity_rows())
    write_csv_atomic(out_dir / "events.csv", EVENTS_COLUMNS, result.event_rows())
    write_csv_atomic(out_dir / "energy.csv", ENERGY_COLUMNS, result.energy_rows())
    write_metrics_csv(report, out_dir / "metrics.csv")
    write_json_atomic(out_dir / "resolved_config.json", resolved.to_dict())
    return [out_dir / name for name in RUN_FILES]


@log_action("RUN")
def run_experiment(config: RunConfig, *, out_dir: Path) -> dict[str, Any]:
    """Выполнить одиночный прогон и записать результаты.

    Returns:
        Словарь: policy, zeta, gamma_pct, idle_pct, events, files.

    Raises:
        ConfigurationError: Ошибка конфигурации.
        SimulationError: Сбой прогона.
        StorageError: Ошибка записи.
    """
    result, report, resolved = simulate(config)
    files = write_run_bundle(result, report, resolved, out_dir)
    return {
        "policy": result.policy_label,
        "zeta": report.zeta,
        "gamma_pct": report.gamma_pct,
        "idle_pct": report.idle_pct,
        "events": report.events,
        "brownouts": len(result.brownouts),
        "files": [str(path) for path in files],
    }


# =============================================================================
# Сравнение
# =============================================================================


def mean_daily_zeta(report: MetricReport) -> float | None:
    """Среднее ζ по суткам с определённым ζ."""
    values = [day.zeta for day in report.per_day if day.zeta is not None]
    return statistics.fmean(values) if values else None


def rank_policies(
    reports: dict[str, MetricReport],
) -> list[tuple[str, float | None, MetricReport]]:
    """Упорядочить политики по убыванию среднего ζ (неопределённое - в конце).

    При равенстве сохраняется порядок запроса.
    """
    ranked = [
        (label, mean_daily_zeta(report), report) for label, report in reports.items()
    ]
    return sorted(ranked, key=lambda item: -1.0 if item[1] is None else -item[1])


def format_summary(ranked: Sequence[tuple[str, float | None, MetricReport]]) -> str:
    """Текстовая таблица итогов сравнения."""
    lines = [
        "=" * 72,
        "Сравнение политик (по убыванию среднего ζ)",
        "=" * 72,
        f"{'#':<3} {'Политика':<14} {'ζ ср.':>8} {'ζ итог':>8} "
        f"{'Γ, %':>8} {'Простой, %':>11} {'Событий':>8}",
        "-" * 72,
    ]
    for place, (label, zeta, report) in enumerate(ranked, start=1):
        mean = "-" if zeta is None else f"{zeta:.4f}"
        total = "-" if report.zeta is None else f"{report.zeta:.4f}"
        lines.append(
            f"{place:<3} {label:<14} {mean:>8} {total:>8} {report.gamma_pct:>8.2f} "
            f"{report.idle_pct:>11.2f} {report.events:>8}"
        )
    lines.append("=" * 72)
    return "\n".join(lines) + "\n"


def compare_rows(label: str, report: MetricReport) -> list[tuple[Any, ...]]:
    """Строки compare.csv политики: сутки и итог."""
    return [(label, *day.to_row()) for day in (*report.per_day, report)]


@log_action("COMPARE")
def compare_policies(
    config: RunConfig, *, policies: Sequence[str], out_dir: Path
) -> dict[str, Any]:
    """Прогнать один и тот же сценарий для каждой политики.

    Трассы, события и зерно общие; меняется только [policy].kind.
    Одна и та же политика, указанная дважды, даёт одинаковые строки.

    Returns:
        Словарь: ranking (метки по убыванию ζ), rows, files.

    Raises:
        ConfigurationError: Если политик меньше двух.
    """
    if len(policies) < 2:
        raise ConfigurationError(
            "policies", "для сравнения нужно не меньше двух политик"
        )
    out_dir = Path(out_dir)
    reports: dict[str, MetricReport] = {}
    rows: list[tuple[Any, ...]] = []
    for kind in policies:
        policy = dataclasses.replace(config.policy, kind=kind)
        variant = dataclasses.replace(config, policy=policy)
        variant.validate()
        result, report, _ = simulate(variant)
        label = result.policy_label
        rows.extend(compare_rows(label, report))
        reports.setdefault(label, report)
        logger.info(
            f"Compared {label}: zeta={report.zeta} gamma={report.gamma_pct:.2f}%"
        )

    ranked = rank_policies(reports)
    write_csv_atomic(out_dir / "compare.csv", COMPARE_COLUMNS, rows)
    write_text_atomic(out_dir / "summary.txt", format_summary(ranked))
    return {
        "ranking": [label for label, _, _ in ranked],
        "rows": len(rows),
        "summary": format_summary(ranked),
        "files": [str(out_dir / "compare.csv"), str(out_dir / "summary.txt")],
    }
