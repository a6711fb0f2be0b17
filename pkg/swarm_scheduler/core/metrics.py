"""Метрики оценки: ζ (доля захваченных и обработанных событий), Γ
(избыточное время активности), время простоя и посуточная агрегация."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from swarm_scheduler.core.engine import EventOutcome, EventRecord, SimResult
from swarm_scheduler.core.exceptions import InvalidArgumentError, UndefinedMetricError
from swarm_scheduler.infra.storage import write_csv_atomic

logger = logging.getLogger(__name__)

METRICS_COLUMNS = (
    "day",
    "zeta",
    "gamma_pct",
    "idle_pct",
    "unprocessed_capture_pct",
    "events",
    "captured",
    "processed",
    "multi_active_pct",
    "partial",
)


@dataclass(frozen=True, slots=True)
class MetricReport:
    """Метрики прогона или одних суток.

    Attributes:
        zeta: ζ в [0, 1]; None, если событий нет.
        gamma_pct: Γ, %.
        idle_pct: Доля слотов без активных узлов, %.
        unprocessed_capture_pct: Доля захваченных, но не обработанных событий, %.
        multi_active_pct: Доля слотов с двумя и более активными узлами, %.
        events: Число учтённых событий.
        captured: Захвачено.
        processed: Захвачено и обработано в срок.
        excluded: Событий с дедлайном за горизонтом (не учтены).
        day: Номер суток с 1 (None для итога).
        partial: Неполные сутки.
        per_day: Посуточные отчёты (только у итога).
    """

    zeta: float | None
    gamma_pct: float
    idle_pct: float
    unprocessed_capture_pct: float
    multi_active_pct: float
    events: int
    captured: int
    processed: int
    excluded: int = 0
    day: int | None = None
    partial: bool = False
    per_day: tuple["MetricReport", ...] = field(default_factory=tuple)

    def to_row(self) -> tuple[object, ...]:
        """Строка metrics.csv в порядке METRICS_COLUMNS."""
        return (
            "total" if self.day is None else self.day,
            self.zeta,
            self.gamma_pct,
            self.idle_pct,
            self.unprocessed_capture_pct,
            self.events,
            self.captured,
            self.processed,
            self.multi_active_pct,
            self.partial,
        )


# =============================================================================
# Подсчёт
# =============================================================================


def _counted(records: Sequence[EventRecord], horizon: int) -> list[EventRecord]:
    """События, исход которых определён в пределах горизонта."""
    return [r for r in records if r.event.deadline_slot <= horizon - 1]


def _outcome_counts(records: Sequence[EventRecord]) -> tuple[int, int]:
    captured = sum(r.outcome is not EventOutcome.MISSED for r in records)
    processed = sum(r.outcome is EventOutcome.CAPTURED_AND_PROCESSED for r in records)
    return captured, processed


def _share(mask: np.ndarray) -> float:
    return 100.0 * float(np.count_nonzero(mask)) / len(mask)


def _zeta(records: Sequence[EventRecord]) -> float:
    if not records:
        raise UndefinedMetricError("zeta", "нет событий")
    _, processed = _outcome_counts(records)
    return processed / len(records)


def capture_process_success_rate(result: SimResult) -> float:
    """ζ = |захвачено ∩ обработано| / |все события|.

    События с дедлайном за горизонтом не учитываются.

    Raises:
        UndefinedMetricError: Если учитываемых событий нет.

    Example:
        10 событий, 8 захвачено, 6 из них обработано → 0.6
    """
    return _zeta(_counted(result.events, result.horizon))


def _check_horizon(horizon: int) -> None:
    if horizon < 1:
        raise InvalidArgumentError("horizon", horizon, "горизонт < 1")


def redundant_active_time(result: SimResult) -> float:
    """Γ = 100·(T − T_1)/T, где T_1 - слоты ровно с одним активным узлом.

    Слоты без активных узлов входят в числитель.

    Example:
        T=10, ровно один активный узел в 3 слотах → 70.0
    """
    _check_horizon(result.horizon)
    return _share(result.active_counts != 1)


def idle_time(result: SimResult) -> float:
    """Доля слотов без активных узлов, %."""
    _check_horizon(result.horizon)
    return _share(result.active_counts == 0)


def multi_active_time(result: SimResult) -> float:
    """Доля слотов с двумя и более активными узлами, %."""
    _check_horizon(result.horizon)
    return _share(result.active_counts >= 2)


def unprocessed_capture_fraction(result: SimResult) -> float:
    """Доля захваченных событий, не обработанных в срок (0 без захватов)."""
    captured, processed = _outcome_counts(_counted(result.events, result.horizon))
    return (captured - processed) / captured if captured else 0.0


def _report(
    counts: np.ndarray,
    records: Sequence[EventRecord],
    excluded: int,
    day: int | None = None,
    partial: bool = False,
) -> MetricReport:
    captured, processed = _outcome_counts(records)
    return MetricReport(
        zeta=processed / len(records) if records else None,
        gamma_pct=_share(counts != 1),
        idle_pct=_share(counts == 0),
        unprocessed_capture_pct=(
            100.0 * (captured - processed) / captured if captured else 0.0
        ),
        multi_active_pct=_share(counts >= 2),
        events=len(records),
        captured=captured,
        processed=processed,
        excluded=excluded,
        day=day,
        partial=partial,
    )


def aggregate_daily(result: SimResult, slots_per_day: int) -> list[MetricReport]:
    """Метрики по суткам.

    События относятся к суткам своего начала; последние неполные сутки
    включаются и помечаются partial. Сутки без событий дают zeta=None.

    Raises:
        InvalidArgumentError: Если slots_per_day < 1.
    """
    if slots_per_day < 1:
        raise InvalidArgumentError(
            "slots_per_day", slots_per_day, "нужен хотя бы один слот"
        )
    _check_horizon(result.horizon)
    counts = result.active_counts
    counted = _counted(result.events, result.horizon)
    days = math.ceil(result.horizon / slots_per_day)
    buckets: list[list[EventRecord]] = [[] for _ in range(days)]
    for record in counted:
        buckets[record.event.start_slot // slots_per_day].append(record)

    reports = []
    for day in range(days):
        start = day * slots_per_day
        stop = min(start + slots_per_day, result.horizon)
        report = _report(
            counts[start:stop],
            buckets[day],
            excluded=0,
            day=day + 1,
            partial=stop - start < slots_per_day,
        )
        if report.zeta is None:
            logger.debug(f"Day {day + 1}: no events, zeta undefined")
        reports.append(report)
    return reports


def summarize(result: SimResult, slots_per_day: int) -> MetricReport:
    """Итоговый отчёт с посуточной разбивкой."""
    _check_horizon(result.horizon)
    counted = _counted(result.events, result.horizon)
    excluded = len(result.events) - len(counted)
    if excluded:
        logger.info(
            f"{excluded} events end past the horizon and are excluded from zeta"
        )
    total = _report(result.active_counts, counted, excluded)
    return replace(total, per_day=tuple(aggregate_daily(result, slots_per_day)))


def write_metrics_csv(report: MetricReport, filepath: str | Path) -> int:
    """Записать metrics.csv: строка на сутки плюс строка total."""
    rows = [day.to_row() for day in report.per_day]
    rows.append(report.to_row())
    return write_csv_atomic(filepath, METRICS_COLUMNS, rows)
