"""Тесты метрик ζ, Γ и посуточной агрегации."""

import csv

import numpy as np
import pytest

from swarm_scheduler.core.engine import EventOutcome, EventRecord, SimResult
from swarm_scheduler.core.exceptions import UndefinedMetricError
from swarm_scheduler.core.metrics import (
    METRICS_COLUMNS,
    aggregate_daily,
    capture_process_success_rate,
    idle_time,
    multi_active_time,
    redundant_active_time,
    summarize,
    unprocessed_capture_fraction,
    write_metrics_csv,
)
from swarm_scheduler.core.models import Event


def _record(
    index: int,
    outcome: EventOutcome,
    start: int | None = None,
    deadline: int | None = None,
) -> EventRecord:
    start = index * 5 if start is None else start
    deadline = start + 3 if deadline is None else deadline
    capturing = None if outcome is EventOutcome.MISSED else 0
    return EventRecord(Event(index, start, 1, deadline), outcome, capturing)


def _result(counts: list[int], records: list[EventRecord] | None = None) -> SimResult:
    """Результат с заданным числом активных узлов по слотам."""
    width = max(max(counts), 1)
    activity = np.zeros((len(counts), width), dtype=bool)
    for slot, count in enumerate(counts):
        activity[slot, :count] = True
    return SimResult(
        policy_label="GRDY",
        slot_duration=1.0,
        horizon=len(counts),
        node_ids=tuple(range(width)),
        activity=activity,
        events=records or [],
    )


def _ten_events() -> list[EventRecord]:
    outcomes = (
        [EventOutcome.CAPTURED_AND_PROCESSED] * 6
        + [EventOutcome.CAPTURED_ONLY] * 2
        + [EventOutcome.MISSED] * 2
    )
    return [_record(i, outcome) for i, outcome in enumerate(outcomes)]


class TestZeta:
    def test_processed_share(self):
        result = _result([1] * 60, _ten_events())
        assert capture_process_success_rate(result) == pytest.approx(0.6)

    def test_no_events(self):
        with pytest.raises(UndefinedMetricError):
            capture_process_success_rate(_result([1] * 10))

    def test_deadline_past_horizon_is_excluded(self):
        records = [
            _record(0, EventOutcome.CAPTURED_AND_PROCESSED, start=1, deadline=5),
            _record(1, EventOutcome.MISSED, start=7, deadline=12),
        ]
        assert capture_process_success_rate(_result([1] * 10, records)) == 1.0

    def test_unprocessed_capture_fraction(self):
        result = _result([1] * 60, _ten_events())
        assert unprocessed_capture_fraction(result) == pytest.approx(0.25)
        assert unprocessed_capture_fraction(_result([1] * 10)) == 0.0


class TestActiveTime:
    def test_gamma(self):
        result = _result([1, 1, 1, 0, 0, 2, 2, 3, 0, 0])
        assert redundant_active_time(result) == pytest.approx(70.0)

    def test_gamma_zero_for_perfect_cover(self):
        assert redundant_active_time(_result([1] * 20)) == 0.0

    @pytest.mark.parametrize("seed", range(10))
    def test_gamma_ignores_node_labels(self, seed):
        rng = np.random.default_rng(seed)
        activity = rng.random((50, 5)) < 0.3
        order = rng.permutation(5)
        result = SimResult("GRDY", 1.0, 50, tuple(range(5)), activity, [])
        relabeled = SimResult(
            "GRDY", 1.0, 50, tuple(int(node) for node in order), activity[:, order], []
        )
        for metric in (redundant_active_time, idle_time, multi_active_time):
            assert metric(relabeled) == metric(result)

    def test_idle_share(self):
        counts = [0] * 22 + [1] * 78
        assert idle_time(_result(counts)) == pytest.approx(22.0)

    def test_multi_active_share(self):
        assert multi_active_time(_result([2, 1, 3, 0])) == pytest.approx(50.0)


class TestDaily:
    def test_buckets_by_start_slot(self):
        records = [
            _record(0, EventOutcome.CAPTURED_AND_PROCESSED, start=2),
            _record(1, EventOutcome.MISSED, start=11),
            _record(2, EventOutcome.CAPTURED_AND_PROCESSED, start=14),
        ]
        days = aggregate_daily(_result([1] * 25, records), slots_per_day=10)
        assert [day.day for day in days] == [1, 2, 3]
        assert [day.zeta for day in days] == [1.0, 0.5, None]
        assert [day.partial for day in days] == [False, False, True]

    def test_day_without_events(self, caplog):
        with caplog.at_level("DEBUG", logger="swarm_scheduler.core.metrics"):
            days = aggregate_daily(_result([0] * 10), slots_per_day=5)
        assert all(day.zeta is None for day in days)
        assert "zeta undefined" in caplog.text

    def test_slots_per_day_must_be_positive(self):
        with pytest.raises(ValueError):
            aggregate_daily(_result([1]), slots_per_day=0)


class TestSummary:
    def test_total_and_days(self):
        report = summarize(_result([1] * 60, _ten_events()), slots_per_day=30)
        assert report.zeta == pytest.approx(0.6)
        assert (report.events, report.captured, report.processed) == (10, 8, 6)
        assert report.unprocessed_capture_pct == pytest.approx(25.0)
        assert len(report.per_day) == 2

    def test_excluded_events_are_logged(self, caplog):
        records = [_record(0, EventOutcome.MISSED, start=8, deadline=15)]
        with caplog.at_level("INFO", logger="swarm_scheduler.core.metrics"):
            report = summarize(_result([1] * 10, records), slots_per_day=10)
        assert report.excluded == 1
        assert report.zeta is None
        assert "excluded" in caplog.text

    def test_metrics_csv(self, tmp_path):
        report = summarize(_result([1] * 60, _ten_events()), slots_per_day=30)
        path = tmp_path / "metrics.csv"
        write_metrics_csv(report, path)
        with open(path, encoding="utf-8", newline="") as handle:
            rows = list(csv.reader(handle))
        assert tuple(rows[0]) == METRICS_COLUMNS
        assert [row[0] for row in rows[1:]] == ["1", "2", "total"]
