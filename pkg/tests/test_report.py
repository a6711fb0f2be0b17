"""Тесты построения отчёта по каталогу результатов."""

import csv

import pandas as pd
import pytest

from swarm_scheduler.core.exceptions import ConfigurationError
from swarm_scheduler.experiments.report import build_report, gamma_bars, zeta_by_day
from swarm_scheduler.experiments.usecases import COMPARE_COLUMNS


def _compare_rows(policy: str, zetas: list[float], gamma: float) -> list[list[object]]:
    rows = [
        [policy, day, zeta, gamma, 10.0, 0.0, 10, 8, int(zeta * 10), 5.0, False]
        for day, zeta in enumerate(zetas, start=1)
    ]
    mean = sum(zetas) / len(zetas)
    rows.append([policy, "total", mean, gamma, 10.0, 0.0, 30, 24, 20, 5.0, False])
    return rows


@pytest.fixture
def compare_dir(tmp_path):
    rows = [
        *_compare_rows("ORCL", [0.9, 0.8, 0.7], 0.0),
        *_compare_rows("PCP_STATIC", [0.6, 0.7, 0.8], 40.0),
        *_compare_rows("GRDY", [0.2, 0.3, 0.1], 80.0),
    ]
    with open(tmp_path / "compare.csv", "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(COMPARE_COLUMNS)
        writer.writerows(rows)
    return tmp_path


def _read(path):
    with open(path, encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


class TestBuildReport:
    def test_zeta_per_policy_per_day(self, compare_dir):
        build_report(results_dir=compare_dir)
        rows = _read(compare_dir / "zeta_vs_day.csv")
        assert len(rows) == 9
        days = [row["day"] for row in rows if row["policy"] == "GRDY"]
        assert days == ["1", "2", "3"]

    def test_gamma_bars_from_totals(self, compare_dir):
        result = build_report(results_dir=compare_dir)
        rows = _read(compare_dir / "gamma_bars.csv")
        assert [row["policy"] for row in rows] == ["ORCL", "PCP_STATIC", "GRDY"]
        assert float(rows[2]["gamma_pct_mean"]) == pytest.approx(80.0)
        assert result["rows"] == 3

    def test_summary_is_ordered_by_zeta(self, compare_dir):
        text = build_report(results_dir=compare_dir)["summary"]
        assert "суток: 3" in text
        assert text.index("ORCL") < text.index("PCP_STATIC") < text.index("GRDY")
        assert (compare_dir / "report.txt").read_text(encoding="utf-8") == text

    def test_empty_directory(self, tmp_path):
        with pytest.raises(ConfigurationError):
            build_report(results_dir=tmp_path)


class TestFrames:
    def test_duplicate_policy_rows_collapse(self):
        compare = pd.DataFrame(
            {
                "policy": ["GRDY", "GRDY", "GRDY", "GRDY"],
                "day": ["1", "total", "1", "total"],
                "zeta": [0.5, 0.5, 0.5, 0.5],
            }
        )
        assert len(zeta_by_day(compare)) == 1

    def test_sweep_error_rows_are_skipped(self):
        sweep = pd.DataFrame(
            {
                "policy": ["A", "A", "B", "B"],
                "gamma_pct": [10.0, 20.0, 30.0, float("nan")],
                "idle_pct": [0.0, 0.0, 5.0, float("nan")],
                "zeta": [0.5, 0.7, 0.1, float("nan")],
                "error_type": [None, None, None, "SimulationError"],
            }
        )
        bars = gamma_bars(sweep).set_index("policy")
        assert bars.loc["A", "runs"] == 2
        assert bars.loc["A", "gamma_pct_mean"] == pytest.approx(15.0)
        assert bars.loc["A", "gamma_pct_std"] == pytest.approx(5.0)
        assert bars.loc["B", "runs"] == 1
