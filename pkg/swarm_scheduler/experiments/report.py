"""Отчёт по каталогу результатов: данные для графиков и сводная таблица.

Читает compare.csv и/или sweep.csv и пишет:
    zeta_vs_day.csv - ζ по суткам для каждой политики (длинный формат);
    gamma_bars.csv  - средние Γ, простой и ζ по политикам;
    report.txt      - текстовая сводка.
"""

import logging
from pathlib import Path
from typing import Any

import pandas as pd

from swarm_scheduler.core.exceptions import ConfigurationError
from swarm_scheduler.decorators import log_action
from swarm_scheduler.infra.storage import write_csv_atomic, write_text_atomic

logger = logging.getLogger(__name__)

ZETA_COLUMNS = ("policy", "day", "zeta")
GAMMA_COLUMNS = (
    "policy",
    "runs",
    "gamma_pct_mean",
    "gamma_pct_std",
    "idle_pct_mean",
    "zeta_mean",
)


def _read(path: Path) -> pd.DataFrame | None:
    if not path.exists():
        return None
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ConfigurationError(str(path), f"не удалось прочитать: {e}") from e
    if "day" in frame.columns:
        frame["day"] = frame["day"].astype(str)
    return frame


def zeta_by_day(compare: pd.DataFrame) -> pd.DataFrame:
    """ζ по суткам (без строк total), в порядке появления политик."""
    daily = compare[compare["day"] != "total"].copy()
    daily["day"] = daily["day"].astype(int)
    daily = daily.drop_duplicates(subset=["policy", "day"], keep="first")
    return daily[list(ZETA_COLUMNS)].reset_index(drop=True)


def gamma_bars(frame: pd.DataFrame) -> pd.DataFrame:
    """Средние по политикам; строки с ошибкой прогона не учитываются."""
    if "error_type" in frame.columns:
        frame = frame[frame["error_type"].isna()]
    grouped = frame.groupby("policy", sort=False)
    bars = pd.DataFrame(
        {
            "runs": grouped["gamma_pct"].count(),
            "gamma_pct_mean": grouped["gamma_pct"].mean(),
            "gamma_pct_std": grouped["gamma_pct"].std(ddof=0),
            "idle_pct_mean": grouped["idle_pct"].mean(),
            "zeta_mean": grouped["zeta"].mean(),
        }
    )
    return bars.reset_index()[list(GAMMA_COLUMNS)]


def format_report(bars: pd.DataFrame, source: str, days: int | None) -> str:
    """Текстовая сводка по политикам (по убыванию среднего ζ)."""
    ordered = bars.sort_values(
        "zeta_mean", ascending=False, kind="stable", na_position="last"
    )
    lines = [
        "=" * 72,
        f"Сводка ({source})" + (f", суток: {days}" if days else ""),
        "=" * 72,
        f"{'Политика':<14} {'Прогонов':>9} {'ζ ср.':>8} "
        f"{'Γ ср., %':>10} {'Γ СКО':>8} {'Простой, %':>11}",
        "-" * 72,
    ]
    for row in ordered.itertuples(index=False):
        zeta = "-" if pd.isna(row.zeta_mean) else f"{row.zeta_mean:.4f}"
        lines.append(
            f"{row.policy:<14} {row.runs:>9} {zeta:>8} {row.gamma_pct_mean:>10.2f} "
            f"{row.gamma_pct_std:>8.2f} {row.idle_pct_mean:>11.2f}"
        )
    lines.append("=" * 72)
    return "\n".join(lines) + "\n"


def _records(frame: pd.DataFrame) -> list[list[Any]]:
    return [
        [None if pd.isna(value) else value for value in row]
        for row in frame.itertuples(index=False)
    ]


@log_action("REPORT")
def build_report(*, results_dir: Path) -> dict[str, Any]:
    """Построить отчёт по каталогу результатов.

    Raises:
        ConfigurationError: В каталоге нет ни compare.csv, ни sweep.csv.
    """
    results_dir = Path(results_dir)
    compare = _read(results_dir / "compare.csv")
    sweep = _read(results_dir / "sweep.csv")
    if compare is None and sweep is None:
        raise ConfigurationError(str(results_dir), "нет compare.csv или sweep.csv")

    files = []
    days = None
    if compare is not None:
        daily = zeta_by_day(compare)
        days = int(daily["day"].max()) if len(daily) else None
        path = results_dir / "zeta_vs_day.csv"
        write_csv_atomic(path, ZETA_COLUMNS, _records(daily))
        files.append(path)

    if sweep is not None:
        bars, source = gamma_bars(sweep), "sweep.csv"
    else:
        totals = compare[compare["day"] == "total"].drop_duplicates(
            subset=["policy"], keep="first"
        )
        bars, source = gamma_bars(totals), "compare.csv"
    path = results_dir / "gamma_bars.csv"
    write_csv_atomic(path, GAMMA_COLUMNS, _records(bars))
    files.append(path)

    text = format_report(bars, source, days)
    write_text_atomic(results_dir / "report.txt", text)
    files.append(results_dir / "report.txt")
    logger.info(f"Report for {results_dir}: {len(bars)} policies from {source}")
    return {"rows": len(bars), "summary": text, "files": [str(path) for path in files]}
