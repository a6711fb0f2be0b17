"""Перебор параметров: сетка × повторы × политики.

Документ перебора (TOML/JSON):

    [sweep]
    policies = ["PCP", "GRDY", "ORCL"]
    replicates = 100

    [sweep.grid]
    "nodes.capacitance_f" = { logspace = [2.2e-9, 1.0, 10] }
    "events.period_range" = [[10, 15], [20, 30]]

Номер сценария перечисляет сетку в порядке объявления, повторы - внутри
точки сетки. Зерно сценария выводится из (sim.seed, номер сценария),
поэтому sweep.csv не зависит от числа процессов.
"""

import itertools
import logging
import multiprocessing
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from swarm_scheduler.core.exceptions import ConfigurationError
from swarm_scheduler.core.metrics import MetricReport
from swarm_scheduler.core.utils import derive_seed
from swarm_scheduler.decorators import log_action
from swarm_scheduler.experiments.config import RunConfig, read_document
from swarm_scheduler.experiments.usecases import simulate
from swarm_scheduler.infra.storage import write_csv_atomic

logger = logging.getLogger(__name__)

SWEEP_KEYS = ("policies", "replicates", "grid")
METRIC_FIELDS = (
    "zeta",
    "gamma_pct",
    "idle_pct",
    "unprocessed_capture_pct",
    "multi_active_pct",
    "events",
    "captured",
    "processed",
)


# =============================================================================
# Спецификация перебора
# =============================================================================


def expand_values(key: str, values: Any) -> list[Any]:
    """Развернуть значения оси сетки.

    Поддерживаются список значений и таблицы {logspace = [a, b, n]},
    {linspace = [a, b, n]}, {range = [start, stop, step]}.

    Raises:
        ConfigurationError: Пустая ось или неизвестная форма.
    """
    if isinstance(values, Mapping):
        if len(values) != 1:
            raise ConfigurationError(f"sweep.grid.{key}", "ожидается одна форма оси")
        ((form, args),) = values.items()
        if form not in ("logspace", "linspace", "range"):
            raise ConfigurationError(f"sweep.grid.{key}", f"неизвестная форма '{form}'")
        try:
            start, stop, third = args
            if form == "logspace":
                expanded = [float(v) for v in np.geomspace(start, stop, int(third))]
            elif form == "linspace":
                expanded = [float(v) for v in np.linspace(start, stop, int(third))]
            else:
                expanded = list(range(int(start), int(stop), int(third)))
        except (TypeError, ValueError) as e:
            raise ConfigurationError(
                f"sweep.grid.{key}", f"неверные аргументы {form}: {e}"
            ) from e
    elif isinstance(values, list):
        expanded = list(values)
    else:
        expanded = [values]
    if not expanded:
        raise ConfigurationError(f"sweep.grid.{key}", "ось пуста")
    return expanded


@dataclass
class SweepSpec:
    """Спецификация перебора.

    Attributes:
        policies: Политики, прогоняемые в каждом сценарии.
        replicates: Повторов (разных зёрен) на точку сетки.
        grid: Оси сетки: путь "section.key" → значения.
    """

    policies: list[str] = field(default_factory=lambda: ["PCP"])
    replicates: int = 1
    grid: dict[str, list[Any]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.policies:
            raise ConfigurationError("sweep.policies", "список политик пуст")
        replicates = self.replicates
        valid = isinstance(replicates, int) and not isinstance(replicates, bool)
        if not valid or replicates < 1:
            raise ConfigurationError("sweep.replicates", "ожидается целое >= 1")
        for key in self.grid:
            if "." not in key:
                raise ConfigurationError(
                    f"sweep.grid.{key}", "ожидается путь section.key"
                )

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "SweepSpec":
        """Построить из документа с таблицей [sweep].

        Raises:
            ConfigurationError: Нет [sweep] или неизвестный ключ.
        """
        unknown = set(data) - {"sweep"}
        if unknown:
            raise ConfigurationError(
                sorted(unknown)[0], "неизвестная секция документа перебора"
            )
        body = data.get("sweep")
        if not isinstance(body, Mapping):
            raise ConfigurationError("sweep", "нет таблицы [sweep]")
        for key in body:
            if key not in SWEEP_KEYS:
                known = ", ".join(SWEEP_KEYS)
                raise ConfigurationError(
                    f"sweep.{key}", f"неизвестный ключ. Доступные: {known}"
                )
        policies = body.get("policies", ["PCP"])
        if isinstance(policies, str):
            policies = [policies]
        grid = {
            key: expand_values(key, values)
            for key, values in body.get("grid", {}).items()
        }
        return cls(
            policies=list(policies), replicates=body.get("replicates", 1), grid=grid
        )

    @property
    def size(self) -> int:
        """Число сценариев (без учёта политик)."""
        points = 1
        for values in self.grid.values():
            points *= len(values)
        return points * self.replicates

    def scenarios(self, master_seed: int) -> Iterator["SweepPoint"]:
        """Сценарии в детерминированном порядке номеров."""
        keys = list(self.grid)
        index = 0
        for combo in itertools.product(*(self.grid[key] for key in keys)):
            for replicate in range(self.replicates):
                yield SweepPoint(
                    index=index,
                    replicate=replicate,
                    seed=derive_seed(master_seed, index),
                    params=dict(zip(keys, combo, strict=True)),
                )
                index += 1


def load_sweep_spec(filepath: str | Path) -> SweepSpec:
    """Загрузить документ перебора."""
    return SweepSpec.from_mapping(read_document(filepath))


@dataclass(frozen=True)
class SweepPoint:
    """Один сценарий перебора."""

    index: int
    replicate: int
    seed: int
    params: dict[str, Any]


# =============================================================================
# Выполнение
# =============================================================================


def _metric_values(report: MetricReport) -> list[Any]:
    return [getattr(report, name) for name in METRIC_FIELDS]


def run_point(
    task: tuple[dict[str, Any], SweepPoint, tuple[str, ...]],
) -> list[list[Any]]:
    """Прогнать все политики одного сценария (выполняется в процессе пула).

    Ошибка сценария записывается в строку (error_type, error_message),
    а не прерывает перебор.
    """
    base, point, policies = task
    head = [point.index, point.replicate, point.seed, *point.params.values()]
    blank = [None] * len(METRIC_FIELDS)
    try:
        overrides = {**point.params, "sim.seed": point.seed, "sim.record_energy": False}
        config = RunConfig.from_mapping(base).with_overrides(overrides)
    except Exception as e:
        logger.warning(f"Sweep scenario {point.index} rejected: {e}")
        return [[*head, kind, *blank, type(e).__name__, str(e)] for kind in policies]

    rows = []
    for kind in policies:
        try:
            variant = config.with_overrides({"policy.kind": kind})
            result, report, _ = simulate(variant)
            rows.append(
                [*head, result.policy_label, *_metric_values(report), None, None]
            )
        except Exception as e:
            logger.warning(f"Sweep scenario {point.index} policy {kind} failed: {e}")
            rows.append([*head, kind, *blank, type(e).__name__, str(e)])
    return rows


def sweep_columns(spec: SweepSpec) -> list[str]:
    """Заголовок sweep.csv."""
    return [
        "scenario",
        "replicate",
        "seed",
        *spec.grid,
        "policy",
        *METRIC_FIELDS,
        "error_type",
        "error_message",
    ]


def execute_sweep(config: RunConfig, spec: SweepSpec, jobs: int = 1) -> list[list[Any]]:
    """Выполнить перебор и вернуть строки в порядке номеров сценариев.

    Args:
        config: Базовая конфигурация.
        spec: Спецификация перебора.
        jobs: Число процессов (1 - в текущем процессе).
    """
    base = config.to_dict()
    policies = tuple(spec.policies)
    tasks = [(base, point, policies) for point in spec.scenarios(config.sim.seed)]
    logger.info(
        f"Sweep: {len(tasks)} scenarios x {len(policies)} policies, jobs={jobs}"
    )

    if jobs <= 1:
        batches = [run_point(task) for task in tasks]
    else:
        with multiprocessing.Pool(processes=jobs) as pool:
            batches = list(pool.imap(run_point, tasks, chunksize=1))
    return [row for batch in batches for row in batch]


@log_action("SWEEP")
def run_sweep(
    config: RunConfig, *, spec: SweepSpec, out_dir: Path, jobs: int = 1
) -> dict[str, Any]:
    """Выполнить перебор и записать sweep.csv.

    Returns:
        Словарь: rows, failed (строк с ошибкой), files.
    """
    rows = execute_sweep(config, spec, jobs)
    path = Path(out_dir) / "sweep.csv"
    write_csv_atomic(path, sweep_columns(spec), rows)
    failed = sum(row[-2] is not None for row in rows)
    if failed:
        logger.warning(f"Sweep finished with {failed} failed rows")
    return {"rows": len(rows), "failed": failed, "files": [str(path)]}
