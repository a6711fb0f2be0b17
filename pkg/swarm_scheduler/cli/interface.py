"""Интерфейс командной строки.

CLI является единственной точкой входа для пользовательских команд:
run, compare, sweep, report. Логика экспериментов вызывается из
experiments/.

Коды выхода: 0 - успех, 2 - ошибка использования или конфигурации,
3 - ошибка симуляции, 4 - часть сценариев перебора завершилась ошибкой.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from swarm_scheduler import __version__
from swarm_scheduler.core.exceptions import (
    ConfigurationError,
    EnergyUnderflowError,
    HyperperiodOverflowError,
    InsufficientNodesError,
    InvalidArgumentError,
    PolicyNotFoundError,
    SimulationError,
    StorageError,
    TraceParseError,
    UndefinedMetricError,
)
from swarm_scheduler.experiments.config import RunConfig, load_config
from swarm_scheduler.experiments.report import build_report
from swarm_scheduler.experiments.sweep import load_sweep_spec, run_sweep
from swarm_scheduler.experiments.usecases import compare_policies, run_experiment
from swarm_scheduler.infra.settings import get_settings
from swarm_scheduler.logging_config import configure_from_settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SIMULATION = 3
EXIT_PARTIAL = 4

# Ошибки ввода: конфигурация, трассы, имена политик
USAGE_ERRORS = (
    ConfigurationError,
    TraceParseError,
    PolicyNotFoundError,
    InvalidArgumentError,
)

# Ошибки прогона
SIMULATION_ERRORS = (
    SimulationError,
    InsufficientNodesError,
    EnergyUnderflowError,
    HyperperiodOverflowError,
    UndefinedMetricError,
    StorageError,
)


def _print_error(message: str) -> None:
    """Вывести сообщение об ошибке."""
    print(f"Ошибка: {message}", file=sys.stderr)


def _print_success(message: str) -> None:
    """Вывести сообщение об успехе."""
    print(f"Успех: {message}")


def _load(args: argparse.Namespace) -> RunConfig:
    """Конфигурация с --set и --seed (--seed применяется последним)."""
    overrides = list(args.overrides or [])
    if args.seed is not None:
        overrides.append(f"sim.seed={args.seed}")
    return load_config(args.config, overrides)


def _out_dir(args: argparse.Namespace, config: RunConfig) -> Path:
    return Path(args.out) if args.out else Path(config.output.directory)


def _format_zeta(value: float | None) -> str:
    return "-" if value is None else f"{value:.4f}"


# =============================================================================
# Commands
# =============================================================================


def cmd_run(args: argparse.Namespace) -> int:
    """Команда run - одиночный прогон сценария.

    Пишет activity.csv, events.csv, energy.csv, metrics.csv и
    resolved_config.json в каталог вывода.
    """
    config = _load(args)
    out_dir = _out_dir(args, config)
    result = run_experiment(config, out_dir=out_dir)

    print(f"\n{'=' * 50}")
    print(f"Прогон завершён: {result['policy']}")
    print(f"{'=' * 50}")
    print(f"Событий:        {result['events']}")
    print(f"ζ:              {_format_zeta(result['zeta'])}")
    print(f"Γ, %:           {result['gamma_pct']:.2f}")
    print(f"Простой, %:     {result['idle_pct']:.2f}")
    print(f"Провалов:       {result['brownouts']}")
    print(f"{'=' * 50}\n")
    _print_success(f"результаты записаны в {out_dir}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    """Команда compare - одинаковый сценарий для нескольких политик."""
    config = _load(args)
    out_dir = _out_dir(args, config)
    result = compare_policies(config, policies=args.policies, out_dir=out_dir)
    print(result["summary"])
    _print_success(f"compare.csv и summary.txt записаны в {out_dir}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    """Команда sweep - перебор параметров (сетка × повторы × политики)."""
    config = _load(args)
    spec = load_sweep_spec(args.sweep)
    out_dir = _out_dir(args, config)
    result = run_sweep(config, spec=spec, out_dir=out_dir, jobs=args.jobs)

    print(
        f"Сценариев: {spec.size}, политик: {len(spec.policies)}, "
        f"строк: {result['rows']}"
    )
    if result["failed"]:
        _print_error(
            f"{result['failed']} строк завершились ошибкой (см. столбец error_type)"
        )
        return EXIT_PARTIAL
    _print_success(f"sweep.csv записан в {out_dir}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    """Команда report - данные для графиков по compare.csv/sweep.csv."""
    results_dir = Path(
        args.results_dir or args.out or get_settings().get_results_path()
    )
    result = build_report(results_dir=results_dir)
    print(result["summary"])
    _print_success(f"отчёт записан в {results_dir}")
    return EXIT_OK


# =============================================================================
# Parser
# =============================================================================


def _add_common_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    """Общие флаги; в подкомандах значения по умолчанию не перекрывают глобальные."""

    def default(value: object) -> object:
        return argparse.SUPPRESS if suppress else value

    parser.add_argument(
        "--config",
        type=str,
        default=default(None),
        help="Файл сценария (TOML или JSON)",
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        metavar="KEY=VALUE",
        default=default([]),
        help="Переопределить ключ конфигурации, например sim.seed=7 (повторяемый)",
    )
    parser.add_argument(
        "--out", type=str, default=default(None), help="Каталог результатов"
    )
    parser.add_argument(
        "--jobs", type=int, default=default(1), help="Число процессов для sweep"
    )
    parser.add_argument(
        "--seed", type=int, default=default(None), help="Главное зерно (sim.seed)"
    )


def create_parser() -> argparse.ArgumentParser:
    """Создать парсер аргументов командной строки."""
    parser = argparse.ArgumentParser(
        prog="swarmsim",
        description=(
            "Симулятор роя узлов с прерывистым питанием "
            "и планированием рабочих циклов"
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    _add_common_options(parser, suppress=False)
    subparsers = parser.add_subparsers(dest="command", help="Доступные команды")

    # --- run ---
    run_parser = subparsers.add_parser("run", help="Одиночный прогон сценария")
    _add_common_options(run_parser, suppress=True)
    run_parser.set_defaults(func=cmd_run)

    # --- compare ---
    compare_parser = subparsers.add_parser(
        "compare", help="Сравнить политики на одном сценарии"
    )
    _add_common_options(compare_parser, suppress=True)
    compare_parser.add_argument(
        "--policies",
        nargs="+",
        required=True,
        help="Политики: ORCL GRDY GRDY:1 DC ACES PCP RBS SRL (не меньше двух)",
    )
    compare_parser.set_defaults(func=cmd_compare)

    # --- sweep ---
    sweep_parser = subparsers.add_parser("sweep", help="Перебор параметров и зёрен")
    _add_common_options(sweep_parser, suppress=True)
    sweep_parser.add_argument(
        "--sweep", type=str, required=True, help="Документ перебора (TOML или JSON)"
    )
    sweep_parser.set_defaults(func=cmd_sweep)

    # --- report ---
    report_parser = subparsers.add_parser("report", help="Данные для графиков и сводка")
    _add_common_options(report_parser, suppress=True)
    report_parser.add_argument(
        "results_dir", nargs="?", help="Каталог с compare.csv или sweep.csv"
    )
    report_parser.set_defaults(func=cmd_report)

    return parser


def execute(argv: Sequence[str] | None = None) -> int:
    """Разобрать аргументы и выполнить команду.

    Returns:
        Код выхода.
    """
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    if args.command is None:
        parser.print_help()
        return EXIT_OK
    if args.jobs < 1:
        _print_error("--jobs должно быть >= 1")
        return EXIT_USAGE

    try:
        return args.func(args)
    except USAGE_ERRORS as e:
        _print_error(str(e))
        return EXIT_USAGE
    except SIMULATION_ERRORS as e:
        _print_error(str(e))
        return EXIT_SIMULATION
    except ValueError as e:
        logger.exception(f"Unexpected domain error in {args.command}")
        _print_error(str(e))
        return EXIT_SIMULATION


def run_cli(argv: Sequence[str] | None = None) -> None:
    """Запуск CLI интерфейса."""
    configure_from_settings()
    sys.exit(execute(argv))
