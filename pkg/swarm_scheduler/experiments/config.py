"""Конфигурация сценария (RunConfig).

Документ TOML (или JSON-снимок) с секциями [nodes], [energy], [events],
[task], [policy], [drift], [sim], [output]. Неизвестные секции и ключи -
ошибка конфигурации с указанием ключа.

Пример:
    [sim]
    seed = 7
    horizon = 86400

    [policy]
    kind = "PCP"
"""

import dataclasses
import json
import logging
import tomllib
import typing
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from swarm_scheduler.core.exceptions import ConfigurationError, PolicyNotFoundError
from swarm_scheduler.policies.base import PolicySpec

logger = logging.getLogger(__name__)

ENERGY_GENERATORS = ("constant", "solar", "rf", "trace")
LISTEN_MODES = ("listen", "full")
OVERLAP_MODES = ("owner", "shared")

SECONDS_PER_DAY = 86400


# =============================================================================
# Секции
# =============================================================================


@dataclass
class NodesConfig:
    """[nodes] - число узлов и накопитель.

    Attributes:
        count: Число узлов (None - минимум для покрытия PCP).
        capacitance_f: Ёмкость накопителя, Ф.
        v_max: Напряжение накопителя, В (None - из настроек).
        initial_stored_mj: Начальный запас, мДж.
        charge_efficiency: КПД заряда.
        leakage_rate: Доля саморазряда за слот.
    """

    count: int | None = None
    capacitance_f: float = 0.01
    v_max: float | None = None
    initial_stored_mj: float = 0.0
    charge_efficiency: float = 1.0
    leakage_rate: float = 0.0

    def validate(self) -> None:
        if self.count is not None and self.count < 1:
            raise ConfigurationError("nodes.count", "нужен хотя бы один узел")
        if self.capacitance_f <= 0:
            raise ConfigurationError("nodes.capacitance_f", "ёмкость должна быть > 0")
        if not 0 < self.charge_efficiency <= 1:
            raise ConfigurationError("nodes.charge_efficiency", "ожидается (0, 1]")
        if not 0 <= self.leakage_rate < 1:
            raise ConfigurationError("nodes.leakage_rate", "ожидается [0, 1)")


@dataclass
class EnergyConfig:
    """[energy] - генератор трасс или файл трассы.

    Attributes:
        generator: constant | solar | rf | trace.
        rate_range_mw: Диапазон мощности узлов (constant) или средней
            мощности (solar), мВт.
        variability: Относительная амплитуда шума солнечной трассы.
        smoothing_slots: Окно сглаживания шума.
        occlusion_rate: Вероятность начала затенения в слоте.
        occlusion_mean_slots: Средняя длительность затенения.
        tx_power_mw: Мощность RF-передатчика, мВт.
        path_loss_exponent: Показатель затухания.
        reference_distance: Опорное расстояние, м.
        loss_at_d0_db: Потери на опорном расстоянии, дБ.
        obstruction_db: Потери без прямой видимости, дБ.
        fading_sigma_db: СКО замираний, дБ.
        waypoints: Точек траектории передатчика.
        distance_range: Диапазон расстояний траектории, м.
        los_probability: Вероятность прямой видимости в точке траектории.
        trace_file: CSV-трасса (generator = "trace").
    """

    generator: str = "constant"
    rate_range_mw: tuple[float, float] = (5.0, 20.0)
    variability: float = 0.3
    smoothing_slots: int = 60
    occlusion_rate: float = 0.0
    occlusion_mean_slots: float = 30.0
    tx_power_mw: float = 3000.0
    path_loss_exponent: float = 2.0
    reference_distance: float = 1.0
    loss_at_d0_db: float = 16.44
    obstruction_db: float = 10.0
    fading_sigma_db: float = 1.0
    waypoints: int = 10
    distance_range: tuple[float, float] = (1.0, 3.0)
    los_probability: float = 0.8
    trace_file: str | None = None

    def validate(self) -> None:
        if self.generator not in ENERGY_GENERATORS:
            raise ConfigurationError(
                "energy.generator", f"ожидается одно из {', '.join(ENERGY_GENERATORS)}"
            )
        if self.generator == "trace" and not self.trace_file:
            raise ConfigurationError("energy.trace_file", "не задан файл трассы")
        if self.rate_range_mw[0] > self.rate_range_mw[1]:
            raise ConfigurationError(
                "energy.rate_range_mw", "диапазон перевёрнут (min > max)"
            )
        if self.distance_range[0] > self.distance_range[1]:
            raise ConfigurationError(
                "energy.distance_range", "диапазон перевёрнут (min > max)"
            )


@dataclass
class EventsConfig:
    """[events] - генератор спорадических событий."""

    count: int = 1000
    period_range: tuple[int, int] = (10, 15)
    duration_range: tuple[int, int] = (1, 5)
    deadline_slots: int | None = None

    def validate(self) -> None:
        for key in ("period_range", "duration_range"):
            low, high = getattr(self, key)
            if low < 1:
                raise ConfigurationError(f"events.{key}", "минимум должен быть >= 1")
            if low > high:
                raise ConfigurationError(
                    f"events.{key}", "диапазон перевёрнут (min > max)"
                )


@dataclass
class TaskConfig:
    """[task] - задача из каталога и необязательные переопределения."""

    name: str = "dnn_audio_classification"
    catalog_file: str | None = None
    runtime_s: float | None = None
    energy_mj: float | None = None
    sensing_energy_mj: float | None = None

    def validate(self) -> None:
        if not self.name.strip():
            raise ConfigurationError("task.name", "имя задачи пустое")


@dataclass
class PolicyConfig:
    """[policy] - политика и её параметры.

    Attributes:
        kind: Вид политики ("PCP", "GRDY:1", ...).
        params: Параметры политики ([policy.params]).
        listen_mode: listen (один слот) | full (всё окно задачи).
        wrap_hyperperiod: Расписание PCP по модулю гиперпериода.
        pcp_overlap: owner (слот будит один наименьший цикл) | shared (все кратные).
        min_cycle: Явное Q (None - по энергии лучшего узла).
        hyperperiod: Явный T (None - по диапазону периодов событий).
    """

    kind: str = "PCP"
    params: dict[str, Any] = field(default_factory=dict)
    listen_mode: str = "listen"
    wrap_hyperperiod: bool = True
    pcp_overlap: str = "owner"
    min_cycle: int | None = None
    hyperperiod: int | None = None

    def validate(self) -> None:
        try:
            PolicySpec.parse(self.kind)
        except PolicyNotFoundError as e:
            raise ConfigurationError("policy.kind", str(e)) from e
        if self.listen_mode not in LISTEN_MODES:
            raise ConfigurationError(
                "policy.listen_mode", f"ожидается одно из {LISTEN_MODES}"
            )
        if self.pcp_overlap not in OVERLAP_MODES:
            raise ConfigurationError(
                "policy.pcp_overlap", f"ожидается одно из {OVERLAP_MODES}"
            )
        if self.min_cycle is not None and self.min_cycle < 2:
            raise ConfigurationError("policy.min_cycle", "Q должно быть >= 2")
        if self.hyperperiod is not None and self.hyperperiod < 2:
            raise ConfigurationError("policy.hyperperiod", "T должен быть >= 2")

    def spec(self) -> PolicySpec:
        """PolicySpec для движка."""
        return PolicySpec.parse(self.kind, self.params)


@dataclass
class DriftConfig:
    """[drift] - дрейф часов."""

    enabled: bool = True
    counter_drift: bool = True
    counter_drift_mean_slots: float = 3600.0
    reference_s: float = 3600.0

    def validate(self) -> None:
        if self.counter_drift_mean_slots <= 0:
            raise ConfigurationError(
                "drift.counter_drift_mean_slots", "значение должно быть > 0"
            )
        if self.reference_s <= 0:
            raise ConfigurationError("drift.reference_s", "значение должно быть > 0")


@dataclass
class SimConfig:
    """[sim] - время и зерно.

    Attributes:
        seed: Главное зерно.
        horizon: Горизонт, слоты.
        slot_duration: Длительность слота, с.
        slots_per_day: Слотов в сутках (None - 86400 / slot_duration).
        unit_energy: Единичная энергия, мДж (None - по каталогу задач).
        record_energy: Писать energy.csv с рядами запаса.
    """

    seed: int = 0
    horizon: int = SECONDS_PER_DAY
    slot_duration: float = 1.0
    slots_per_day: int | None = None
    unit_energy: float | None = None
    record_energy: bool = True

    def validate(self) -> None:
        if self.seed < 0:
            raise ConfigurationError("sim.seed", "зерно должно быть >= 0")
        if self.horizon < 1:
            raise ConfigurationError("sim.horizon", "горизонт < 1")
        if self.slot_duration <= 0:
            raise ConfigurationError("sim.slot_duration", "значение должно быть > 0")
        if self.slots_per_day is not None and self.slots_per_day < 1:
            raise ConfigurationError("sim.slots_per_day", "значение < 1")
        if self.unit_energy is not None and self.unit_energy <= 0:
            raise ConfigurationError("sim.unit_energy", "значение должно быть > 0")

    @property
    def day_slots(self) -> int:
        """Слотов в сутках."""
        return self.slots_per_day or max(1, round(SECONDS_PER_DAY / self.slot_duration))


@dataclass
class OutputConfig:
    """[output] - каталог результатов."""

    directory: str = "results"

    def validate(self) -> None:
        if not self.directory:
            raise ConfigurationError("output.directory", "каталог не задан")


_SECTIONS: dict[str, type] = {
    "nodes": NodesConfig,
    "energy": EnergyConfig,
    "events": EventsConfig,
    "task": TaskConfig,
    "policy": PolicyConfig,
    "drift": DriftConfig,
    "sim": SimConfig,
    "output": OutputConfig,
}


# =============================================================================
# RunConfig
# =============================================================================


@dataclass
class RunConfig:
    """Полная конфигурация одного прогона."""

    nodes: NodesConfig = field(default_factory=NodesConfig)
    energy: EnergyConfig = field(default_factory=EnergyConfig)
    events: EventsConfig = field(default_factory=EventsConfig)
    task: TaskConfig = field(default_factory=TaskConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    drift: DriftConfig = field(default_factory=DriftConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "RunConfig":
        """Построить конфигурацию из словаря секций.

        Raises:
            ConfigurationError: Неизвестная секция или ключ, неверный тип.
        """
        sections = {}
        for name, values in data.items():
            if name not in _SECTIONS:
                known = ", ".join(_SECTIONS)
                raise ConfigurationError(
                    name, f"неизвестная секция. Доступные: {known}"
                )
            if not isinstance(values, Mapping):
                raise ConfigurationError(name, "секция должна быть таблицей")
            sections[name] = _build_section(name, _SECTIONS[name], values)
        config = cls(**sections)
        config.validate()
        return config

    def validate(self) -> None:
        """Проверить все секции."""
        for name in _SECTIONS:
            getattr(self, name).validate()

    def to_dict(self) -> dict[str, Any]:
        """Снимок конфигурации (JSON-совместимый, без пустых значений)."""
        snapshot: dict[str, Any] = {}
        for name in _SECTIONS:
            values = dataclasses.asdict(getattr(self, name))
            snapshot[name] = {
                key: list(value) if isinstance(value, tuple) else value
                for key, value in values.items()
                if value is not None
            }
        return snapshot

    def with_overrides(self, overrides: Mapping[str, Any]) -> "RunConfig":
        """Копия с переопределениями вида {"sim.seed": 7}."""
        data = self.to_dict()
        for path, value in overrides.items():
            apply_override(data, path, value)
        return RunConfig.from_mapping(data)


def _build_section(name: str, section_type: type, values: Mapping[str, Any]) -> Any:
    known = {f.name: f for f in dataclasses.fields(section_type)}
    kwargs = {}
    for key, value in values.items():
        if key not in known:
            raise ConfigurationError(
                f"{name}.{key}", f"неизвестный ключ. Доступные: {', '.join(known)}"
            )
        default = _default_of(known[key])
        kwargs[key] = _coerce(f"{name}.{key}", value, default)
    return section_type(**kwargs)


_SAMPLES: dict[type, Any] = {int: 0, float: 0.0, str: ""}


def _default_of(spec: dataclasses.Field) -> Any:
    """Образец значения поля для приведения типа."""
    if spec.default is not dataclasses.MISSING and spec.default is not None:
        return spec.default
    if spec.default_factory is not dataclasses.MISSING:
        return spec.default_factory()
    # необязательное поле: образец по первому не-None типу аннотации
    for option in typing.get_args(spec.type):
        if option in _SAMPLES:
            return _SAMPLES[option]
    return None


def _coerce(key: str, value: Any, default: Any) -> Any:
    """Привести значение к типу значения по умолчанию."""
    if isinstance(default, tuple):
        is_list = isinstance(value, Sequence) and not isinstance(value, str)
        if not is_list or len(value) != len(default):
            raise ConfigurationError(
                key, f"ожидается список из {len(default)} элементов"
            )
        return tuple(_coerce(key, item, default[0]) for item in value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigurationError(key, "ожидается true/false")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(key, f"ожидается целое, получено {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(key, f"ожидается число, получено {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigurationError(key, f"ожидается строка, получено {value!r}")
        return value
    if isinstance(default, dict):
        if not isinstance(value, Mapping):
            raise ConfigurationError(key, "ожидается таблица")
        return dict(value)
    return value


# =============================================================================
# Загрузка и переопределения
# =============================================================================


def parse_override_value(raw: str) -> Any:
    """Разобрать значение --set как литерал TOML; иначе строка."""
    try:
        return tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        return raw


def parse_override(text: str) -> tuple[str, Any]:
    """Разобрать "section.key=value".

    Raises:
        ConfigurationError: Если нет '=' или путь короче section.key.
    """
    path, sep, raw = text.partition("=")
    path = path.strip()
    if not sep or "." not in path:
        raise ConfigurationError(text, "ожидается формат section.key=value")
    return path, parse_override_value(raw.strip())


def apply_override(data: dict[str, Any], path: str, value: Any) -> None:
    """Записать значение по пути "section.key" (или "policy.params.alpha")."""
    *parents, leaf = path.split(".")
    node = data
    for part in parents:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigurationError(path, f"'{part}' не является таблицей")
        node = child
    node[leaf] = value


def read_document(filepath: str | Path) -> dict[str, Any]:
    """Прочитать TOML- или JSON-документ.

    Raises:
        ConfigurationError: Файл недоступен или синтаксически неверен.
    """
    filepath = Path(filepath)
    try:
        text = filepath.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(str(filepath), f"файл недоступен: {e}") from e
    if filepath.suffix.lower() == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigurationError(str(filepath), e.msg, line=e.lineno) from e
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(
            str(filepath), str(e), line=getattr(e, "lineno", None)
        ) from e


def load_config(
    filepath: str | Path | None = None, overrides: Sequence[str] = ()
) -> RunConfig:
    """Загрузить RunConfig из файла с переопределениями --set.

    Args:
        filepath: TOML/JSON-файл (None - значения по умолчанию).
        overrides: Строки "section.key=value".

    Raises:
        ConfigurationError: Ошибки синтаксиса, неизвестные ключи, неверные значения.

    Example:
        >>> load_config("data/scenarios/minimal.toml", ["sim.seed=7"]).sim.seed
        7
    """
    data = read_document(filepath) if filepath is not None else {}
    for text in overrides:
        path, value = parse_override(text)
        apply_override(data, path, value)
    config = RunConfig.from_mapping(data)
    logger.debug(
        f"Loaded config from {filepath or '<defaults>'} "
        f"with {len(overrides)} overrides"
    )
    return config
