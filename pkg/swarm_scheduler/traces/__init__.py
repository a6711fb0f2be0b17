"""Энергетические трассы, генератор событий и каталог задач."""

from swarm_scheduler.traces.catalog import (
    TASK_NAMES,
    CatalogEntry,
    TaskCatalog,
    default_unit_energy,
    get_task,
    load_task_catalog,
)
from swarm_scheduler.traces.generators import (
    EnergyTrace,
    EventGenParams,
    PathLossModel,
    TraceRegime,
    gen_constant_traces,
    gen_events,
    gen_rf_trace,
    gen_solar_trace,
    random_trajectory,
    traces_to_matrix,
)
from swarm_scheduler.traces.ingest import load_trace_csv

__all__ = [
    "TASK_NAMES",
    "CatalogEntry",
    "EnergyTrace",
    "EventGenParams",
    "PathLossModel",
    "TaskCatalog",
    "TraceRegime",
    "default_unit_energy",
    "gen_constant_traces",
    "gen_events",
    "gen_rf_trace",
    "gen_solar_trace",
    "get_task",
    "load_task_catalog",
    "load_trace_csv",
    "random_trajectory",
    "traces_to_matrix",
]
