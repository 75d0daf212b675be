"""Discrete-event simulator of the unreliable multi-source M/G/1 queue."""

from .runner import (
    ConfigError,
    Estimate,
    ReplicationStats,
    SimConfig,
    SimulationReport,
    SourceSimStats,
    TraceRecord,
    run_experiment,
    run_replication,
    write_trace_csv,
)
from .tracker import AoiTracker, area_piece

__all__ = [
    "AoiTracker",
    "ConfigError",
    "Estimate",
    "ReplicationStats",
    "SimConfig",
    "SimulationReport",
    "SourceSimStats",
    "TraceRecord",
    "area_piece",
    "run_experiment",
    "run_replication",
    "write_trace_csv",
]
