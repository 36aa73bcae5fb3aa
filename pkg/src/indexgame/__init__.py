"""Trader versus index-fund manager around an index reconstitution: closed forms, games and oracles."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, IndefiniteSystemError, SolverError
from .market import (
    Conventions,
    EvaluationReport,
    ImpactParams,
    InventoryPath,
    ScenarioParams,
    benchmark_cost,
    drag_bps,
    preset,
    tracking_error_bps,
)

__all__ = [
    "ConfigError", "Conventions", "DomainError", "EvaluationReport", "ImpactParams", "IndefiniteSystemError",
    "InventoryPath", "ScenarioParams", "SolverError", "benchmark_cost", "drag_bps", "preset", "tracking_error_bps",
]
