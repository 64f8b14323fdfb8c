"""Deterministic simulator for synchronous Byzantine broadcast."""

from bcsim.bounds import BoundsReport, DomainError, compute_bounds, format_bounds
from bcsim.core import (
    SENDER,
    AdversaryViolation,
    BudgetExceeded,
    ConfigInvalid,
    Envelope,
    ExecutionConfig,
    ExecutionResult,
    PropertyVerdict,
    RoundCapExceeded,
    SimulationError,
    run_execution,
    verify_broadcast_properties,
)

__version__ = "0.1.0"

__all__ = [
    "SENDER",
    "AdversaryViolation",
    "BoundsReport",
    "BudgetExceeded",
    "ConfigInvalid",
    "DomainError",
    "Envelope",
    "ExecutionConfig",
    "ExecutionResult",
    "PropertyVerdict",
    "RoundCapExceeded",
    "SimulationError",
    "compute_bounds",
    "format_bounds",
    "run_execution",
    "verify_broadcast_properties",
]
