"""Trace-driven simulator for CPU power policies over MPI communication slack.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from ._core import (
    ComparisonReport,
    ConfigError,
    HwConfig,
    Phase,
    PolicySpec,
    PowerModel,
    RegisterWrite,
    Segment,
    SimError,
    SimResult,
    Workload,
    compare,
    duration_split,
    energy,
    gen_balanced,
    gen_unbalanced,
    load_workload,
    quadrant_analysis,
    save_workload,
    simulate,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "ComparisonReport",
    "ConfigError",
    "HwConfig",
    "Phase",
    "PolicySpec",
    "PowerModel",
    "RegisterWrite",
    "Segment",
    "SimError",
    "SimResult",
    "Workload",
    "compare",
    "duration_split",
    "energy",
    "gen_balanced",
    "gen_unbalanced",
    "load_workload",
    "quadrant_analysis",
    "save_workload",
    "simulate",
    "validate",
    "__version__",
]
