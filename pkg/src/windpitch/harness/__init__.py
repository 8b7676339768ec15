"""Simulation harness: scenarios, runner, monitors and metrics."""
from .faults import FaultSchedule, fault_factors
from .metrics import MetricsReport, dissipation_monitor, l2_ratio, rms
from .scenario import Scenario, from_dict, load
from .sim import SimTrace, run, run_batch

__all__ = [
    "FaultSchedule", "MetricsReport", "Scenario", "SimTrace", "dissipation_monitor",
    "fault_factors", "from_dict", "l2_ratio", "load", "rms", "run",
    "run_batch",
]
