from app.utils.kernel import EventLoop, Phase
from app.utils.trace import (
    TraceFormatError,
    TraceRecorder,
    parse_trace,
    read_trace,
    write_trace,
)

from .central_cloud import (
    AuditingCenter,
    CentralCloud,
    LinkModel,
    LinkReading,
    central_vaaa_oracle,
)
from .invariants import InvariantChecker
from .metrics import compute_metrics
from .orchestrator import SimulationRun, TrustZone, run, run_tenants
from .scenario import (
    ScenarioReferenceError,
    ScenarioSchemaError,
    load_scenario,
    load_scenario_file,
)

__all__ = [
    "AuditingCenter",
    "CentralCloud",
    "EventLoop",
    "InvariantChecker",
    "LinkModel",
    "LinkReading",
    "Phase",
    "ScenarioReferenceError",
    "ScenarioSchemaError",
    "SimulationRun",
    "TraceFormatError",
    "TraceRecorder",
    "TrustZone",
    "central_vaaa_oracle",
    "compute_metrics",
    "load_scenario",
    "load_scenario_file",
    "parse_trace",
    "read_trace",
    "run",
    "run_tenants",
    "write_trace",
]
