from enum import StrEnum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field


class TraceCategory(StrEnum):
    TRANSITION = "Transition"
    ENVELOPE = "Envelope"
    DECISION = "Decision"
    AUDIT = "Audit"
    METRIC = "Metric"
    DROP = "Drop"


class TraceEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    at: int = Field(..., ge=0)
    seq: int = Field(..., ge=0)
    category: TraceCategory
    body: dict[str, Any]


class RunMetrics(BaseModel):
    emergency_call_availability: float = Field(..., ge=0.0, le=1.0)
    vacuous_availability: bool
    audit_completeness: float = Field(..., ge=0.0, le=1.0)
    unauthorized_grants: int = Field(..., ge=0)
    forced_reauths: int = Field(..., ge=0)
    local_auth_successes: int = Field(..., ge=0)
    mean_time_in_state: dict[str, float]
    dropped_envelopes: int = 0
    transitions: int = 0
