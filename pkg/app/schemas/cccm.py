from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Ec4Sample(BaseModel):
    """One merged measurement of the edge-to-central connection."""

    model_config = ConfigDict(frozen=True)

    at: int = Field(..., ge=0)
    reachable: bool
    latency: float | None = Field(default=None, ge=0)
    loss_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    throughput: float = Field(default=1.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def latency_iff_reachable(self):
        if self.reachable and self.latency is None:
            raise ValueError("reachable sample needs a latency")
        if not self.reachable and self.latency is not None:
            raise ValueError("unreachable sample cannot carry a latency")
        return self

    @classmethod
    def unreachable(cls, at: int) -> "Ec4Sample":
        return cls(at=at, reachable=False, latency=None, loss_rate=0.0, throughput=0.0)


class Hypothesis(StrEnum):
    CONGESTION = "Congestion"
    DISASTER = "Disaster"
    ATTACK = "Attack"
    UNKNOWN = "Unknown"


class Diagnosis(BaseModel):
    model_config = ConfigDict(frozen=True)

    at: int
    hypothesis: Hypothesis
    evidence: list[str] = []


class FunctionClass(StrEnum):
    AUTHENTICATION = "Authentication"
    AUTHORIZATION = "Authorization"
    SUBSCRIBER_SYNC = "SubscriberSync"
    OTHER = "Other"


class Priority(StrEnum):
    HIGH = "High"
    NORMAL = "Normal"


class PriorityHint(BaseModel):
    model_config = ConfigDict(frozen=True)

    function_class: FunctionClass
    priority: Priority
