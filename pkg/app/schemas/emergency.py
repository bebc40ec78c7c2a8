from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field


class ServiceClass(StrEnum):
    DISASTER_SPECIFIC = "DisasterSpecific"
    ALWAYS_WITH_POLICY = "AlwaysWithPolicy"
    ALWAYS_NO_AUTH = "AlwaysNoAuth"


class EmergencyService(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    service_class: ServiceClass


class DisasterKind(StrEnum):
    EARTHQUAKE = "Earthquake"
    FIRE = "Fire"
    EXPLOSION = "Explosion"
    OTHER = "Other"


class DisasterEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    event_id: str
    kind: DisasterKind
    at: int = Field(..., ge=0)
    ttl: int = Field(..., gt=0)

    def is_active(self, now: int) -> bool:
        return now < self.at + self.ttl


class PolicyVerdict(StrEnum):
    ALLOW = "Allow"
    ALLOW_RESTRICTED = "AllowRestricted"
    INACTIVE = "Inactive"


class PolicyDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    service: str
    verdict: PolicyVerdict
    requires_auth: bool
