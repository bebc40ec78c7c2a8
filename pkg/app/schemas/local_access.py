from enum import StrEnum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class SubscriberProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    subscriber_id: str
    credential_digest: bytes
    security_log_version: int = 0
    sync_version: int = Field(default=0, ge=0)
    key_counter: int = Field(default=0, ge=0)


class AsKeyToken(BaseModel):
    """Simulated AS key material. NAS-scoped tokens cannot be constructed."""

    model_config = ConfigDict(frozen=True)

    ue_id: str
    scope: Literal["AS"] = "AS"
    counter: int = Field(..., ge=0)
    token: bytes


class LaaActivation(StrEnum):
    INACTIVE = "Inactive"
    ACTIVATED = "Activated"
    ACTIVE = "Active"
    DEACTIVATED = "Deactivated"


class SyncReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    applied: int = 0
    skipped: int = 0
