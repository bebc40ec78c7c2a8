from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field


class Actor(StrEnum):
    ZM = "ZM"
    LAA = "LAA"


class OperationKind(StrEnum):
    ACCESS_DECISION = "AccessDecision"
    LOCAL_AUTHENTICATE = "LocalAuthenticate"
    KEY_DERIVATION = "KeyDerivation"
    TRUST_CHANGE = "TrustChange"
    FORCED_DISCONNECT = "ForcedDisconnect"


class AuditRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    epoch: int = Field(..., ge=1)
    seq: int = Field(..., ge=1)
    at: int = Field(..., ge=0)
    actor: Actor
    kind: OperationKind
    ue_id: str
    outcome: str


class AuditBufferState(BaseModel):
    model_config = ConfigDict(frozen=True)

    active: bool
    epoch: int
    buffered: tuple[AuditRecord, ...] = ()
    delivered_up_to: int = 0
