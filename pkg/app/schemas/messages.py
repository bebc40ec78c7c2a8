from enum import StrEnum
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.audit import Actor, OperationKind
from app.schemas.cccm import Diagnosis, Ec4Sample, PriorityHint
from app.schemas.emergency import DisasterEvent
from app.schemas.local_access import AsKeyToken, SubscriberProfile
from app.schemas.state import Ec4Class, TzState


class InterfaceName(StrEnum):
    CM_MA = "Cm-Ma"
    CM_ZM = "Cm-Zm"
    ES_CM = "Es-Cm"
    ES_ZM = "Es-Zm"
    IO_ES = "Io-Es"
    LA_LS = "La-Ls"
    LA_SA = "La-Sa"
    ME_ZM = "Me-Zm"
    OS_CM = "Os-Cm"
    ZM_LA = "Zm-La"
    ZM_SA = "Zm-Sa"
    ZM_UE = "Zm-Ue"


class Entity(StrEnum):
    CCCM = "CCCM"
    ZM = "ZM"
    ES = "ES"
    LAA = "LAA"
    LSS = "LSS"
    SA = "SA"
    AMF = "AMF"
    OSS = "OSS"
    MANO = "MANO"
    IOT = "IoT"
    UE = "UE"


class _Message(BaseModel):
    model_config = ConfigDict(frozen=True)


# --- CCCM ---


class ProbeRequest(_Message):
    kind: Literal["ProbeRequest"] = "ProbeRequest"


class ProbeReading(_Message):
    kind: Literal["ProbeReading"] = "ProbeReading"
    sample: Ec4Sample


class Ec4Report(_Message):
    kind: Literal["Ec4Report"] = "Ec4Report"
    ec4: Ec4Class


class DiagnosisReport(_Message):
    kind: Literal["DiagnosisReport"] = "DiagnosisReport"
    diagnosis: Diagnosis


class PriorityHints(_Message):
    kind: Literal["PriorityHints"] = "PriorityHints"
    hints: tuple[PriorityHint, ...]


# --- ZM broadcast ---


class StateChange(_Message):
    kind: Literal["StateChange"] = "StateChange"
    state: TzState


# --- ES ---


class DisasterAlarm(_Message):
    kind: Literal["DisasterAlarm"] = "DisasterAlarm"
    event: DisasterEvent


# --- LAA / LSS ---


class ProfileSnapshot(_Message):
    kind: Literal["ProfileSnapshot"] = "ProfileSnapshot"
    profiles: tuple[SubscriberProfile, ...]


class LocalAuthRequest(_Message):
    kind: Literal["LocalAuthRequest"] = "LocalAuthRequest"
    ue_id: str
    credential: str


class LocalAuthResult(_Message):
    kind: Literal["LocalAuthResult"] = "LocalAuthResult"
    ue_id: str
    trusted: bool


class KeyRequest(_Message):
    kind: Literal["KeyRequest"] = "KeyRequest"
    ue_id: str


class KeyToken(_Message):
    kind: Literal["KeyToken"] = "KeyToken"
    token: AsKeyToken


# --- SA ---


class OperationReport(_Message):
    kind: Literal["OperationReport"] = "OperationReport"
    actor: Actor
    operation: OperationKind
    ue_id: str
    outcome: str


# --- central V-AAA via Me-Zm ---


class CentralAuthRequest(_Message):
    kind: Literal["CentralAuthRequest"] = "CentralAuthRequest"
    ue_id: str
    credential: str
    request_id: int


class CentralAuthResponse(_Message):
    kind: Literal["CentralAuthResponse"] = "CentralAuthResponse"
    ue_id: str
    accepted: bool
    request_id: int


# --- UE C-plane on Zm-Ue ---


class Attach(_Message):
    kind: Literal["Attach"] = "Attach"
    ue_id: str
    credential: str


class Detach(_Message):
    kind: Literal["Detach"] = "Detach"
    ue_id: str


class AccessRequest(_Message):
    kind: Literal["AccessRequest"] = "AccessRequest"
    ue_id: str
    service: str


class AccessResponse(_Message):
    kind: Literal["AccessResponse"] = "AccessResponse"
    ue_id: str
    service: str
    verdict: str
    served: bool


class SecurityModeCommand(_Message):
    """Tells the UE which AS key generation to use; never carries key material."""

    kind: Literal["SecurityModeCommand"] = "SecurityModeCommand"
    ue_id: str
    counter: int
    key_fingerprint: str


class ForcedDisconnect(_Message):
    kind: Literal["ForcedDisconnect"] = "ForcedDisconnect"
    ue_id: str


Payload = Annotated[
    Union[
        ProbeRequest,
        ProbeReading,
        Ec4Report,
        DiagnosisReport,
        PriorityHints,
        StateChange,
        DisasterAlarm,
        ProfileSnapshot,
        LocalAuthRequest,
        LocalAuthResult,
        KeyRequest,
        KeyToken,
        OperationReport,
        CentralAuthRequest,
        CentralAuthResponse,
        Attach,
        Detach,
        AccessRequest,
        AccessResponse,
        SecurityModeCommand,
        ForcedDisconnect,
    ],
    Field(discriminator="kind"),
]


class Envelope(BaseModel):
    model_config = ConfigDict(frozen=True)

    interface: InterfaceName
    sender: Entity
    payload: Payload
    sent_at: int = Field(..., ge=0)
