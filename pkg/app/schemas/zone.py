from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Trust(StrEnum):
    TRUSTED = "Trusted"
    UNTRUSTED = "Untrusted"


class AuthOrigin(StrEnum):
    CENTRAL = "Central"
    LOCAL = "Local"
    NONE = "None"


class DeviceRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    ue_id: str
    attached: bool = True
    trust: Trust = Trust.UNTRUSTED
    auth_origin: AuthOrigin = AuthOrigin.NONE
    granted: frozenset[str] = frozenset()
    last_auth_at: int | None = None
    credential: str = ""

    @model_validator(mode="after")
    def trusted_needs_origin(self):
        if self.trust is Trust.TRUSTED and self.auth_origin is AuthOrigin.NONE:
            raise ValueError(f"device {self.ue_id} is trusted without an auth origin")
        return self


class Verdict(StrEnum):
    GRANT_FULL = "GrantFull"
    GRANT_EMERGENCY_ONLY = "GrantEmergencyOnly"
    DENY = "Deny"


class Route(StrEnum):
    CENTRAL_VAAA = "CentralVaaa"
    LOCAL_LAA = "LocalLaa"
    NONE = "None"


class AccessDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    ue_id: str
    service: str
    verdict: Verdict
    route: Route
    reason: str
    served: bool
    granted: frozenset[str] = frozenset()

    @model_validator(mode="after")
    def full_grant_has_route(self):
        if self.verdict is Verdict.GRANT_FULL and self.route is Route.NONE:
            raise ValueError("a full grant must name its route")
        return self


class ReauthEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    ue_id: str
    disconnect_at: int = Field(..., ge=0)
    auth_origin: AuthOrigin


class ReauthSchedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    entries: tuple[ReauthEntry, ...] = ()

    @model_validator(mode="after")
    def sorted_by_time(self):
        times = [e.disconnect_at for e in self.entries]
        if times != sorted(times):
            raise ValueError("reauth entries must be ordered by disconnect_at")
        return self
