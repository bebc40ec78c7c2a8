from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.emergency import DisasterKind
from app.schemas.local_access import SubscriberProfile
from app.utils.config import Settings


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SimulationConfig(_Strict):
    """Effective, immutable configuration of one run."""

    seed: int = 0
    poll_period_ms: int = Field(1000, gt=0)
    window_size: int = Field(3, gt=0)
    weak_loss_threshold: float = Field(0.10, ge=0.0, le=1.0)
    weak_latency_threshold_ms: float = Field(500.0, ge=0.0)
    weak_throughput_threshold: float = Field(0.25, ge=0.0, le=1.0)
    baseline_latency_ms: float = Field(20.0, ge=0.0)
    transient_dwell_ms: int = Field(100, gt=0)
    reauth_stagger_ms: int = Field(200, gt=0)
    central_auth_timeout_ms: int = Field(2000, gt=0)
    auto_reattach: bool = True
    reattach_delay_ms: int = Field(50, ge=0)
    full_services: tuple[str, ...] = ("Internet", "Voice", "Messaging")
    sync_period_ms: int = Field(5000, gt=0)
    push_retry_ms: int = Field(20, gt=0)
    push_max_attempts: int = Field(4, gt=0)
    disaster_ttl_ms: int = Field(3_600_000, gt=0)
    restricted_quota: int = Field(5, ge=0)
    restricted_window_ms: int = Field(60_000, gt=0)
    weak_latency_factor: int = Field(10, ge=1)
    weak_drop_probability: float = Field(0.2, ge=0.0, le=1.0)
    weak_high_priority_drop_probability: float = Field(0.05, ge=0.0, le=1.0)

    @classmethod
    def from_settings(
        cls, settings: Settings, overrides: dict | None = None
    ) -> "SimulationConfig":
        """Builds the run config from settings defaults plus scenario overrides."""
        base = {
            name: getattr(settings, name)
            for name in cls.model_fields
            if hasattr(settings, name)
        }
        base["seed"] = settings.default_seed
        base.update(overrides or {})
        return cls(**base)


class ScenarioConfig(_Strict):
    """The `config` block of a scenario document; every field optional."""

    seed: int | None = None
    poll_period_ms: int | None = None
    window_size: int | None = None
    weak_loss_threshold: float | None = None
    weak_latency_threshold_ms: float | None = None
    weak_throughput_threshold: float | None = None
    baseline_latency_ms: float | None = None
    transient_dwell_ms: int | None = None
    reauth_stagger_ms: int | None = None
    central_auth_timeout_ms: int | None = None
    auto_reattach: bool | None = None
    reattach_delay_ms: int | None = None
    full_services: tuple[str, ...] | None = None
    sync_period_ms: int | None = None
    push_retry_ms: int | None = None
    push_max_attempts: int | None = None
    disaster_ttl_ms: int | None = None
    restricted_quota: int | None = None
    restricted_window_ms: int | None = None
    weak_latency_factor: int | None = None
    weak_drop_probability: float | None = None
    weak_high_priority_drop_probability: float | None = None

    def overrides(self) -> dict:
        return self.model_dump(exclude_none=True)


class SubscriberEntry(_Strict):
    subscriber_id: str = Field(..., min_length=1)
    credential: str
    sync_version: int = Field(1, ge=0)
    security_log_version: int = Field(0, ge=0)
    key_counter: int = Field(0, ge=0)


# --- events ---


class _Event(_Strict):
    at: int = Field(..., ge=0)


class LinkQualityEvent(_Event):
    kind: Literal["LinkQuality"]
    reachable: bool = True
    loss_rate: float = Field(0.0, ge=0.0, le=1.0)
    latency: float = Field(20.0, ge=0.0)
    throughput: float = Field(1.0, ge=0.0, le=1.0)
    source: Literal["both", "oss", "mano"] = "both"


class BackupRouteEvent(_Event):
    """SDN management restores the EC4 over backup resources, e.g. a satellite link."""

    kind: Literal["BackupRoute"]
    loss_rate: float = Field(0.0, ge=0.0, le=1.0)
    latency: float = Field(600.0, ge=0.0)
    throughput: float = Field(0.3, ge=0.0, le=1.0)


class DisasterScenarioEvent(_Event):
    kind: Literal["Disaster"]
    event_id: str = Field(..., min_length=1)
    disaster: DisasterKind
    ttl: int | None = Field(None, gt=0)


class UeAttachEvent(_Event):
    kind: Literal["UeAttach"]
    ue_id: str = Field(..., min_length=1)
    credential: str


class UeDetachEvent(_Event):
    kind: Literal["UeDetach"]
    ue_id: str = Field(..., min_length=1)


class UeAccessRequestEvent(_Event):
    kind: Literal["UeAccessRequest"]
    ue_id: str = Field(..., min_length=1)
    service: str = "Internet"


class CentralProfileUpdateEvent(_Event):
    kind: Literal["CentralProfileUpdate"]
    subscriber: SubscriberEntry


class AuditAckLossEvent(_Event):
    kind: Literal["AuditAckLoss"]
    count: int = Field(1, gt=0)


ScenarioEvent = Annotated[
    Union[
        LinkQualityEvent,
        BackupRouteEvent,
        DisasterScenarioEvent,
        UeAttachEvent,
        UeDetachEvent,
        UeAccessRequestEvent,
        CentralProfileUpdateEvent,
        AuditAckLossEvent,
    ],
    Field(discriminator="kind"),
]


class ScenarioDocument(_Strict):
    """Raw scenario file as written by a user."""

    version: Literal[1]
    config: ScenarioConfig = ScenarioConfig()
    subscribers: list[SubscriberEntry] = []
    lss: list[SubscriberEntry] = []
    events: list[ScenarioEvent] = []

    @model_validator(mode="after")
    def unique_subscribers(self):
        for table in ("subscribers", "lss"):
            ids = [s.subscriber_id for s in getattr(self, table)]
            if len(ids) != len(set(ids)):
                raise ValueError(f"duplicate subscriber_id in {table}")
        return self


class Scenario(BaseModel):
    """Validated scenario with resolved config and time-sorted events."""

    model_config = ConfigDict(frozen=True)

    config: SimulationConfig
    subscribers: tuple[SubscriberProfile, ...] = ()
    lss: tuple[SubscriberProfile, ...] = ()
    events: tuple[ScenarioEvent, ...] = ()
