import logging
from dataclasses import dataclass

from app.schemas.emergency import (
    DisasterEvent,
    EmergencyService,
    PolicyDecision,
    PolicyVerdict,
)
from app.schemas.messages import DisasterAlarm, Entity, Envelope, InterfaceName
from app.schemas.scenario import SimulationConfig
from app.schemas.state import TzState
from app.schemas.trace import TraceCategory
from app.schemas.zone import Trust
from app.services.emergency.catalog import DEFAULT_CATALOG, get_service
from app.services.emergency.policy import available_services, decide_policy
from app.services.interconnect.bus import Interconnect
from app.utils.kernel import EventLoop, Phase
from app.utils.trace import TraceRecorder


@dataclass
class _TokenBucket:
    capacity: int
    refill_per_ms: float
    tokens: float
    last: int

    def take(self, now: int) -> bool:
        self.tokens = min(
            self.capacity, self.tokens + (now - self.last) * self.refill_per_ms
        )
        self.last = now
        if self.tokens >= 1.0:
            self.tokens -= 1.0
            return True
        return False


class EmergencyServices:
    """
    ES actor: holds the catalog and the active disaster set, decides
    per-service policy and meters restricted services per UE.
    """

    def __init__(
        self,
        loop: EventLoop,
        bus: Interconnect,
        trace: TraceRecorder,
        config: SimulationConfig,
        catalog: tuple[EmergencyService, ...] = DEFAULT_CATALOG,
    ):
        self._loop = loop
        self._bus = bus
        self._trace = trace
        self._config = config
        self.catalog = catalog
        self.state = TzState.C
        self._events: dict[str, DisasterEvent] = {}
        self._active: dict[str, DisasterEvent] = {}
        self._buckets: dict[tuple[str, str], _TokenBucket] = {}

    def handle(self, envelope: Envelope) -> None:
        payload = envelope.payload
        if payload.kind == "StateChange":
            self.state = payload.state
        elif payload.kind == "DisasterAlarm":
            self.on_disaster(payload.event)

    def on_disaster(self, event: DisasterEvent) -> bool:
        """Stores a new disaster and forwards it to CCCM exactly once."""
        if event.event_id in self._events:
            logging.debug(f"Duplicate disaster {event.event_id} ignored")
            return False

        now = self._loop.now
        self._events[event.event_id] = event
        if not event.is_active(now):
            return False

        self._active[event.event_id] = event
        self._loop.schedule(event.at + event.ttl, Phase.TIMER, self._expire, event.event_id)
        self._bus.send(
            Envelope(
                interface=InterfaceName.ES_CM,
                sender=Entity.ES,
                payload=DisasterAlarm(event=event),
                sent_at=now,
            )
        )
        logging.info(f"Disaster {event.event_id} ({event.kind}) active until {event.at + event.ttl} ms")
        return True

    def active_disasters(self) -> list[DisasterEvent]:
        return sorted(self._active.values(), key=lambda d: d.event_id)

    def decide(
        self, service_name: str, trust: Trust, tz_state: TzState | None = None
    ) -> PolicyDecision | None:
        service = get_service(service_name)
        if service is None:
            return None
        return decide_policy(
            service, tz_state or self.state, trust, self.active_disasters()
        )

    def decisions(
        self, trust: Trust, tz_state: TzState | None = None
    ) -> dict[str, PolicyDecision]:
        return available_services(
            self.catalog, tz_state or self.state, trust, self.active_disasters()
        )

    def granted_without_auth(
        self, trust: Trust, tz_state: TzState | None = None
    ) -> frozenset[str]:
        """Emergency services a device may use without a successful authentication."""
        return frozenset(
            name
            for name, decision in self.decisions(trust, tz_state).items()
            if decision.verdict is PolicyVerdict.ALLOW_RESTRICTED
            or (decision.verdict is PolicyVerdict.ALLOW and not decision.requires_auth)
        )

    def consume_restricted(self, ue_id: str, service_name: str) -> bool:
        """Charges one use of a restricted service; False once the quota is spent."""
        now = self._loop.now
        key = (ue_id, service_name)
        bucket = self._buckets.get(key)
        if bucket is None:
            bucket = _TokenBucket(
                capacity=self._config.restricted_quota,
                refill_per_ms=self._config.restricted_quota
                / self._config.restricted_window_ms,
                tokens=float(self._config.restricted_quota),
                last=now,
            )
            self._buckets[key] = bucket
        return bucket.take(now)

    def _expire(self, event_id: str) -> None:
        event = self._active.pop(event_id, None)
        if event is None:
            return
        self._trace.emit(
            self._loop.now,
            TraceCategory.METRIC,
            {"type": "disaster_expired", "event_id": event_id},
        )
