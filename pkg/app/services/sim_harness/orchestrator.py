import logging
import random
from dataclasses import dataclass, field
from typing import Mapping

from app.schemas.emergency import DisasterEvent
from app.schemas.messages import (
    AccessRequest,
    Attach,
    Detach,
    DisasterAlarm,
    Entity,
    Envelope,
    InterfaceName,
    ProfileSnapshot,
)
from app.schemas.scenario import Scenario, ScenarioEvent
from app.schemas.state import TzState
from app.schemas.trace import RunMetrics, TraceCategory, TraceEvent
from app.services.audit import SecurityAuditor
from app.services.cccm import CentralCloudMonitor
from app.services.emergency import EmergencyServices
from app.services.interconnect import Interconnect
from app.services.local_access import LocalAccessAssistant, LocalSubscriberServer
from app.services.sim_harness.central_cloud import AuditingCenter, CentralCloud, LinkModel
from app.services.sim_harness.invariants import InvariantChecker
from app.services.sim_harness.metrics import compute_metrics
from app.services.sim_harness.scenario import to_profile
from app.services.zone_manager import ZoneManager
from app.utils.kernel import EventLoop, Phase
from app.utils.trace import TraceRecorder


@dataclass
class _UeSession:
    credential: str
    last_service: str | None = None
    responses: list = field(default_factory=list)
    security_modes: list = field(default_factory=list)
    forced_disconnects: int = 0


class UePopulation:
    """Scripted UEs on the far side of Zm-Ue."""

    def __init__(self, loop: EventLoop, bus: Interconnect, auto_reattach: bool, delay_ms: int):
        self._loop = loop
        self._bus = bus
        self._auto_reattach = auto_reattach
        self._delay_ms = delay_ms
        self.sessions: dict[str, _UeSession] = {}

    def attach(self, ue_id: str, credential: str) -> None:
        session = self.sessions.setdefault(ue_id, _UeSession(credential=credential))
        session.credential = credential
        self._send(Attach(ue_id=ue_id, credential=credential))

    def detach(self, ue_id: str) -> None:
        self._send(Detach(ue_id=ue_id))

    def request(self, ue_id: str, service: str) -> None:
        session = self.sessions.get(ue_id)
        if session is not None:
            session.last_service = service
        self._send(AccessRequest(ue_id=ue_id, service=service))

    def handle(self, envelope: Envelope) -> None:
        payload = envelope.payload
        session = self.sessions.get(payload.ue_id)
        if session is None:
            return
        if payload.kind == "AccessResponse":
            session.responses.append(payload)
        elif payload.kind == "SecurityModeCommand":
            session.security_modes.append(payload)
        elif payload.kind == "ForcedDisconnect":
            session.forced_disconnects += 1
            if self._auto_reattach:
                self._loop.schedule(
                    self._loop.now + self._delay_ms, Phase.SCENARIO, self._reattach, payload.ue_id
                )

    def _reattach(self, ue_id: str) -> None:
        session = self.sessions[ue_id]
        self.attach(ue_id, session.credential)
        if session.last_service is not None:
            self.request(ue_id, session.last_service)

    def _send(self, payload) -> None:
        self._bus.send(
            Envelope(
                interface=InterfaceName.ZM_UE,
                sender=Entity.UE,
                payload=payload,
                sent_at=self._loop.now,
            )
        )


class TrustZone:
    """One edge cloud's Trust Zone wired to its simulated central cloud."""

    def __init__(self, scenario: Scenario, seed: int):
        config = scenario.config
        self.scenario = scenario
        self.config = config
        self.loop = EventLoop()
        self.trace = TraceRecorder()
        self.link = LinkModel(config)
        # named generator: drop sampling only
        self.rng = random.Random(f"{seed}:interconnect")
        self.bus = Interconnect(self.loop, self.trace, config, self.link, self.rng)

        self.central = CentralCloud(self.loop, self.bus, self.link, scenario.subscribers)
        self.center = AuditingCenter(
            self.trace, self.loop, on_stored=self.central.absorb_audit_record
        )
        self.es = EmergencyServices(self.loop, self.bus, self.trace, config)
        self.zm = ZoneManager(self.loop, self.bus, self.trace, config, self.es)
        self.cccm = CentralCloudMonitor(self.loop, self.bus, self.trace, config)
        self.lss = LocalSubscriberServer(scenario.lss)
        self.laa = LocalAccessAssistant(self.loop, self.bus, self.trace, self.lss)
        self.sa = SecurityAuditor(self.loop, self.bus, self.trace, config, self.center)
        self.ues = UePopulation(
            self.loop, self.bus, config.auto_reattach, config.reattach_delay_ms
        )

        self.bus.register(Entity.ZM, self.zm.handle)
        self.bus.register(Entity.CCCM, self.cccm.handle)
        self.bus.register(Entity.ES, self.es.handle)
        self.bus.register(Entity.LAA, self.laa.handle)
        self.bus.register(Entity.SA, self.sa.handle)
        self.bus.register(Entity.UE, self.ues.handle)
        self.bus.register(Entity.OSS, self.central.handle_oss)
        self.bus.register(Entity.MANO, self.central.handle_mano)
        self.bus.register(Entity.AMF, self.central.handle_amf)

    def start(self) -> None:
        for event in self.scenario.events:
            self.loop.schedule(event.at, Phase.SCENARIO, self.apply_event, event)
        self.cccm.start(0)
        self.loop.schedule(self.config.sync_period_ms, Phase.SYNC, self._sync_lss)

    def apply_event(self, event: ScenarioEvent) -> None:
        now = self.loop.now
        if event.kind == "LinkQuality":
            self.link.apply(event)
            self._observe_link(event.kind, now, source=event.source)
        elif event.kind == "BackupRoute":
            self.link.apply_backup_route(event)
            self._observe_link(event.kind, now)
        elif event.kind == "Disaster":
            disaster = DisasterEvent(
                event_id=event.event_id,
                kind=event.disaster,
                at=event.at,
                ttl=event.ttl or self.config.disaster_ttl_ms,
            )
            self.bus.send(
                Envelope(
                    interface=InterfaceName.IO_ES,
                    sender=Entity.IOT,
                    payload=DisasterAlarm(event=disaster),
                    sent_at=now,
                )
            )
        elif event.kind == "UeAttach":
            self.ues.attach(event.ue_id, event.credential)
        elif event.kind == "UeDetach":
            self.ues.detach(event.ue_id)
        elif event.kind == "UeAccessRequest":
            self.ues.request(event.ue_id, event.service)
        elif event.kind == "CentralProfileUpdate":
            self.central.update_profile(to_profile(event.subscriber))
            self.trace.emit(
                now,
                TraceCategory.METRIC,
                {"type": "central_profile_update", "subscriber_id": event.subscriber.subscriber_id},
            )
        elif event.kind == "AuditAckLoss":
            self.center.lose_acks(event.count)
            self.trace.emit(
                now, TraceCategory.METRIC, {"type": "audit_ack_loss", "count": event.count}
            )

    def _observe_link(self, kind: str, now: int, **extra) -> None:
        current = self.link.current(now)
        self.trace.emit(
            now,
            TraceCategory.METRIC,
            {
                "type": "link",
                "event": kind,
                "ec4": self.link.ec4_class(),
                "reachable": current.reachable,
                "latency": current.latency,
                "loss_rate": current.loss_rate,
                "throughput": current.throughput,
                **extra,
            },
        )

    def _sync_lss(self) -> None:
        now = self.loop.now
        if self.zm.state in (TzState.C, TzState.W):
            self.bus.send(
                Envelope(
                    interface=InterfaceName.LA_LS,
                    sender=Entity.LSS,
                    payload=ProfileSnapshot(profiles=self.central.snapshot()),
                    sent_at=now,
                )
            )
        self.loop.schedule(now + self.config.sync_period_ms, Phase.SYNC, self._sync_lss)


@dataclass
class SimulationRun:
    trace: list[TraceEvent]
    metrics: RunMetrics
    tz: TrustZone


def run(
    scenario: Scenario,
    seed: int | None = None,
    until: int = 600_000,
    check_invariants: bool = False,
) -> SimulationRun:
    """Runs one scenario to `until` ms; the same inputs always give the same trace."""
    seed = scenario.config.seed if seed is None else seed
    tz = TrustZone(scenario, seed)
    tz.trace.emit(0, TraceCategory.METRIC, {"type": "run_start", "seed": seed, "until": until})
    tz.start()

    checker = None
    if check_invariants:
        checker = InvariantChecker(
            tz.trace, tz.link.ec4_class, lambda: tz.zm.devices, scenario.config.transient_dwell_ms
        )
    steps = tz.loop.run(until, after_step=checker.check_step if checker else None)

    tz.trace.emit(
        until,
        TraceCategory.METRIC,
        {"type": "run_end", "state": tz.zm.state, "steps": steps},
    )
    metrics = compute_metrics(tz.trace.events)
    logging.info(
        f"Run finished at {until} ms in state {tz.zm.state}: {steps} steps, "
        f"{len(tz.trace.events)} trace events"
    )
    return SimulationRun(trace=list(tz.trace.events), metrics=metrics, tz=tz)


def run_tenants(
    scenarios: Mapping[str, Scenario],
    seed: int | None = None,
    until: int = 600_000,
    check_invariants: bool = False,
) -> dict[str, SimulationRun]:
    """Runs one isolated Trust Zone per tenant; no state is shared between them."""
    return {
        tenant: run(scenarios[tenant], seed, until, check_invariants)
        for tenant in sorted(scenarios)
    }
