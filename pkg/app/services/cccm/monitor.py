import logging
from collections import deque

from app.schemas.cccm import Diagnosis, Ec4Sample, Hypothesis
from app.schemas.emergency import DisasterEvent
from app.schemas.messages import (
    DiagnosisReport,
    Ec4Report,
    Entity,
    Envelope,
    InterfaceName,
    PriorityHints,
    ProbeReading,
    ProbeRequest,
)
from app.schemas.scenario import SimulationConfig
from app.schemas.state import Ec4Class, TzState
from app.schemas.trace import TraceCategory
from app.services.cccm.classifier import Thresholds, classify_ec4, merge_samples
from app.services.cccm.diagnosis import diagnose, priority_hints
from app.services.interconnect.bus import Interconnect
from app.utils.errors import Unreachable
from app.utils.kernel import EventLoop, Phase
from app.utils.trace import TraceRecorder


class CentralCloudMonitor:
    """
    CCCM actor. Polls OSS and NFV-MANO every poll period, keeps the sample
    window, reports the EC4 class to the ZM and explains degraded links.
    """

    def __init__(
        self,
        loop: EventLoop,
        bus: Interconnect,
        trace: TraceRecorder,
        config: SimulationConfig,
    ):
        self._loop = loop
        self._bus = bus
        self._trace = trace
        self._config = config
        self._thresholds = Thresholds.from_config(config)
        self._window: deque[Ec4Sample] = deque(maxlen=config.window_size)
        self._state = TzState.C
        self._disasters: dict[str, DisasterEvent] = {}
        self._last_class: Ec4Class | None = None
        self._abrupt_cut = False
        self._last_hypothesis: Hypothesis | None = None
        self._hints_pending = False

    def start(self, at: int = 0) -> None:
        self._loop.schedule(at, Phase.POLL, self.on_poll)

    def handle(self, envelope: Envelope) -> None:
        payload = envelope.payload
        if payload.kind == "StateChange":
            self._on_state_change(payload.state)
        elif payload.kind == "DisasterAlarm":
            self._disasters[payload.event.event_id] = payload.event

    def active_disasters(self, now: int) -> list[DisasterEvent]:
        return [d for d in self._disasters.values() if d.is_active(now)]

    def poll_sources(self, now: int) -> Ec4Sample:
        """Visits OSS and NFV-MANO and merges their readings pessimistically."""
        oss = self._probe(Entity.OSS, InterfaceName.OS_CM, now)
        mano = self._probe(Entity.MANO, InterfaceName.CM_MA, now)
        return merge_samples(oss, mano)

    def on_poll(self) -> None:
        now = self._loop.now
        self._window.append(self.poll_sources(now))

        if len(self._window) == self._config.window_size:
            ec4 = classify_ec4(list(self._window), self._thresholds)
            self._track_edges(ec4)
            self._bus.send(
                Envelope(
                    interface=InterfaceName.CM_ZM,
                    sender=Entity.CCCM,
                    payload=Ec4Report(ec4=ec4),
                    sent_at=now,
                )
            )

        if self._state in (TzState.W, TzState.L):
            self._maybe_diagnose(now)
        if self._hints_pending and self._last_class is not Ec4Class.LOST:
            self._publish_hints(now)

        self._loop.schedule(now + self._config.poll_period_ms, Phase.POLL, self.on_poll)

    def _probe(self, target: Entity, interface: InterfaceName, now: int) -> Ec4Sample:
        try:
            reply = self._bus.exchange(
                Envelope(
                    interface=interface,
                    sender=Entity.CCCM,
                    payload=ProbeRequest(),
                    sent_at=now,
                )
            )
        except Unreachable:
            return Ec4Sample.unreachable(now)
        assert isinstance(reply, ProbeReading)
        return reply.sample

    def _track_edges(self, ec4: Ec4Class) -> None:
        if ec4 is Ec4Class.HEALTHY:
            self._abrupt_cut = False
        elif ec4 is Ec4Class.LOST and self._last_class is Ec4Class.HEALTHY:
            self._abrupt_cut = True
        self._last_class = ec4

    def _on_state_change(self, state: TzState) -> None:
        now = self._loop.now
        self._state = state
        if state is TzState.C:
            self._last_hypothesis = None
        self._publish_hints(now)
        if state in (TzState.W, TzState.L):
            self._maybe_diagnose(now)

    def _maybe_diagnose(self, now: int) -> None:
        if not self._window:
            return
        diagnosis = diagnose(
            list(self._window),
            self.active_disasters(now),
            self._state,
            self._abrupt_cut,
            now,
        )
        if diagnosis.hypothesis is self._last_hypothesis:
            return
        self._last_hypothesis = diagnosis.hypothesis
        self._emit_diagnosis(diagnosis)

    def _emit_diagnosis(self, diagnosis: Diagnosis) -> None:
        logging.info(
            f"EC4 diagnosis at {diagnosis.at} ms: {diagnosis.hypothesis} {diagnosis.evidence}"
        )
        self._trace.emit(
            diagnosis.at,
            TraceCategory.DECISION,
            {
                "type": "diagnosis",
                "hypothesis": diagnosis.hypothesis,
                "evidence": diagnosis.evidence,
                "state": self._state,
            },
        )
        # SDN management may use it to deploy backup resources; lost while L
        self._bus.send(
            Envelope(
                interface=InterfaceName.CM_MA,
                sender=Entity.CCCM,
                payload=DiagnosisReport(diagnosis=diagnosis),
                sent_at=diagnosis.at,
            )
        )

    def _publish_hints(self, now: int) -> None:
        delivered = self._bus.send(
            Envelope(
                interface=InterfaceName.CM_MA,
                sender=Entity.CCCM,
                payload=PriorityHints(hints=tuple(priority_hints(self._state))),
                sent_at=now,
            )
        )
        self._hints_pending = not delivered
