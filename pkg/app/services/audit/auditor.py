import logging
from typing import Protocol

from app.schemas.audit import Actor, AuditBufferState, AuditRecord, OperationKind
from app.schemas.messages import Envelope
from app.schemas.scenario import SimulationConfig
from app.schemas.state import TzState
from app.schemas.trace import TraceCategory
from app.services.interconnect.bus import Interconnect
from app.utils.errors import NoConnectivity, TrustZoneError, WrongState
from app.utils.kernel import EventLoop, Phase
from app.utils.trace import TraceRecorder


class InactiveAuditor(TrustZoneError):
    """Raised when a security operation is recorded while SA is not active."""

    pass


class AuditCenter(Protocol):
    def receive(self, epoch: int, records: list[AuditRecord]) -> int | None:
        """Stores a batch and returns the acknowledged seq, or None if the ack is lost."""
        ...


class SecurityAuditor:
    """
    SA actor. Buffers every security-critical operation ZM and LAA perform
    while it is active, and hands the buffer to the central auditing center.
    """

    def __init__(
        self,
        loop: EventLoop,
        bus: Interconnect,
        trace: TraceRecorder,
        config: SimulationConfig,
        center: AuditCenter,
    ):
        self._loop = loop
        self._bus = bus
        self._trace = trace
        self._config = config
        self._center = center
        self.active = False
        self.tz_state = TzState.C
        self.epoch = 0
        self._records: list[AuditRecord] = []
        self._delivered_up_to = 0
        self._attempts = 0
        self._push_scheduled = False

    @property
    def buffer_state(self) -> AuditBufferState:
        return AuditBufferState(
            active=self.active,
            epoch=self.epoch,
            buffered=tuple(self._records),
            delivered_up_to=self._delivered_up_to,
        )

    @property
    def max_seq(self) -> int:
        return self._records[-1].seq if self._records else 0

    @property
    def fully_delivered(self) -> bool:
        return self._delivered_up_to >= self.max_seq

    def handle(self, envelope: Envelope) -> None:
        payload = envelope.payload
        if payload.kind == "StateChange":
            self.set_active(payload.state)
        elif payload.kind == "OperationReport":
            if not self.active:
                # outside a disconnection episode operations are audited centrally
                logging.debug(
                    f"SA inactive, not recording {payload.operation} for {payload.ue_id}"
                )
                return
            self.record(
                payload.actor,
                payload.operation,
                payload.ue_id,
                payload.outcome,
                self._loop.now,
            )

    def set_active(self, tz_state: TzState) -> bool:
        previous = self.tz_state
        self.tz_state = tz_state

        if tz_state is TzState.D and not self.active:
            self.active = True
            self.epoch += 1
            self._records = []
            self._delivered_up_to = 0
            logging.info(f"SA activated, audit epoch {self.epoch}")
            self._trace.emit(
                self._loop.now,
                TraceCategory.AUDIT,
                {"type": "epoch_open", "epoch": self.epoch},
            )
        elif tz_state is TzState.R and self.active and previous is not TzState.R:
            self._attempts = 0
            self._try_push()
        elif tz_state is TzState.C and self.active:
            if previous is TzState.R and not self.fully_delivered:
                self._final_push()
            if self.fully_delivered:
                self.active = False
                logging.info(f"SA deactivated, epoch {self.epoch} delivered")
        return self.active

    def record(
        self,
        actor: Actor,
        kind: OperationKind,
        ue_id: str,
        outcome: str,
        now: int,
    ) -> AuditRecord:
        if not self.active:
            raise InactiveAuditor(f"{actor} {kind} for {ue_id} while SA is inactive")
        entry = AuditRecord(
            epoch=self.epoch,
            seq=self.max_seq + 1,
            at=now,
            actor=actor,
            kind=kind,
            ue_id=ue_id,
            outcome=outcome,
        )
        self._records.append(entry)
        self._trace.emit(now, TraceCategory.AUDIT, {"type": "record", **entry.model_dump()})
        # records made in R follow the initial push in their own step
        if self.tz_state is TzState.R and not self._push_scheduled:
            self._attempts = 0
            self._schedule_push(now)
        return entry

    def push_to_center(self, center: AuditCenter | None = None) -> int:
        """
        Sends every undelivered record in seq order. Returns the number of
        records newly acknowledged; 0 when the acknowledgment was lost.
        """
        center = center or self._center
        pending = [r for r in self._records if r.seq > self._delivered_up_to]
        if not pending:
            return 0

        now = self._loop.now
        if not self._bus.transfer_audit(now, pending[0].seq, pending[-1].seq, self.epoch):
            raise NoConnectivity("audit batch could not cross the EC4")

        acked = center.receive(self.epoch, pending)
        if acked is None:
            self._trace.emit(
                now,
                TraceCategory.AUDIT,
                {"type": "ack_lost", "epoch": self.epoch, "last_seq": pending[-1].seq},
            )
            return 0

        delivered = max(0, acked - self._delivered_up_to)
        self._delivered_up_to = max(self._delivered_up_to, acked)
        self._trace.emit(
            now,
            TraceCategory.AUDIT,
            {
                "type": "push_ack",
                "epoch": self.epoch,
                "delivered_up_to": self._delivered_up_to,
            },
        )
        return delivered

    def serve_pull(self, from_seq: int) -> list[AuditRecord]:
        """Read-only range query used by the center; never advances delivery."""
        if self.tz_state is not TzState.C:
            raise WrongState(f"audit pull is only served in state C, not {self.tz_state}")
        return [r for r in self._records if r.seq >= from_seq]

    def _schedule_push(self, at: int) -> None:
        self._push_scheduled = True
        self._loop.schedule(at, Phase.TIMER, self._try_push)

    def _final_push(self) -> None:
        """Last push of the episode, made as R resolves to C."""
        try:
            self.push_to_center()
        except NoConnectivity as e:
            logging.warning(f"Final audit push of epoch {self.epoch} failed: {e}")
        if not self.fully_delivered:
            logging.warning(
                f"Epoch {self.epoch} incomplete on reconnection; "
                f"{self.max_seq - self._delivered_up_to} records stay pullable"
            )

    def _try_push(self) -> None:
        self._push_scheduled = False
        if self.tz_state is not TzState.R or not self.active:
            return
        self._attempts += 1
        try:
            self.push_to_center()
        except NoConnectivity as e:
            logging.warning(f"Audit push attempt {self._attempts} failed: {e}")

        if self.fully_delivered:
            return
        if self._attempts >= self._config.push_max_attempts:
            logging.warning(
                f"Audit push gave up after {self._attempts} attempts; "
                f"{self.max_seq - self._delivered_up_to} records stay pullable"
            )
            return
        self._schedule_push(self._loop.now + self._config.push_retry_ms)
