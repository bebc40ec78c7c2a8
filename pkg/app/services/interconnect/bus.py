import logging
import random
from typing import Any, Callable, Protocol

from app.schemas.cccm import FunctionClass, Priority, PriorityHint
from app.schemas.messages import Entity, Envelope, InterfaceName
from app.schemas.scenario import SimulationConfig
from app.schemas.state import Ec4Class
from app.schemas.trace import TraceCategory
from app.services.interconnect.routes import (
    ALLOWED_PAYLOADS,
    AUDIT_TRANSPORT,
    CENTRAL_CROSSING,
    receiver_of,
)
from app.utils.errors import TrustZoneError, Unreachable
from app.utils.kernel import EventLoop, Phase
from app.utils.trace import TraceRecorder

Handler = Callable[[Envelope], Any]

_FUNCTION_CLASS_OF_PAYLOAD: dict[str, FunctionClass] = {
    "CentralAuthRequest": FunctionClass.AUTHENTICATION,
    "CentralAuthResponse": FunctionClass.AUTHENTICATION,
    "KeyRequest": FunctionClass.AUTHORIZATION,
    "KeyToken": FunctionClass.AUTHORIZATION,
    "ProfileSnapshot": FunctionClass.SUBSCRIBER_SYNC,
}


class IllegalRoute(TrustZoneError):
    """Raised for a payload, interface or direction the entity model does not allow."""

    pass


class LinkView(Protocol):
    def ec4_class(self) -> Ec4Class: ...

    def latency(self) -> float: ...


class Interconnect:
    """
    Typed message bus over the twelve Trust Zone interfaces.

    Intra-edge interfaces deliver with zero latency. Central-crossing
    interfaces follow the ground-truth EC4: dropped while Lost, slower and
    lossy while Weak.
    """

    def __init__(
        self,
        loop: EventLoop,
        trace: TraceRecorder,
        config: SimulationConfig,
        link: LinkView,
        rng: random.Random,
    ):
        self._loop = loop
        self._trace = trace
        self._config = config
        self._link = link
        self._rng = rng
        self._handlers: dict[Entity, Handler] = {}
        self._last_delivery: dict[tuple[InterfaceName, Entity], int] = {}
        self._priorities: dict[FunctionClass, Priority] = {
            fc: Priority.NORMAL for fc in FunctionClass
        }

    def register(self, entity: Entity, handler: Handler) -> None:
        self._handlers[entity] = handler

    def apply_priority_hints(self, hints: tuple[PriorityHint, ...]) -> None:
        for hint in hints:
            self._priorities[hint.function_class] = hint.priority

    def priority_of(self, payload_kind: str) -> Priority:
        fc = _FUNCTION_CLASS_OF_PAYLOAD.get(payload_kind, FunctionClass.OTHER)
        return self._priorities[fc]

    def check_route(self, envelope: Envelope) -> Entity:
        """Returns the receiver of a legal envelope, or raises IllegalRoute."""
        key = (envelope.sender, envelope.interface)
        receiver = receiver_of(*key)
        if receiver is None:
            raise IllegalRoute(
                f"{envelope.sender} cannot send on {envelope.interface}"
            )
        if envelope.payload.kind not in ALLOWED_PAYLOADS[key]:
            raise IllegalRoute(
                f"{envelope.payload.kind} is not allowed on {envelope.interface} "
                f"from {envelope.sender}"
            )
        if receiver not in self._handlers:
            raise IllegalRoute(f"no endpoint registered for {receiver}")
        return receiver

    def send(self, envelope: Envelope) -> bool:
        """
        Enqueues an envelope for FIFO delivery on its interface.
        Returns False when the message is dropped on the EC4.
        """
        receiver = self.check_route(envelope)
        drop_reason, latency = self._transit(envelope.interface, envelope.payload.kind)
        if drop_reason:
            self._trace_drop(envelope, receiver, drop_reason)
            return False

        deliver_at = envelope.sent_at + latency
        # FIFO per interface direction even when latency shrinks between sends
        lane = (envelope.interface, envelope.sender)
        deliver_at = max(deliver_at, self._last_delivery.get(lane, 0))
        self._last_delivery[lane] = deliver_at
        self._loop.schedule(deliver_at, Phase.DELIVERY, self._deliver, envelope, receiver)
        return True

    def exchange(self, envelope: Envelope) -> Any:
        """
        Synchronous request/reply used by probes. Either leg is lost while the
        EC4 is Lost; a weak link shows up in the reading itself, not as random
        drops. Returns the reply payload or raises Unreachable.
        """
        receiver = self.check_route(envelope)
        self._cross(envelope, receiver)
        reply_payload = self._handlers[receiver](envelope)
        reply = Envelope(
            interface=envelope.interface,
            sender=receiver,
            payload=reply_payload,
            sent_at=self._loop.now,
        )
        self._cross(reply, self.check_route(reply))
        return reply_payload

    def _cross(self, envelope: Envelope, receiver: Entity) -> None:
        drop_reason, _ = self._transit(
            envelope.interface, envelope.payload.kind, sample_drops=False
        )
        if drop_reason:
            self._trace_drop(envelope, receiver, drop_reason)
            raise Unreachable(f"{envelope.interface} dropped: {drop_reason}")
        self._trace_delivery(envelope, receiver, self._loop.now)

    def transfer_audit(self, now: int, first_seq: int, last_seq: int, epoch: int) -> bool:
        """Carries an audit batch across the EC4; the caller performs the hand-over."""
        drop_reason, _ = self._transit(None, "AuditBatch")
        body = {
            "interface": AUDIT_TRANSPORT,
            "sender": Entity.SA,
            "receiver": "AuditingCenter",
            "payload": "AuditBatch",
            "epoch": epoch,
            "first_seq": first_seq,
            "last_seq": last_seq,
            "central": True,
        }
        if drop_reason:
            self._trace.emit(now, TraceCategory.DROP, {**body, "reason": drop_reason})
            return False
        self._trace.emit(now, TraceCategory.ENVELOPE, {**body, "sent_at": now})
        return True

    def _transit(
        self,
        interface: InterfaceName | None,
        payload_kind: str,
        sample_drops: bool = True,
    ) -> tuple[str | None, int]:
        """Returns (drop reason, latency) for one crossing."""
        if interface is not None and interface not in CENTRAL_CROSSING:
            return None, 0

        ec4 = self._link.ec4_class()
        if ec4 is Ec4Class.LOST:
            return "ec4_lost", 0

        latency = self._link.latency()
        if ec4 is Ec4Class.WEAK:
            if sample_drops:
                if self.priority_of(payload_kind) is Priority.HIGH:
                    p = self._config.weak_high_priority_drop_probability
                else:
                    p = self._config.weak_drop_probability
                if self._rng.random() < p:
                    return "weak_link", 0
            latency *= self._config.weak_latency_factor
        return None, int(round(latency))

    def _deliver(self, envelope: Envelope, receiver: Entity) -> None:
        if (
            envelope.interface in CENTRAL_CROSSING
            and self._link.ec4_class() is Ec4Class.LOST
        ):
            self._trace_drop(envelope, receiver, "ec4_lost_in_flight")
            return
        self._trace_delivery(envelope, receiver, self._loop.now)
        self._handlers[receiver](envelope)

    def _trace_delivery(self, envelope: Envelope, receiver: Entity, at: int) -> None:
        self._trace.emit(
            at,
            TraceCategory.ENVELOPE,
            {
                "interface": envelope.interface,
                "sender": envelope.sender,
                "receiver": receiver,
                "payload": envelope.payload.kind,
                "sent_at": envelope.sent_at,
                "central": envelope.interface in CENTRAL_CROSSING,
                "detail": _summary(envelope),
            },
        )

    def _trace_drop(self, envelope: Envelope, receiver: Entity, reason: str) -> None:
        logging.debug(
            f"Dropped {envelope.payload.kind} on {envelope.interface}: {reason}"
        )
        self._trace.emit(
            self._loop.now,
            TraceCategory.DROP,
            {
                "interface": envelope.interface,
                "sender": envelope.sender,
                "receiver": receiver,
                "payload": envelope.payload.kind,
                "central": envelope.interface in CENTRAL_CROSSING,
                "reason": reason,
            },
        )


def _summary(envelope: Envelope) -> dict[str, Any]:
    """Small, key-free summary of a payload for the trace."""
    payload = envelope.payload.model_dump(mode="python", exclude={"kind"})
    summary: dict[str, Any] = {}
    for key in ("ue_id", "state", "ec4", "service", "verdict", "served", "accepted"):
        if key in payload:
            summary[key] = payload[key]
    if envelope.payload.kind == "DisasterAlarm":
        summary["event_id"] = envelope.payload.event.event_id
    elif envelope.payload.kind == "DiagnosisReport":
        summary["hypothesis"] = envelope.payload.diagnosis.hypothesis
    elif envelope.payload.kind == "OperationReport":
        summary["operation"] = envelope.payload.operation
        summary["outcome"] = envelope.payload.outcome
    elif envelope.payload.kind == "ProfileSnapshot":
        summary["profiles"] = len(envelope.payload.profiles)
    return summary
