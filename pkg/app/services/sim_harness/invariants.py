from typing import Callable

from app.schemas.state import Ec4Class, TzState
from app.schemas.trace import TraceCategory, TraceEvent
from app.schemas.zone import Trust
from app.services.emergency import EMERGENCY_CALL, EMERGENCY_SERVICE_NAMES
from app.services.sim_harness.metrics import is_unauthorized_grant
from app.services.state_machine import is_valid_transition
from app.utils.errors import InvariantViolation
from app.utils.trace import TraceRecorder

_LOCAL_ROUTE_STATES = {TzState.L.value, TzState.D.value}
_CENTRAL_ROUTE_STATES = {TzState.C.value, TzState.W.value, TzState.R.value}


class InvariantChecker:
    """
    Checks protocol invariants after every event-loop step, looking at the
    trace events emitted during the step and at the live device table.
    """

    def __init__(
        self,
        trace: TraceRecorder,
        link_class: Callable[[], Ec4Class],
        devices: Callable[[], dict],
        transient_dwell_ms: int,
    ):
        self._trace = trace
        self._link_class = link_class
        self._devices = devices
        self._dwell = transient_dwell_ms
        self._cursor = 0
        self._state = TzState.C.value
        self._entered_at = 0
        self._audit_seq: dict[int, int] = {}

    def check_step(self) -> None:
        events = self._trace.events[self._cursor :]
        self._cursor = len(self._trace.events)
        for event in events:
            self._check_event(event)
        self._check_devices()

    def _check_event(self, event: TraceEvent) -> None:
        body = event.body
        if event.category is TraceCategory.TRANSITION:
            self._check_transition(event)
        elif event.category is TraceCategory.ENVELOPE:
            if body.get("central") and self._link_class() is Ec4Class.LOST:
                self._fail("partition", event, f"{body.get('payload')} crossed a lost EC4")
        elif event.category is TraceCategory.AUDIT and body.get("type") == "record":
            expected = self._audit_seq.get(body["epoch"], 0) + 1
            if body["seq"] != expected:
                self._fail("audit_gapless", event, f"expected seq {expected}")
            self._audit_seq[body["epoch"]] = body["seq"]
        elif event.category is TraceCategory.DECISION and body.get("type") == "security_op":
            self._check_security_op(event)

    def _check_transition(self, event: TraceEvent) -> None:
        source, target = event.body["from"], event.body["to"]
        if source != self._state:
            self._fail("transition_continuity", event, f"left {source} while in {self._state}")
        if not is_valid_transition(TzState(source), TzState(target)):
            self._fail("transition_edge", event, f"{source}->{target}")
        if not TzState(source).is_steady and event.at != self._entered_at + self._dwell:
            self._fail("transient_dwell", event, f"{source} left at {event.at}")
        self._state, self._entered_at = target, event.at

    def _check_security_op(self, event: TraceEvent) -> None:
        body = event.body
        if body["kind"] == "AccessDecision":
            if is_unauthorized_grant(body):
                self._fail("device_safety", event, f"untrusted {body['ue_id']} granted")
            route = body.get("route")
            if route == "LocalLaa" and body["state"] not in _LOCAL_ROUTE_STATES:
                self._fail("routing_discipline", event, f"local route in {body['state']}")
            if route == "CentralVaaa" and body["state"] not in _CENTRAL_ROUTE_STATES:
                self._fail("routing_discipline", event, f"central route in {body['state']}")
            if body.get("service") == EMERGENCY_CALL and body["outcome"] == "Deny":
                self._fail("emergency_liveness", event, "emergency call denied")
        elif body["kind"] == "TrustChange" and body["outcome"] == "trusted:Local":
            if body["state"] != TzState.L.value:
                self._fail("local_origin", event, f"local trust in {body['state']}")

    def _check_devices(self) -> None:
        for device in self._devices().values():
            if device.trust is Trust.UNTRUSTED and not device.granted <= EMERGENCY_SERVICE_NAMES:
                raise InvariantViolation(
                    "device_safety",
                    self._trace.last_seq,
                    f"untrusted {device.ue_id} holds {sorted(device.granted)}",
                )

    def _fail(self, name: str, event: TraceEvent, detail: str) -> None:
        raise InvariantViolation(name, event.seq, detail)
