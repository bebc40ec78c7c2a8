import itertools
import logging
from dataclasses import dataclass

from app.schemas.audit import Actor, OperationKind
from app.schemas.emergency import PolicyVerdict, ServiceClass
from app.schemas.local_access import AsKeyToken, LaaActivation
from app.schemas.messages import (
    AccessResponse,
    CentralAuthRequest,
    Entity,
    Envelope,
    ForcedDisconnect,
    InterfaceName,
    KeyRequest,
    LocalAuthRequest,
    OperationReport,
    SecurityModeCommand,
    StateChange,
)
from app.schemas.scenario import SimulationConfig
from app.schemas.state import Ec4Class, TransitionRecord, TzState
from app.schemas.trace import TraceCategory
from app.schemas.zone import (
    AccessDecision,
    AuthOrigin,
    DeviceRecord,
    ReauthEntry,
    ReauthSchedule,
    Route,
    Trust,
    Verdict,
)
from app.services.emergency import (
    EMERGENCY_SERVICE_NAMES,
    EmergencyServices,
    get_service,
)
from app.services.interconnect.bus import Interconnect
from app.services.local_access import activation_for, key_fingerprint
from app.services.state_machine import next_state, settle
from app.services.zone_manager.reauth import build_reauth_schedule
from app.utils.errors import TrustZoneError
from app.utils.kernel import EventLoop, Phase
from app.utils.trace import TraceRecorder

_LOCAL_STATES = (TzState.L, TzState.D)
# states in which ZM reports its security operations to SA
_AUDITED_STATES = (TzState.D, TzState.L, TzState.R)
# states in which a reauth schedule may still run
_REAUTH_STATES = (TzState.R, TzState.C, TzState.W)


class UnknownUe(TrustZoneError):
    """Raised for an access request from a UE that is not attached."""

    pass


class NotTrusted(TrustZoneError):
    """Raised when an AS security procedure is requested for an untrusted UE."""

    pass


class LaaInactive(TrustZoneError):
    """Raised when a local procedure is routed to LAA while it is not working."""

    pass


@dataclass(frozen=True)
class _PendingAuth:
    ue_id: str
    service: str
    requested_at: int


class ZoneManager:
    """
    ZM actor. Owns the device table and the TZ state, routes authentication
    to the central V-AAA or to LAA, and runs the access-management transfer
    when the EC4 drops and when it comes back.
    """

    def __init__(
        self,
        loop: EventLoop,
        bus: Interconnect,
        trace: TraceRecorder,
        config: SimulationConfig,
        emergency: EmergencyServices,
    ):
        self._loop = loop
        self._bus = bus
        self._trace = trace
        self._config = config
        self._emergency = emergency
        self.state = TzState.C
        self.devices: dict[str, DeviceRecord] = {}
        self.transitions: list[TransitionRecord] = []
        self.schedules: list[ReauthSchedule] = []
        self.issued_keys: dict[str, AsKeyToken] = {}
        self._request_ids = itertools.count(1)
        self._episode = 0
        self._pending_central: dict[int, _PendingAuth] = {}
        self._pending_local: dict[str, _PendingAuth] = {}
        # requests received in D, handed to LAA once L is reached
        self._deferred_local: list[_PendingAuth] = []

    # --- inbound ---

    def handle(self, envelope: Envelope) -> None:
        payload = envelope.payload
        now = self._loop.now
        if payload.kind == "Ec4Report":
            self.on_ec4_report(payload.ec4, now)
        elif payload.kind == "Attach":
            self.attach(payload.ue_id, payload.credential, now)
        elif payload.kind == "Detach":
            self.detach(payload.ue_id, now)
        elif payload.kind == "AccessRequest":
            try:
                self.handle_access_request(payload.ue_id, now, payload.service)
            except UnknownUe as e:
                logging.warning(f"Rejected access request: {e}")
                self._trace.emit(
                    now,
                    TraceCategory.DROP,
                    {
                        "interface": envelope.interface,
                        "sender": envelope.sender,
                        "receiver": Entity.ZM,
                        "payload": payload.kind,
                        "central": False,
                        "reason": "unknown_ue",
                        "ue_id": payload.ue_id,
                    },
                )
        elif payload.kind == "CentralAuthResponse":
            self._on_central_auth_response(payload.request_id, payload.accepted)
        elif payload.kind == "LocalAuthResult":
            self._on_local_auth_result(payload.ue_id, payload.trusted)
        elif payload.kind == "KeyToken":
            self._on_key_token(payload.token)

    # --- state transitions ---

    def on_ec4_report(self, report: Ec4Class, now: int) -> TransitionRecord | None:
        """Applies a CCCM classification; identical or transient-state reports are no-ops."""
        if not self.state.is_steady:
            logging.debug(f"EC4 report {report} ignored during transient {self.state}")
            return None

        target = next_state(self.state, report)
        if target is self.state:
            return None
        record = TransitionRecord(from_state=self.state, to_state=target, at=now, cause=report)
        self._enter(record)
        return record

    def _settle(self) -> None:
        record = settle(self.state, self._loop.now)
        if record is not None:
            self._enter(record)

    def _enter(self, record: TransitionRecord) -> None:
        now = record.at
        self.state = record.to_state
        self.transitions.append(record)
        logging.info(
            f"TZ state {record.from_state} -> {record.to_state} at {now} ms ({record.cause})"
        )
        self._trace.emit(
            now,
            TraceCategory.TRANSITION,
            {"type": "transition", **record.model_dump(by_alias=True)},
        )
        self._broadcast(record.to_state, now)

        if record.to_state is TzState.D:
            self.on_disconnect(now)
        elif record.to_state is TzState.L:
            self._flush_deferred(now)
        elif record.to_state is TzState.R:
            trusted = {
                d.ue_id for d in self.devices.values() if d.trust is Trust.TRUSTED
            }
            self._execute_schedule(self.on_reconnect(now, trusted))

        if not record.to_state.is_steady:
            self._loop.schedule(
                now + self._config.transient_dwell_ms, Phase.TRANSIENT, self._settle
            )

    def _broadcast(self, state: TzState, now: int) -> None:
        # SA first so it is active before any report of this state reaches it
        for interface in (
            InterfaceName.ZM_SA,
            InterfaceName.CM_ZM,
            InterfaceName.ES_ZM,
            InterfaceName.ZM_LA,
        ):
            self._send(interface, StateChange(state=state), now)

    # --- lifecycle hooks ---

    def on_disconnect(self, now: int) -> set[str]:
        """Keeps completed central authentications trusted and demotes in-flight ones."""
        # pending reauth entries of the previous reconnection no longer apply
        self._episode += 1
        interrupted = sorted(self._pending_central.values(), key=lambda p: p.ue_id)
        self._pending_central.clear()
        for pending in interrupted:
            self._security_op(OperationKind.TRUST_CHANGE, pending.ue_id, "demoted")
            self._decide_untrusted(pending, Route.NONE, "auth_interrupted")

        trusted = set()
        for ue_id in sorted(self.devices):
            device = self.devices[ue_id]
            if device.attached and device.trust is Trust.TRUSTED:
                trusted.add(ue_id)
                self._security_op(OperationKind.TRUST_CHANGE, ue_id, "retained")
        logging.info(f"Disconnection: {len(trusted)} trusted, {len(interrupted)} demoted")
        return trusted

    def on_reconnect(self, now: int, trusted: set[str]) -> ReauthSchedule:
        candidates = [
            d
            for d in self.devices.values()
            if d.ue_id in trusted and d.attached and d.trust is Trust.TRUSTED
        ]
        schedule = build_reauth_schedule(candidates, now, self._config.reauth_stagger_ms)
        self.schedules.append(schedule)
        self._trace.emit(
            now,
            TraceCategory.DECISION,
            {
                "type": "reauth_schedule",
                "entries": [e.model_dump() for e in schedule.entries],
            },
        )
        return schedule

    def _execute_schedule(self, schedule: ReauthSchedule) -> None:
        for entry in schedule.entries:
            self._loop.schedule(
                entry.disconnect_at,
                Phase.TIMER,
                self._force_disconnect,
                entry,
                self._episode,
            )

    def _force_disconnect(self, entry: ReauthEntry, episode: int) -> None:
        now = self._loop.now
        if episode != self._episode or self.state not in _REAUTH_STATES:
            logging.info(f"Reauth of {entry.ue_id} cancelled in state {self.state}")
            self._trace.emit(
                now,
                TraceCategory.DECISION,
                {"type": "reauth_cancelled", "ue_id": entry.ue_id, "state": self.state},
            )
            return
        device = self.devices.get(entry.ue_id)
        if device is None or not device.attached or device.trust is not Trust.TRUSTED:
            self._trace.emit(
                now,
                TraceCategory.DECISION,
                {"type": "reauth_skipped", "ue_id": entry.ue_id},
            )
            return
        self.devices[entry.ue_id] = DeviceRecord(
            ue_id=entry.ue_id, attached=False, credential=device.credential
        )
        self.issued_keys.pop(entry.ue_id, None)
        self._security_op(
            OperationKind.FORCED_DISCONNECT,
            entry.ue_id,
            f"reauth:{device.auth_origin}",
        )
        self._send(InterfaceName.ZM_UE, ForcedDisconnect(ue_id=entry.ue_id), now)

    # --- devices ---

    def attach(self, ue_id: str, credential: str, now: int) -> DeviceRecord:
        device = self.devices.get(ue_id)
        if device is not None and device.attached:
            return device
        device = DeviceRecord(ue_id=ue_id, attached=True, credential=credential)
        self.devices[ue_id] = device
        self._trace.emit(
            now, TraceCategory.DECISION, {"type": "attach", "ue_id": ue_id, "state": self.state}
        )
        return device

    def detach(self, ue_id: str, now: int) -> None:
        device = self.devices.get(ue_id)
        if device is None or not device.attached:
            return
        self._drop_pending(ue_id)
        self.issued_keys.pop(ue_id, None)
        self.devices[ue_id] = DeviceRecord(
            ue_id=ue_id, attached=False, credential=device.credential
        )
        self._trace.emit(
            now, TraceCategory.DECISION, {"type": "detach", "ue_id": ue_id, "state": self.state}
        )
        if device.trust is Trust.TRUSTED:
            self._security_op(OperationKind.TRUST_CHANGE, ue_id, "detached")

    def _drop_pending(self, ue_id: str) -> None:
        for request_id in [k for k, p in self._pending_central.items() if p.ue_id == ue_id]:
            del self._pending_central[request_id]
        self._pending_local.pop(ue_id, None)
        self._deferred_local = [p for p in self._deferred_local if p.ue_id != ue_id]

    # --- access control ---

    def handle_access_request(
        self, ue_id: str, now: int, service: str = "Internet"
    ) -> AccessDecision | None:
        """
        Decides an access request. Trusted devices are answered at once, as
        are requests for services that never need authentication. Otherwise
        authentication is started and None is returned, the decision
        following when the V-AAA or LAA answers.
        """
        device = self.devices.get(ue_id)
        if device is None or not device.attached:
            raise UnknownUe(f"{ue_id} is not attached")

        if device.trust is Trust.TRUSTED:
            return self._decide_trusted(device, service, "session")

        pending = _PendingAuth(ue_id=ue_id, service=service, requested_at=now)
        catalog_entry = get_service(service)
        if (
            catalog_entry is not None
            and catalog_entry.service_class is ServiceClass.ALWAYS_NO_AUTH
        ):
            return self._decide_untrusted(pending, Route.NONE, "no_auth_required")

        if self.state is TzState.D:
            self._deferred_local.append(pending)
        elif self.state is TzState.L:
            self._start_local_auth(pending)
        else:
            self._start_central_auth(pending, device.credential)
        return None

    def _start_central_auth(self, pending: _PendingAuth, credential: str) -> None:
        now = self._loop.now
        request_id = next(self._request_ids)
        self._pending_central[request_id] = pending
        self._send(
            InterfaceName.ME_ZM,
            CentralAuthRequest(
                ue_id=pending.ue_id, credential=credential, request_id=request_id
            ),
            now,
        )
        self._loop.schedule(
            now + self._config.central_auth_timeout_ms,
            Phase.TIMER,
            self._on_central_timeout,
            request_id,
        )

    def _start_local_auth(self, pending: _PendingAuth) -> None:
        self._require_laa()
        device = self.devices[pending.ue_id]
        self._pending_local[pending.ue_id] = pending
        self._send(
            InterfaceName.ZM_LA,
            LocalAuthRequest(ue_id=pending.ue_id, credential=device.credential),
            self._loop.now,
        )

    def _flush_deferred(self, now: int) -> None:
        deferred, self._deferred_local = self._deferred_local, []
        for pending in deferred:
            device = self.devices.get(pending.ue_id)
            if device is None or not device.attached:
                continue
            if device.trust is Trust.TRUSTED:
                self._decide_trusted(device, pending.service, "session")
            else:
                self._start_local_auth(pending)

    def _on_central_auth_response(self, request_id: int, accepted: bool) -> None:
        pending = self._pending_central.pop(request_id, None)
        if pending is None:
            logging.debug(f"Late central auth response {request_id} ignored")
            return
        if accepted:
            self._grant_trust(pending, AuthOrigin.CENTRAL, Route.CENTRAL_VAAA)
        else:
            self._decide_untrusted(pending, Route.CENTRAL_VAAA, "central_rejected")

    def _on_central_timeout(self, request_id: int) -> None:
        pending = self._pending_central.pop(request_id, None)
        if pending is None:
            return
        logging.warning(f"Central authentication of {pending.ue_id} timed out")
        self._decide_untrusted(pending, Route.CENTRAL_VAAA, "central_timeout")

    def _on_local_auth_result(self, ue_id: str, trusted: bool) -> None:
        pending = self._pending_local.pop(ue_id, None)
        if pending is None:
            return
        if trusted and self.state is TzState.L:
            self._grant_trust(pending, AuthOrigin.LOCAL, Route.LOCAL_LAA)
        else:
            self._decide_untrusted(pending, Route.LOCAL_LAA, "local_rejected")

    def _grant_trust(self, pending: _PendingAuth, origin: AuthOrigin, route: Route) -> None:
        now = self._loop.now
        device = self.devices[pending.ue_id]
        emergency = {
            name
            for name, decision in self._emergency.decisions(Trust.TRUSTED, self.state).items()
            if decision.verdict is not PolicyVerdict.INACTIVE
        }
        device = device.model_copy(
            update={
                "trust": Trust.TRUSTED,
                "auth_origin": origin,
                "granted": frozenset(self._config.full_services) | frozenset(emergency),
                "last_auth_at": now,
            }
        )
        self.devices[device.ue_id] = device
        self._security_op(OperationKind.TRUST_CHANGE, device.ue_id, f"trusted:{origin}")
        self._decide_trusted(device, pending.service, f"authenticated:{route}")
        self.as_security_procedure(device.ue_id)

    def _decide_trusted(
        self, device: DeviceRecord, service: str, reason: str
    ) -> AccessDecision:
        route = Route.LOCAL_LAA if self.state in _LOCAL_STATES else Route.CENTRAL_VAAA
        if service in EMERGENCY_SERVICE_NAMES:
            decision = self._emergency.decide(service, Trust.TRUSTED, self.state)
            served = decision.verdict is not PolicyVerdict.INACTIVE
        else:
            served = service in device.granted
        return self._emit_decision(
            AccessDecision(
                ue_id=device.ue_id,
                service=service,
                verdict=Verdict.GRANT_FULL,
                route=route,
                reason=reason,
                served=served,
                granted=device.granted,
            ),
            Trust.TRUSTED,
        )

    def _decide_untrusted(
        self, pending: _PendingAuth, route: Route, reason: str
    ) -> AccessDecision:
        ue_id, service = pending.ue_id, pending.service
        granted = self._emergency.granted_without_auth(Trust.UNTRUSTED, self.state)
        device = self.devices.get(ue_id)
        if device is not None and device.attached:
            self.devices[ue_id] = device.model_copy(
                update={
                    "trust": Trust.UNTRUSTED,
                    "auth_origin": AuthOrigin.NONE,
                    "granted": granted,
                }
            )

        verdict, served = Verdict.GRANT_EMERGENCY_ONLY, False
        if service in EMERGENCY_SERVICE_NAMES:
            decision = self._emergency.decide(service, Trust.UNTRUSTED, self.state)
            if decision.verdict is PolicyVerdict.INACTIVE:
                verdict, reason = Verdict.DENY, "service_inactive"
            elif decision.verdict is PolicyVerdict.ALLOW_RESTRICTED:
                if self._emergency.consume_restricted(ue_id, service):
                    served = True
                else:
                    verdict, reason = Verdict.DENY, "quota_exhausted"
            else:
                served = not decision.requires_auth

        if verdict is Verdict.DENY:
            route = Route.NONE
        return self._emit_decision(
            AccessDecision(
                ue_id=ue_id,
                service=service,
                verdict=verdict,
                route=route,
                reason=reason,
                served=served,
                granted=granted,
            ),
            Trust.UNTRUSTED,
        )

    def _emit_decision(self, decision: AccessDecision, trust: Trust) -> AccessDecision:
        now = self._loop.now
        self._security_op(
            OperationKind.ACCESS_DECISION,
            decision.ue_id,
            decision.verdict,
            {
                "service": decision.service,
                "route": decision.route,
                "reason": decision.reason,
                "served": decision.served,
                "granted": decision.granted,
                "trust": trust,
            },
        )
        self._send(
            InterfaceName.ZM_UE,
            AccessResponse(
                ue_id=decision.ue_id,
                service=decision.service,
                verdict=decision.verdict,
                served=decision.served,
            ),
            now,
        )
        return decision

    # --- AS security ---

    def as_security_procedure(self, ue_id: str) -> None:
        """
        Requests an AS key for a trusted UE from the AMF (C/W/R) or from LAA
        (L/D). The token arrives on the bus and is announced to the UE with a
        security mode command.
        """
        device = self.devices.get(ue_id)
        if device is None or device.trust is not Trust.TRUSTED:
            raise NotTrusted(f"{ue_id} is not trusted")
        if self.state in _LOCAL_STATES:
            self._require_laa()
            self._send(InterfaceName.ZM_LA, KeyRequest(ue_id=ue_id), self._loop.now)
        else:
            self._send(InterfaceName.ME_ZM, KeyRequest(ue_id=ue_id), self._loop.now)

    def _on_key_token(self, token: AsKeyToken) -> None:
        device = self.devices.get(token.ue_id)
        if device is None or not device.attached or device.trust is not Trust.TRUSTED:
            logging.debug(f"Discarding AS key for {token.ue_id}, no longer trusted")
            return
        now = self._loop.now
        self.issued_keys[token.ue_id] = token
        fingerprint = key_fingerprint(token.token)
        self._trace.emit(
            now,
            TraceCategory.DECISION,
            {
                "type": "security_mode",
                "ue_id": token.ue_id,
                "counter": token.counter,
                "fingerprint": fingerprint,
                "state": self.state,
            },
        )
        self._send(
            InterfaceName.ZM_UE,
            SecurityModeCommand(
                ue_id=token.ue_id, counter=token.counter, key_fingerprint=fingerprint
            ),
            now,
        )

    def _require_laa(self) -> None:
        activation = activation_for(self.state)
        if activation not in (LaaActivation.ACTIVATED, LaaActivation.ACTIVE):
            raise LaaInactive(f"LAA is {activation} in state {self.state}")

    # --- plumbing ---

    def _security_op(
        self,
        kind: OperationKind,
        ue_id: str,
        outcome: str,
        extra: dict | None = None,
    ) -> None:
        now = self._loop.now
        self._trace.emit(
            now,
            TraceCategory.DECISION,
            {
                "type": "security_op",
                "actor": Actor.ZM,
                "kind": kind,
                "ue_id": ue_id,
                "outcome": outcome,
                "state": self.state,
                **(extra or {}),
            },
        )
        if self.state in _AUDITED_STATES:
            self._send(
                InterfaceName.ZM_SA,
                OperationReport(
                    actor=Actor.ZM, operation=kind, ue_id=ue_id, outcome=str(outcome)
                ),
                now,
            )

    def _send(self, interface: InterfaceName, payload, now: int) -> bool:
        return self._bus.send(
            Envelope(interface=interface, sender=Entity.ZM, payload=payload, sent_at=now)
        )
