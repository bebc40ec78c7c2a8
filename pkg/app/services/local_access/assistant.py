import hmac
import logging

from app.schemas.audit import Actor, OperationKind
from app.schemas.local_access import AsKeyToken, LaaActivation, SyncReport
from app.schemas.messages import (
    Entity,
    Envelope,
    InterfaceName,
    KeyToken,
    LocalAuthResult,
    OperationReport,
)
from app.schemas.state import TzState
from app.schemas.trace import TraceCategory
from app.schemas.zone import Trust
from app.services.interconnect.bus import Interconnect
from app.services.local_access.kdf import credential_digest, derive_token
from app.services.local_access.lss import LocalSubscriberServer
from app.utils.errors import NoConnectivity, TrustZoneError
from app.utils.kernel import EventLoop
from app.utils.trace import TraceRecorder


class NotActive(TrustZoneError):
    """Raised when a local security operation is attempted while LAA is not active."""

    pass


class UnknownSubscriber(TrustZoneError):
    """Raised when the LSS holds no profile for the subscriber."""

    pass


class ScopeViolation(TrustZoneError):
    """Raised for any key derivation outside the AS domain."""

    pass


_ACTIVATION_BY_STATE: dict[TzState, LaaActivation] = {
    TzState.R: LaaActivation.DEACTIVATED,
    TzState.C: LaaActivation.INACTIVE,
    TzState.W: LaaActivation.INACTIVE,
    TzState.D: LaaActivation.ACTIVATED,
    TzState.L: LaaActivation.ACTIVE,
}

_WORKING = (LaaActivation.ACTIVATED, LaaActivation.ACTIVE)


def activation_for(tz_state: TzState) -> LaaActivation:
    return _ACTIVATION_BY_STATE[tz_state]


class LocalAccessAssistant:
    """
    LAA actor. Verifies UEs against the LSS and derives AS keys while the TZ
    is cut off from the central cloud. Every operation it performs while
    working is reported to SA over La-Sa.
    """

    def __init__(
        self,
        loop: EventLoop,
        bus: Interconnect,
        trace: TraceRecorder,
        lss: LocalSubscriberServer,
    ):
        self._loop = loop
        self._bus = bus
        self._trace = trace
        self.lss = lss
        self.activation = LaaActivation.INACTIVE
        self.tz_state = TzState.C
        self._issued: dict[str, AsKeyToken] = {}

    @property
    def issued_tokens(self) -> dict[str, AsKeyToken]:
        return dict(self._issued)

    def handle(self, envelope: Envelope) -> None:
        payload = envelope.payload
        if payload.kind == "StateChange":
            self.set_activation(payload.state)
        elif payload.kind == "ProfileSnapshot":
            try:
                self.sync_profiles(payload.profiles, self._loop.now)
            except NoConnectivity as e:
                logging.warning(f"Discarding late profile snapshot: {e}")
        elif payload.kind == "LocalAuthRequest":
            try:
                trust = self.local_authenticate(
                    payload.ue_id, payload.credential.encode("utf-8")
                )
            except NotActive as e:
                logging.warning(f"Local authentication refused for {payload.ue_id}: {e}")
                trust = Trust.UNTRUSTED
            self._reply(
                LocalAuthResult(ue_id=payload.ue_id, trusted=trust is Trust.TRUSTED)
            )
        elif payload.kind == "KeyRequest":
            try:
                token = self.derive_as_key(payload.ue_id)
            except (NotActive, UnknownSubscriber) as e:
                logging.warning(f"No AS key for {payload.ue_id}: {e}")
                self._trace.emit(
                    self._loop.now,
                    TraceCategory.DECISION,
                    {"type": "key_refused", "ue_id": payload.ue_id, "reason": str(e)},
                )
                return
            self._reply(KeyToken(token=token))

    def set_activation(self, tz_state: TzState) -> LaaActivation:
        self.tz_state = tz_state
        self.activation = activation_for(tz_state)
        if self.activation is LaaActivation.DEACTIVATED:
            # reconnection is the attack window; forget derived key material
            self._issued.clear()
        return self.activation

    def local_authenticate(self, ue_id: str, presented_credential: bytes) -> Trust:
        """Trusted iff the LSS holds the subscriber and the credential digest matches."""
        self._require_working()
        profile = self.lss.get(ue_id)
        if profile is None:
            trust, outcome = Trust.UNTRUSTED, "lss_absent"
        elif hmac.compare_digest(
            credential_digest(presented_credential), profile.credential_digest
        ):
            trust, outcome = Trust.TRUSTED, "trusted"
        else:
            trust, outcome = Trust.UNTRUSTED, "lss_mismatch"
        self._report(OperationKind.LOCAL_AUTHENTICATE, ue_id, outcome)
        return trust

    def derive_as_key(self, ue_id: str, scope: str = "AS") -> AsKeyToken:
        if scope != "AS":
            raise ScopeViolation(f"{scope} keys can only be generated in the central cloud")
        self._require_working()
        profile = self.lss.get(ue_id)
        if profile is None:
            raise UnknownSubscriber(f"no LSS profile for {ue_id}")

        token = AsKeyToken(
            ue_id=ue_id,
            counter=profile.key_counter,
            token=derive_token(profile.credential_digest, profile.key_counter),
        )
        self.lss.bump_counter(ue_id)
        self._issued[ue_id] = token
        self._report(OperationKind.KEY_DERIVATION, ue_id, f"counter:{token.counter}")
        return token

    def sync_profiles(self, central_snapshot, now: int) -> SyncReport:
        report = self.lss.sync_profiles(central_snapshot, now, self.tz_state)
        self._trace.emit(
            now,
            TraceCategory.METRIC,
            {"type": "lss_sync", "applied": report.applied, "skipped": report.skipped},
        )
        return report

    def _require_working(self) -> None:
        if self.activation not in _WORKING:
            raise NotActive(f"LAA is {self.activation}")

    def _reply(self, payload) -> None:
        self._bus.send(
            Envelope(
                interface=InterfaceName.ZM_LA,
                sender=Entity.LAA,
                payload=payload,
                sent_at=self._loop.now,
            )
        )

    def _report(self, operation: OperationKind, ue_id: str, outcome: str) -> None:
        now = self._loop.now
        self._trace.emit(
            now,
            TraceCategory.DECISION,
            {
                "type": "security_op",
                "actor": Actor.LAA,
                "kind": operation,
                "ue_id": ue_id,
                "outcome": outcome,
                "state": self.tz_state,
            },
        )
        self._bus.send(
            Envelope(
                interface=InterfaceName.LA_SA,
                sender=Entity.LAA,
                payload=OperationReport(
                    actor=Actor.LAA, operation=operation, ue_id=ue_id, outcome=outcome
                ),
                sent_at=now,
            )
        )
