import hmac
import logging
from typing import Callable, Iterable, Literal

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.audit import AuditRecord, OperationKind
from app.schemas.cccm import Diagnosis, Ec4Sample
from app.schemas.local_access import AsKeyToken, SubscriberProfile
from app.schemas.messages import (
    CentralAuthResponse,
    Entity,
    Envelope,
    InterfaceName,
    KeyToken,
    ProbeReading,
)
from app.schemas.scenario import BackupRouteEvent, LinkQualityEvent, SimulationConfig
from app.schemas.state import Ec4Class
from app.schemas.trace import TraceCategory
from app.services.cccm import Thresholds, classify_ec4, merge_samples
from app.services.interconnect import Interconnect
from app.services.local_access import credential_digest, derive_token
from app.utils.kernel import EventLoop
from app.utils.trace import TraceRecorder


class LinkReading(BaseModel):
    """What one probe target currently reports about the EC4."""

    model_config = ConfigDict(frozen=True)

    reachable: bool = True
    loss_rate: float = Field(0.0, ge=0.0, le=1.0)
    latency: float = Field(20.0, ge=0.0)
    throughput: float = Field(1.0, ge=0.0, le=1.0)

    def sample(self, at: int) -> Ec4Sample:
        if not self.reachable:
            return Ec4Sample.unreachable(at)
        return Ec4Sample(
            at=at,
            reachable=True,
            latency=self.latency,
            loss_rate=self.loss_rate,
            throughput=self.throughput,
        )


class LinkModel:
    """Ground truth of the EC4 as scripted by the scenario."""

    def __init__(self, config: SimulationConfig):
        healthy = LinkReading(latency=config.baseline_latency_ms)
        self._thresholds = Thresholds.from_config(config)
        self._readings: dict[str, LinkReading] = {"oss": healthy, "mano": healthy}

    def apply(self, event: LinkQualityEvent) -> None:
        reading = LinkReading(
            reachable=event.reachable,
            loss_rate=event.loss_rate,
            latency=event.latency,
            throughput=event.throughput,
        )
        targets = ("oss", "mano") if event.source == "both" else (event.source,)
        for target in targets:
            self._readings[target] = reading

    def apply_backup_route(self, event: BackupRouteEvent) -> None:
        reading = LinkReading(
            loss_rate=event.loss_rate, latency=event.latency, throughput=event.throughput
        )
        self._readings = {"oss": reading, "mano": reading}

    def reading(self, source: Literal["oss", "mano"]) -> LinkReading:
        return self._readings[source]

    def current(self, at: int = 0) -> Ec4Sample:
        return merge_samples(
            self._readings["oss"].sample(at), self._readings["mano"].sample(at)
        )

    def ec4_class(self) -> Ec4Class:
        return classify_ec4([self.current()], self._thresholds)

    def latency(self) -> float:
        return self.current().latency or 0.0


def central_vaaa_oracle(
    db: dict[str, SubscriberProfile], ue_id: str, credential: str
) -> bool:
    """Accepts iff the hierarchical subscriber DB holds the UE with a matching digest."""
    profile = db.get(ue_id)
    if profile is None:
        return False
    return hmac.compare_digest(credential_digest(credential), profile.credential_digest)


class AuditingCenter:
    """Central store of audit records, keyed by (epoch, seq)."""

    def __init__(
        self,
        trace: TraceRecorder,
        loop: EventLoop,
        on_stored: Callable[[AuditRecord], None] | None = None,
    ):
        self._trace = trace
        self._loop = loop
        self._on_stored = on_stored
        self.records: dict[tuple[int, int], AuditRecord] = {}
        self.received_batches = 0
        self._acks_to_drop = 0

    def _store(self, entry: AuditRecord) -> bool:
        key = (entry.epoch, entry.seq)
        if key in self.records:
            return False
        self.records[key] = entry
        if self._on_stored is not None:
            self._on_stored(entry)
        return True

    def lose_acks(self, count: int) -> None:
        self._acks_to_drop += count

    def acked_up_to(self, epoch: int) -> int:
        seq = 0
        while (epoch, seq + 1) in self.records:
            seq += 1
        return seq

    def receive(self, epoch: int, records: list[AuditRecord]) -> int | None:
        self.received_batches += 1
        stored = duplicates = 0
        for entry in records:
            if self._store(entry):
                stored += 1
            else:
                duplicates += 1

        now = self._loop.now
        self._trace.emit(
            now,
            TraceCategory.AUDIT,
            {
                "type": "center_received",
                "epoch": epoch,
                "stored": stored,
                "duplicates": duplicates,
            },
        )
        if self._acks_to_drop:
            self._acks_to_drop -= 1
            logging.warning(f"Audit ack for epoch {epoch} lost")
            return None
        return self.acked_up_to(epoch)

    def pull(self, auditor, from_seq: int = 1) -> list[AuditRecord]:
        """Reads records from an SA in state C and stores what is new."""
        fetched = auditor.serve_pull(from_seq)
        for entry in fetched:
            self._store(entry)
        return fetched


class CentralCloud:
    """
    The far end of the EC4: OSS and NFV-MANO probe targets, the V-AAA
    manager with the hierarchical subscriber DB, and the AMF.
    """

    def __init__(
        self,
        loop: EventLoop,
        bus: Interconnect,
        link: LinkModel,
        subscribers: Iterable[SubscriberProfile] = (),
    ):
        self._loop = loop
        self._bus = bus
        self.link = link
        self.db: dict[str, SubscriberProfile] = {p.subscriber_id: p for p in subscribers}
        self.diagnoses: list[Diagnosis] = []

    def snapshot(self) -> tuple[SubscriberProfile, ...]:
        return tuple(self.db[k] for k in sorted(self.db))

    def absorb_audit_record(self, entry: AuditRecord) -> None:
        """Advances the central key counter past every counter the edge derived."""
        if entry.kind is not OperationKind.KEY_DERIVATION:
            return
        _, _, counter = entry.outcome.partition("counter:")
        profile = self.db.get(entry.ue_id)
        if profile is None or not counter.isdigit():
            return
        used = int(counter)
        if profile.key_counter <= used:
            self.db[entry.ue_id] = profile.model_copy(update={"key_counter": used + 1})
            logging.info(f"Central key counter of {entry.ue_id} advanced to {used + 1}")

    def update_profile(self, profile: SubscriberProfile) -> None:
        current = self.db.get(profile.subscriber_id)
        if current is not None:
            profile = profile.model_copy(
                update={"key_counter": max(profile.key_counter, current.key_counter)}
            )
        self.db[profile.subscriber_id] = profile

    # --- probe targets ---

    def handle_oss(self, envelope: Envelope):
        if envelope.payload.kind == "ProbeRequest":
            return ProbeReading(sample=self.link.reading("oss").sample(self._loop.now))
        return None

    def handle_mano(self, envelope: Envelope):
        payload = envelope.payload
        if payload.kind == "ProbeRequest":
            return ProbeReading(sample=self.link.reading("mano").sample(self._loop.now))
        if payload.kind == "PriorityHints":
            self._bus.apply_priority_hints(payload.hints)
        elif payload.kind == "DiagnosisReport":
            self.diagnoses.append(payload.diagnosis)
        return None

    # --- V-AAA manager and AMF behind Me-Zm ---

    def handle_amf(self, envelope: Envelope) -> None:
        payload = envelope.payload
        now = self._loop.now
        if payload.kind == "CentralAuthRequest":
            accepted = central_vaaa_oracle(self.db, payload.ue_id, payload.credential)
            reply = CentralAuthResponse(
                ue_id=payload.ue_id, accepted=accepted, request_id=payload.request_id
            )
        elif payload.kind == "KeyRequest":
            token = self.issue_as_key(payload.ue_id)
            if token is None:
                return
            reply = KeyToken(token=token)
        else:
            return
        self._bus.send(
            Envelope(
                interface=InterfaceName.ME_ZM, sender=Entity.AMF, payload=reply, sent_at=now
            )
        )

    def issue_as_key(self, ue_id: str) -> AsKeyToken | None:
        profile = self.db.get(ue_id)
        if profile is None:
            logging.warning(f"AMF has no subscriber {ue_id}")
            return None
        token = AsKeyToken(
            ue_id=ue_id,
            counter=profile.key_counter,
            token=derive_token(profile.credential_digest, profile.key_counter),
        )
        self.db[ue_id] = profile.model_copy(update={"key_counter": profile.key_counter + 1})
        return token
