import pytest

from app.schemas.audit import Actor, OperationKind
from app.schemas.messages import Entity, Envelope, InterfaceName, OperationReport
from app.schemas.scenario import LinkQualityEvent
from app.schemas.state import TzState
from app.services.audit import InactiveAuditor, SecurityAuditor
from app.services.sim_harness import AuditingCenter, load_scenario, run
from app.utils.errors import NoConnectivity, WrongState


@pytest.fixture
def center(trace, loop):
    return AuditingCenter(trace, loop)


@pytest.fixture
def auditor(loop, bus, trace, config, center):
    return SecurityAuditor(loop, bus, trace, config, center)


def record_ops(auditor, count, now=0):
    return [
        auditor.record(Actor.LAA, OperationKind.LOCAL_AUTHENTICATE, f"u{i}", "trusted", now)
        for i in range(count)
    ]


def test_recording_requires_activation(auditor):
    with pytest.raises(InactiveAuditor):
        auditor.record(Actor.ZM, OperationKind.ACCESS_DECISION, "u1", "GrantFull", 0)


def test_disconnect_opens_epoch_with_gapless_seq(auditor):
    assert auditor.set_active(TzState.D) is True
    entries = record_ops(auditor, 3)
    assert [(e.epoch, e.seq) for e in entries] == [(1, 1), (1, 2), (1, 3)]
    assert auditor.buffer_state.delivered_up_to == 0


def test_pull_only_in_connected_state_and_read_only(auditor):
    auditor.set_active(TzState.D)
    record_ops(auditor, 2)
    auditor.set_active(TzState.L)
    with pytest.raises(WrongState):
        auditor.serve_pull(1)

    auditor.set_active(TzState.C)
    before = auditor.buffer_state
    assert [e.seq for e in auditor.serve_pull(2)] == [2]
    assert auditor.buffer_state == before
    # undelivered records keep SA active in C
    assert auditor.active


def test_center_pull_stores_records(auditor, center):
    auditor.set_active(TzState.D)
    record_ops(auditor, 2)
    auditor.set_active(TzState.C)
    center.pull(auditor)
    assert sorted(center.records) == [(1, 1), (1, 2)]


def test_push_retries_after_lost_ack_without_duplicates(auditor, center, loop, config):
    auditor.set_active(TzState.D)
    record_ops(auditor, 3)
    auditor.set_active(TzState.L)
    center.lose_acks(1)

    auditor.set_active(TzState.R)
    assert not auditor.fully_delivered
    loop.run(config.push_retry_ms)

    assert auditor.fully_delivered
    assert center.received_batches == 2
    assert sorted(center.records) == [(1, 1), (1, 2), (1, 3)]

    assert auditor.set_active(TzState.C) is False


def test_push_fails_across_lost_link(auditor, link):
    auditor.set_active(TzState.D)
    record_ops(auditor, 1)
    link.apply(LinkQualityEvent(kind="LinkQuality", at=0, reachable=False))
    with pytest.raises(NoConnectivity):
        auditor.push_to_center()


def test_push_gives_up_after_max_attempts(auditor, center, loop, link, config, trace):
    auditor.set_active(TzState.D)
    record_ops(auditor, 1)
    link.apply(LinkQualityEvent(kind="LinkQuality", at=0, reachable=False))
    auditor.set_active(TzState.R)
    loop.run(config.push_retry_ms * config.push_max_attempts * 2)

    drops = [e for e in trace.events if e.body.get("payload") == "AuditBatch"]
    assert len(drops) == config.push_max_attempts
    assert center.records == {}
    # still pullable once connected
    auditor.set_active(TzState.C)
    assert len(auditor.serve_pull(1)) == 1


def test_reports_ignored_while_inactive(auditor, loop, bus, trace):
    bus.register(Entity.SA, auditor.handle)
    bus.send(
        Envelope(
            interface=InterfaceName.LA_SA,
            sender=Entity.LAA,
            payload=OperationReport(
                actor=Actor.LAA,
                operation=OperationKind.LOCAL_AUTHENTICATE,
                ue_id="u1",
                outcome="trusted",
            ),
            sent_at=0,
        )
    )
    loop.run(10)
    assert auditor.max_seq == 0
    assert not any(e.body.get("type") == "record" for e in trace.events)


def test_new_disconnection_opens_new_epoch(auditor, loop, config):
    auditor.set_active(TzState.D)
    record_ops(auditor, 2)
    auditor.set_active(TzState.R)
    auditor.set_active(TzState.C)
    assert not auditor.active

    auditor.set_active(TzState.D)
    [entry] = record_ops(auditor, 1)
    assert (entry.epoch, entry.seq) == (2, 1)


def test_records_made_while_reconnecting_are_pushed(auditor, center, loop):
    auditor.set_active(TzState.D)
    record_ops(auditor, 2)
    auditor.set_active(TzState.R)
    assert auditor.buffer_state.delivered_up_to == 2

    [late] = record_ops(auditor, 1)
    assert late.seq == 3
    loop.run(loop.now)

    assert auditor.buffer_state.delivered_up_to == 3
    assert sorted(center.records) == [(1, 1), (1, 2), (1, 3)]
    assert center.received_batches == 2
    assert auditor.set_active(TzState.C) is False


def test_reconnection_ends_with_a_final_push(auditor, center, loop):
    auditor.set_active(TzState.D)
    record_ops(auditor, 1)
    auditor.set_active(TzState.R)
    record_ops(auditor, 1)

    # resolved to C before the follow-up push ran
    assert auditor.set_active(TzState.C) is False
    assert sorted(center.records) == [(1, 1), (1, 2)]
    loop.run(loop.now)
    assert center.received_batches == 2

    auditor.set_active(TzState.D)
    assert auditor.epoch == 2


def test_access_while_reconnecting_reaches_the_center(make_document, settings):
    document = make_document(
        extra_events=[
            {"at": 61_050, "kind": "UeAccessRequest", "ue_id": "u1", "service": "Internet"}
        ]
    )
    scenario = load_scenario(document, settings=settings)
    result = run(scenario, seed=42, until=120_000, check_invariants=True)

    center, sa = result.tz.center, result.tz.sa
    assert sorted(center.records) == [(1, e.seq) for e in sa.buffer_state.buffered]
    assert sa.buffer_state.delivered_up_to == sa.max_seq
    assert not sa.active
    late = [e for e in center.records.values() if e.at == 61_050]
    assert [(e.ue_id, e.kind) for e in late][:1] == [("u1", "AccessDecision")]
    assert result.metrics.audit_completeness == 1.0


def test_forced_disconnects_while_reconnecting_are_audited(make_document, settings):
    document = make_document(config={"seed": 42, "transient_dwell_ms": 1000})
    scenario = load_scenario(document, settings=settings)
    result = run(scenario, seed=42, until=120_000, check_invariants=True)

    center, sa = result.tz.center, result.tz.sa
    assert sorted(center.records) == [(1, e.seq) for e in sa.buffer_state.buffered]
    assert not sa.active
    assert any(e.kind == "ForcedDisconnect" for e in center.records.values())


def test_canonical_audit_is_complete_and_exactly_once(canonical_run):
    center = canonical_run.tz.center
    assert sorted(center.records) == [(1, seq) for seq in range(1, 11)]
    assert center.received_batches == 1
    assert canonical_run.metrics.audit_completeness == 1.0

    by_ue = {}
    for entry in center.records.values():
        by_ue.setdefault(entry.ue_id, []).append(entry.kind)
    assert by_ue == {
        "u1": ["TrustChange"],
        "u2": ["TrustChange"],
        "u3": ["TrustChange"],
        "u4": ["LocalAuthenticate", "TrustChange", "AccessDecision", "KeyDerivation"],
        "x1": ["AccessDecision"],
        "x2": ["LocalAuthenticate", "AccessDecision"],
    }


def test_ack_loss_variant_still_exactly_once(ack_loss_run):
    center = ack_loss_run.tz.center
    assert center.received_batches == 2
    assert sorted(center.records) == [(1, seq) for seq in range(1, 11)]
    assert ack_loss_run.metrics.audit_completeness == 1.0
    assert any(e.body.get("type") == "ack_lost" for e in ack_loss_run.trace)
    assert not ack_loss_run.tz.sa.active
