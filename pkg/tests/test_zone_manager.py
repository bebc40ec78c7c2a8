import json

import pytest

from app.schemas.state import TzState
from app.schemas.zone import AuthOrigin, DeviceRecord, Trust
from app.services.sim_harness import TrustZone, load_scenario, run
from app.services.zone_manager import NotTrusted, UnknownUe, build_reauth_schedule

C, W, L, R, D = TzState.C, TzState.W, TzState.L, TzState.R, TzState.D


def trusted(ue_id: str, origin: AuthOrigin, **fields) -> DeviceRecord:
    return DeviceRecord(ue_id=ue_id, trust=Trust.TRUSTED, auth_origin=origin, **fields)


def scenario(settings, events, subscribers=("a", "b"), lss=(), **config):
    document = {
        "version": 1,
        "config": config,
        "subscribers": [
            {"subscriber_id": s, "credential": f"cred-{s}"} for s in subscribers
        ],
        "lss": [{"subscriber_id": s, "credential": f"cred-{s}"} for s in lss],
        "events": events,
    }
    return load_scenario(json.dumps(document), settings=settings)


def security_ops(result, kind=None, ue_id=None) -> list:
    return [
        e
        for e in result.trace
        if e.body.get("type") == "security_op"
        and (kind is None or e.body["kind"] == kind)
        and (ue_id is None or e.body["ue_id"] == ue_id)
    ]


# --- reauth schedule ---


def test_local_origins_are_flushed_first():
    devices = [
        trusted("u3", AuthOrigin.LOCAL),
        trusted("u1", AuthOrigin.CENTRAL),
        trusted("u2", AuthOrigin.LOCAL),
    ]
    schedule = build_reauth_schedule(devices, now=1000, stagger_ms=200)
    assert [(e.ue_id, e.disconnect_at, e.auth_origin) for e in schedule.entries] == [
        ("u2", 1200, AuthOrigin.LOCAL),
        ("u3", 1400, AuthOrigin.LOCAL),
        ("u1", 1600, AuthOrigin.CENTRAL),
    ]


def test_schedule_skips_untrusted_and_detached():
    devices = [
        DeviceRecord(ue_id="x1"),
        trusted("u1", AuthOrigin.CENTRAL, attached=False),
        trusted("u2", AuthOrigin.CENTRAL),
    ]
    schedule = build_reauth_schedule(devices, now=0, stagger_ms=200)
    assert [e.ue_id for e in schedule.entries] == ["u2"]


def test_trusted_device_needs_origin():
    with pytest.raises(ValueError):
        DeviceRecord(ue_id="u1", trust=Trust.TRUSTED)


# --- direct calls ---


@pytest.fixture
def idle_zone(settings):
    return TrustZone(scenario(settings, []), seed=0)


def test_access_request_from_unattached_ue(idle_zone):
    with pytest.raises(UnknownUe):
        idle_zone.zm.handle_access_request("ghost", 0)


def test_as_security_needs_trust(idle_zone):
    idle_zone.zm.attach("a", "cred-a", 0)
    with pytest.raises(NotTrusted):
        idle_zone.zm.as_security_procedure("a")


def test_untrusted_request_starts_authentication(idle_zone):
    idle_zone.zm.attach("a", "cred-a", 0)
    assert idle_zone.zm.handle_access_request("a", 0) is None


# --- canonical disconnection day ---


def test_canonical_transitions(canonical_run):
    assert [
        (t.from_state, t.to_state, t.at) for t in canonical_run.tz.zm.transitions
    ] == [
        (C, D, 12_000),
        (D, L, 12_100),
        (L, W, 60_000),
        (W, R, 61_000),
        (R, C, 61_100),
    ]


def test_state_change_reaches_sa_first(canonical_run):
    broadcast = [
        e.body["interface"]
        for e in canonical_run.trace
        if e.at == 12_000
        and e.category == "Envelope"
        and e.body["payload"] == "StateChange"
    ]
    assert broadcast == ["Zm-Sa", "Cm-Zm", "Es-Zm", "Zm-La"]


def test_pre_authenticated_devices_stay_trusted_through_disconnection(canonical_run):
    retained = security_ops(canonical_run, kind="TrustChange")
    assert [
        (e.at, e.body["ue_id"], e.body["outcome"])
        for e in retained
        if e.body["outcome"] == "retained"
    ] == [(12_000, "u1", "retained"), (12_000, "u2", "retained"), (12_000, "u3", "retained")]


def test_only_lss_subscriber_gets_local_trust(canonical_run):
    local = [
        (e.body["ue_id"], e.body["state"])
        for e in security_ops(canonical_run, kind="TrustChange")
        if e.body["outcome"] == "trusted:Local"
    ]
    assert local == [("u4", "L")]

    decisions = {
        e.body["ue_id"]: e.body
        for e in security_ops(canonical_run, kind="AccessDecision")
        if 12_000 <= e.at < 60_000
    }
    assert decisions["u4"]["verdict"] == "GrantFull"
    assert decisions["u4"]["route"] == "LocalLaa"
    assert decisions["x2"]["verdict"] == "GrantEmergencyOnly"
    assert decisions["x2"]["served"] is False
    assert set(decisions["x2"]["granted"]) <= {
        "EmergencyCall",
        "DisasterAlarm",
        "EvacuationGuidance",
        "Positioning",
        "SMS",
    }


def test_reconnection_schedule(canonical_run):
    [schedule] = canonical_run.tz.zm.schedules
    assert [(e.ue_id, e.disconnect_at, e.auth_origin) for e in schedule.entries] == [
        ("u4", 61_200, AuthOrigin.LOCAL),
        ("u1", 61_400, AuthOrigin.CENTRAL),
        ("u2", 61_600, AuthOrigin.CENTRAL),
        ("u3", 61_800, AuthOrigin.CENTRAL),
    ]
    forced = security_ops(canonical_run, kind="ForcedDisconnect")
    assert [(e.at, e.body["ue_id"], e.body["outcome"]) for e in forced] == [
        (61_200, "u4", "reauth:Local"),
        (61_400, "u1", "reauth:Central"),
        (61_600, "u2", "reauth:Central"),
        (61_800, "u3", "reauth:Central"),
    ]
    assert canonical_run.tz.ues.sessions["u4"].forced_disconnects == 1


def test_local_device_reauthenticated_centrally_before_full_access(canonical_run):
    ops = security_ops(canonical_run, ue_id="u4")
    forced = next(e for e in ops if e.body["kind"] == "ForcedDisconnect")
    after = [e for e in ops if e.seq > forced.seq]
    central = next(
        e for e in after if e.body["kind"] == "TrustChange" and e.body["outcome"] == "trusted:Central"
    )
    served_early = [
        e
        for e in after
        if e.body["kind"] == "AccessDecision" and e.body["served"] and e.seq < central.seq
    ]
    assert served_early == []


def test_every_device_central_after_reauth(canonical_run):
    devices = canonical_run.tz.zm.devices
    for ue_id in ("u1", "u2", "u3", "u4"):
        device = devices[ue_id]
        assert device.trust is Trust.TRUSTED
        assert device.auth_origin is AuthOrigin.CENTRAL
        assert device.last_auth_at > 61_000
        assert ue_id in canonical_run.tz.zm.issued_keys
    assert not [d for d in devices.values() if d.auth_origin is AuthOrigin.LOCAL]
    assert devices["x1"].trust is Trust.UNTRUSTED


def test_ue_receives_security_mode_without_key_material(canonical_run):
    [local, central] = canonical_run.tz.ues.sessions["u4"].security_modes
    # the audited local derivation moves the central counter on
    assert (local.counter, central.counter) == (0, 1)
    assert local.key_fingerprint != central.key_fingerprint
    assert not hasattr(local, "token")


# --- other routes ---


def test_weak_link_keeps_central_route(settings):
    result = run(
        scenario(
            settings,
            [
                {"at": 10_000, "kind": "LinkQuality", "loss_rate": 0.5},
                {"at": 15_000, "kind": "UeAttach", "ue_id": "a", "credential": "cred-a"},
                {"at": 15_000, "kind": "UeAccessRequest", "ue_id": "a"},
            ],
            weak_drop_probability=0.0,
            weak_high_priority_drop_probability=0.0,
        ),
        until=20_000,
        check_invariants=True,
    )
    assert result.tz.zm.state is W
    [decision] = security_ops(result, kind="AccessDecision", ue_id="a")
    assert (decision.at, decision.body["route"], decision.body["state"]) == (
        15_400,
        "CentralVaaa",
        "W",
    )
    assert result.tz.zm.devices["a"].auth_origin is AuthOrigin.CENTRAL


def test_central_auth_cut_by_disconnection(settings):
    result = run(
        scenario(
            settings,
            [
                {"at": 9_000, "kind": "UeAttach", "ue_id": "a", "credential": "cred-a"},
                {"at": 9_000, "kind": "UeAttach", "ue_id": "b", "credential": "cred-b"},
                {"at": 9_990, "kind": "UeAccessRequest", "ue_id": "a"},
                {"at": 10_000, "kind": "LinkQuality", "reachable": False},
                {"at": 11_000, "kind": "UeAccessRequest", "ue_id": "b"},
            ],
        ),
        until=20_000,
        check_invariants=True,
    )
    decisions = {
        e.body["ue_id"]: (e.at, e.body["reason"], e.body["verdict"])
        for e in security_ops(result, kind="AccessDecision")
    }
    # a's request is lost in flight and times out; b's is cut by the disconnection
    assert decisions == {
        "a": (11_990, "central_timeout", "GrantEmergencyOnly"),
        "b": (12_000, "auth_interrupted", "GrantEmergencyOnly"),
    }
    demoted = security_ops(result, kind="TrustChange")
    assert [(e.body["ue_id"], e.body["outcome"]) for e in demoted] == [("b", "demoted")]


def test_request_during_disconnecting_waits_for_lost_state(settings):
    result = run(
        scenario(
            settings,
            [
                {"at": 10_000, "kind": "LinkQuality", "reachable": False},
                {"at": 12_050, "kind": "UeAttach", "ue_id": "a", "credential": "cred-a"},
                {"at": 12_050, "kind": "UeAccessRequest", "ue_id": "a"},
            ],
            lss=("a",),
        ),
        until=20_000,
        check_invariants=True,
    )
    [trust] = security_ops(result, kind="TrustChange", ue_id="a")
    assert (trust.at, trust.body["outcome"], trust.body["state"]) == (
        12_100,
        "trusted:Local",
        "L",
    )


def test_emergency_call_needs_no_authentication_round_trip(settings):
    result = run(
        scenario(
            settings,
            [
                {"at": 10_000, "kind": "LinkQuality", "loss_rate": 0.5},
                {"at": 15_000, "kind": "UeAttach", "ue_id": "a", "credential": "cred-a"},
                {"at": 15_000, "kind": "UeAccessRequest", "ue_id": "a", "service": "EmergencyCall"},
            ],
            weak_drop_probability=0.0,
            weak_high_priority_drop_probability=0.0,
        ),
        until=20_000,
        check_invariants=True,
    )
    [decision] = security_ops(result, kind="AccessDecision", ue_id="a")
    assert (decision.at, decision.body["state"], decision.body["reason"]) == (
        15_000,
        "W",
        "no_auth_required",
    )
    assert decision.body["served"] is True
    assert result.tz.zm.devices["a"].trust is Trust.UNTRUSTED
    assert not [e for e in result.trace if e.body.get("payload") == "CentralAuthRequest"]


def test_emergency_call_during_disconnecting_is_not_deferred(settings):
    result = run(
        scenario(
            settings,
            [
                {"at": 10_000, "kind": "LinkQuality", "reachable": False},
                {"at": 12_050, "kind": "UeAttach", "ue_id": "a", "credential": "cred-a"},
                {"at": 12_050, "kind": "UeAccessRequest", "ue_id": "a", "service": "EmergencyCall"},
            ],
            lss=("a",),
        ),
        until=20_000,
        check_invariants=True,
    )
    [decision] = security_ops(result, kind="AccessDecision", ue_id="a")
    assert (decision.at, decision.body["state"], decision.body["served"]) == (12_050, "D", True)
    assert security_ops(result, kind="TrustChange", ue_id="a") == []


# --- repeated disconnection ---


def test_new_disconnection_cancels_pending_reauth(make_document, settings):
    document = make_document(
        extra_events=[{"at": 61_500, "kind": "LinkQuality", "reachable": False}],
        config={"seed": 42, "reauth_stagger_ms": 2000},
    )
    result = run(load_scenario(document, settings=settings), until=90_000, check_invariants=True)

    assert result.tz.zm.state is L
    [disconnect] = [t for t in result.tz.zm.transitions if t.at > 61_100 and t.to_state is D]
    assert disconnect.at == 64_000

    # u4 went at 63 000 while still in C; the rest of the schedule is void in L
    forced = security_ops(result, kind="ForcedDisconnect")
    assert [(e.at, e.body["ue_id"]) for e in forced if e.at > 61_000] == [(63_000, "u4")]
    cancelled = [e for e in result.trace if e.body.get("type") == "reauth_cancelled"]
    assert [(e.at, e.body["ue_id"], e.body["state"]) for e in cancelled] == [
        (65_000, "u1", "L"),
        (67_000, "u2", "L"),
        (69_000, "u3", "L"),
    ]
    for ue_id in ("u1", "u2", "u3"):
        device = result.tz.zm.devices[ue_id]
        assert (device.trust, device.auth_origin) == (Trust.TRUSTED, AuthOrigin.CENTRAL)
