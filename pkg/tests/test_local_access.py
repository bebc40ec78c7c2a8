import hashlib
import random
import struct

import pytest
from pydantic import ValidationError

from app.schemas.local_access import AsKeyToken, LaaActivation, SubscriberProfile
from app.schemas.messages import Entity
from app.schemas.state import TzState
from app.schemas.zone import Trust
from app.services.local_access import (
    LocalAccessAssistant,
    LocalSubscriberServer,
    NotActive,
    ScopeViolation,
    UnknownSubscriber,
    activation_for,
    credential_digest,
    derive_token,
)
from app.utils.errors import NoConnectivity, TrustZoneError


def profile(ue_id: str, counter: int = 0, version: int = 1) -> SubscriberProfile:
    return SubscriberProfile(
        subscriber_id=ue_id,
        credential_digest=credential_digest(f"cred-{ue_id}"),
        sync_version=version,
        key_counter=counter,
    )


@pytest.fixture
def reports(bus):
    received = []
    bus.register(Entity.SA, received.append)
    bus.register(Entity.ZM, received.append)
    return received


@pytest.fixture
def laa(loop, bus, trace, reports):
    lss = LocalSubscriberServer([profile("u1"), profile("u2", counter=7)])
    assistant = LocalAccessAssistant(loop, bus, trace, lss)
    bus.register(Entity.LAA, assistant.handle)
    return assistant


def test_kdf_matches_independent_oracle():
    rng = random.Random(913)
    for _ in range(100):
        digest = rng.randbytes(32)
        counter = rng.randrange(2**40)
        expected = hashlib.sha256(digest + struct.pack(">Q", counter)).digest()
        assert derive_token(digest, counter) == expected


@pytest.mark.parametrize(
    "state,expected",
    [
        (TzState.R, LaaActivation.DEACTIVATED),
        (TzState.C, LaaActivation.INACTIVE),
        (TzState.W, LaaActivation.INACTIVE),
        (TzState.D, LaaActivation.ACTIVATED),
        (TzState.L, LaaActivation.ACTIVE),
    ],
)
def test_activation_follows_tz_state(laa, state, expected):
    assert activation_for(state) is expected
    assert laa.set_activation(state) is expected


def test_local_authenticate_against_lss(laa):
    laa.set_activation(TzState.L)
    assert laa.local_authenticate("u1", b"cred-u1") is Trust.TRUSTED
    assert laa.local_authenticate("u1", b"cred-u2") is Trust.UNTRUSTED
    assert laa.local_authenticate("x1", b"cred-x1") is Trust.UNTRUSTED


@pytest.mark.parametrize("state", [TzState.C, TzState.W, TzState.R])
def test_local_operations_refused_when_not_working(laa, state):
    laa.set_activation(state)
    with pytest.raises(NotActive):
        laa.local_authenticate("u1", b"cred-u1")
    with pytest.raises(NotActive):
        laa.derive_as_key("u1")


def test_every_operation_is_reported_to_sa(laa, loop, reports):
    laa.set_activation(TzState.L)
    laa.local_authenticate("u1", b"cred-u1")
    laa.derive_as_key("u1")
    loop.run(10)
    assert [(r.interface, r.payload.operation, r.payload.outcome) for r in reports] == [
        ("La-Sa", "LocalAuthenticate", "trusted"),
        ("La-Sa", "KeyDerivation", "counter:0"),
    ]


def test_derived_key_advances_counter(laa):
    laa.set_activation(TzState.L)
    first = laa.derive_as_key("u2")
    second = laa.derive_as_key("u2")
    assert (first.counter, second.counter) == (7, 8)
    assert first.scope == "AS"
    assert first.token == derive_token(credential_digest("cred-u2"), 7)
    assert laa.lss.get("u2").key_counter == 9


def test_non_as_scope_is_refused(laa):
    laa.set_activation(TzState.L)
    with pytest.raises(ScopeViolation):
        laa.derive_as_key("u1", scope="NAS")
    assert laa.lss.get("u1").key_counter == 0


def test_nas_token_cannot_be_constructed():
    with pytest.raises(ValidationError):
        AsKeyToken(ue_id="u1", scope="NAS", counter=0, token=b"\x00")


def test_unknown_subscriber_gets_no_key(laa):
    laa.set_activation(TzState.D)
    with pytest.raises(UnknownSubscriber):
        laa.derive_as_key("x1")


def test_reconnection_forgets_issued_keys(laa):
    laa.set_activation(TzState.L)
    laa.derive_as_key("u1")
    assert set(laa.issued_tokens) == {"u1"}
    laa.set_activation(TzState.W)
    assert set(laa.issued_tokens) == {"u1"}
    laa.set_activation(TzState.R)
    assert laa.issued_tokens == {}


def test_random_call_sequences_only_yield_as_tokens(laa):
    rng = random.Random(4711)
    states = list(TzState)
    ue_ids = ["u1", "u2", "x1"]
    tokens = []
    for _ in range(100_000):
        op = rng.randrange(4)
        try:
            if op == 0:
                laa.set_activation(rng.choice(states))
            elif op == 1:
                laa.local_authenticate(rng.choice(ue_ids), rng.randbytes(4))
            elif op == 2:
                tokens.append(
                    laa.derive_as_key(rng.choice(ue_ids), rng.choice(["AS", "NAS", "NH"]))
                )
            else:
                laa.sync_profiles([profile("u1", version=rng.randrange(5))], 0)
        except TrustZoneError:
            pass
    assert tokens
    assert sum(1 for t in tokens if t.scope != "AS") == 0


# --- LSS sync ---


def test_sync_applies_newer_versions_and_max_merges_counters():
    lss = LocalSubscriberServer([profile("u1", counter=5, version=1), profile("u2", version=3)])
    report = lss.sync_profiles(
        [profile("u1", counter=2, version=2), profile("u2", version=3), profile("u3")],
        now=0,
        tz_state=TzState.C,
    )
    assert (report.applied, report.skipped) == (2, 1)
    assert lss.get("u1").sync_version == 2
    assert lss.get("u1").key_counter == 5
    assert [p.subscriber_id for p in lss.profiles()] == ["u1", "u2", "u3"]


@pytest.mark.parametrize("state", [TzState.L, TzState.D])
def test_sync_needs_connectivity(state):
    lss = LocalSubscriberServer([profile("u1")])
    with pytest.raises(NoConnectivity):
        lss.sync_profiles([profile("u1", version=9)], now=0, tz_state=state)
    assert lss.get("u1").sync_version == 1


def test_lss_is_synced_while_connected(canonical_run):
    syncs = [e for e in canonical_run.trace if e.body.get("type") == "lss_sync"]
    assert syncs
    assert all(not 10_000 <= e.at < 60_000 for e in syncs)
