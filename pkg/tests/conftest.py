import copy
import json
import random

import pytest

from app.schemas.scenario import SimulationConfig
from app.services.interconnect import Interconnect
from app.services.sim_harness import LinkModel, load_scenario, run
from app.utils.config import Settings
from app.utils.kernel import EventLoop
from app.utils.trace import TraceRecorder

CANONICAL_UNTIL = 120_000


def _subscriber(ue_id: str) -> dict:
    return {"subscriber_id": ue_id, "credential": f"cred-{ue_id}"}


# Disconnection day: three UEs authenticated centrally before the EC4 is cut,
# a disaster, one LSS-known UE and two strangers arriving while the TZ is in L.
CANONICAL_SCENARIO = {
    "version": 1,
    "config": {"seed": 42},
    "subscribers": [_subscriber(u) for u in ("u1", "u2", "u3", "u4")],
    "lss": [_subscriber("u4")],
    "events": [
        {"at": 500, "kind": "UeAttach", "ue_id": "u1", "credential": "cred-u1"},
        {"at": 500, "kind": "UeAttach", "ue_id": "u2", "credential": "cred-u2"},
        {"at": 500, "kind": "UeAttach", "ue_id": "u3", "credential": "cred-u3"},
        {"at": 1000, "kind": "UeAccessRequest", "ue_id": "u1", "service": "Internet"},
        {"at": 1000, "kind": "UeAccessRequest", "ue_id": "u2", "service": "Internet"},
        {"at": 1000, "kind": "UeAccessRequest", "ue_id": "u3", "service": "Internet"},
        {"at": 10_000, "kind": "LinkQuality", "reachable": False},
        {"at": 12_000, "kind": "Disaster", "event_id": "d1", "disaster": "Earthquake"},
        {"at": 20_000, "kind": "UeAttach", "ue_id": "u4", "credential": "cred-u4"},
        {"at": 20_000, "kind": "UeAccessRequest", "ue_id": "u4", "service": "Internet"},
        {"at": 25_000, "kind": "UeAttach", "ue_id": "x1", "credential": "cred-x1"},
        {
            "at": 25_000,
            "kind": "UeAccessRequest",
            "ue_id": "x1",
            "service": "EmergencyCall",
        },
        {"at": 26_000, "kind": "UeAttach", "ue_id": "x2", "credential": "cred-x2"},
        {"at": 26_000, "kind": "UeAccessRequest", "ue_id": "x2", "service": "Internet"},
        {"at": 60_000, "kind": "LinkQuality", "reachable": True, "latency": 20},
    ],
}


@pytest.fixture(scope="session")
def settings() -> Settings:
    return Settings(_env_file=None)


@pytest.fixture(scope="session")
def make_document():
    """Renders the canonical scenario, optionally with extra or replacement parts."""

    def _make(extra_events=(), drop_kinds=(), **overrides) -> str:
        document = copy.deepcopy(CANONICAL_SCENARIO)
        document.update(overrides)
        document["events"] = [
            e for e in document["events"] if e["kind"] not in drop_kinds
        ] + list(extra_events)
        return json.dumps(document, indent=2)

    return _make


@pytest.fixture(scope="session")
def canonical_document(make_document) -> str:
    return make_document()


@pytest.fixture(scope="session")
def canonical_scenario(canonical_document, settings):
    return load_scenario(canonical_document, "canonical.json", settings)


@pytest.fixture(scope="session")
def canonical_run(canonical_scenario):
    return run(canonical_scenario, seed=42, until=CANONICAL_UNTIL, check_invariants=True)


@pytest.fixture(scope="session")
def ack_loss_run(make_document, settings):
    document = make_document(
        extra_events=[{"at": 30_000, "kind": "AuditAckLoss", "count": 1}]
    )
    scenario = load_scenario(document, "ack_loss.json", settings)
    return run(scenario, seed=42, until=CANONICAL_UNTIL, check_invariants=True)


# --- single-component fixtures ---


@pytest.fixture
def config() -> SimulationConfig:
    return SimulationConfig()


@pytest.fixture
def loop() -> EventLoop:
    return EventLoop()


@pytest.fixture
def trace() -> TraceRecorder:
    return TraceRecorder()


@pytest.fixture
def link(config) -> LinkModel:
    return LinkModel(config)


@pytest.fixture
def bus(loop, trace, config, link) -> Interconnect:
    return Interconnect(loop, trace, config, link, random.Random("test:interconnect"))
