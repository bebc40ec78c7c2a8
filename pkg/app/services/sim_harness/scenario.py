import json
import logging
from typing import Sequence

from pydantic import ValidationError

from app.schemas.local_access import SubscriberProfile
from app.schemas.scenario import (
    Scenario,
    ScenarioDocument,
    SimulationConfig,
    SubscriberEntry,
)
from app.services.local_access import credential_digest
from app.utils.config import Settings
from app.utils.errors import TrustZoneError


class ScenarioSchemaError(TrustZoneError):
    """Raised when a scenario document does not match the schema."""

    def __init__(self, diagnostics: list[str]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(diagnostics))


class ScenarioReferenceError(TrustZoneError):
    """Raised when a scenario refers to a UE or subscriber it never introduced."""

    pass


def to_profile(entry: SubscriberEntry) -> SubscriberProfile:
    return SubscriberProfile(
        subscriber_id=entry.subscriber_id,
        credential_digest=credential_digest(entry.credential),
        security_log_version=entry.security_log_version,
        sync_version=entry.sync_version,
        key_counter=entry.key_counter,
    )


def load_scenario(
    document: str, source: str = "<scenario>", settings: Settings | None = None
) -> Scenario:
    """Parses and validates a JSON scenario document."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as e:
        raise ScenarioSchemaError([f"{source}:{e.lineno}: invalid JSON: {e.msg}"]) from e

    try:
        parsed = ScenarioDocument.model_validate(data)
    except ValidationError as e:
        lines = document.splitlines()
        diagnostics = [
            f"{source}:{_locate(lines, err['loc'])}: "
            f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
            for err in e.errors()
        ]
        raise ScenarioSchemaError(diagnostics) from e

    _check_references(parsed)

    config = SimulationConfig.from_settings(
        settings or Settings(), parsed.config.overrides()
    )
    events = sorted(parsed.events, key=lambda event: event.at)
    scenario = Scenario(
        config=config,
        subscribers=tuple(to_profile(s) for s in parsed.subscribers),
        lss=tuple(to_profile(s) for s in parsed.lss),
        events=tuple(events),
    )
    logging.info(f"Loaded scenario {source}: {len(events)} events")
    return scenario


def load_scenario_file(path: str, settings: Settings | None = None) -> Scenario:
    with open(path, encoding="utf-8") as f:
        return load_scenario(f.read(), source=path, settings=settings)


def _check_references(document: ScenarioDocument) -> None:
    known = {s.subscriber_id for s in document.subscribers}
    for entry in document.lss:
        if entry.subscriber_id not in known:
            raise ScenarioReferenceError(
                f"lss entry {entry.subscriber_id} is not in the subscriber DB"
            )

    attached: set[str] = set()
    for event in sorted(document.events, key=lambda event: event.at):
        if event.kind == "UeAttach":
            attached.add(event.ue_id)
        elif event.kind in ("UeDetach", "UeAccessRequest") and event.ue_id not in attached:
            raise ScenarioReferenceError(
                f"{event.kind} at {event.at} ms refers to {event.ue_id} before any attach"
            )


def _locate(lines: Sequence[str], loc: Sequence[str | int]) -> int:
    """
    Best-effort 1-based line of a pydantic error location in the source text.
    Walks the location path, searching forward for each key.
    """
    cursor = 0
    path = list(loc)
    for i, part in enumerate(path):
        if isinstance(part, int):
            # the (part+1)-th occurrence of the next key below this list
            key = next((p for p in path[i + 1 :] if isinstance(p, str)), None)
            if key is None:
                continue
            found = _find(lines, f'"{key}"', cursor, part + 1)
        else:
            found = _find(lines, f'"{part}"', cursor, 1)
        if found is not None:
            cursor = found
    return cursor + 1


def _find(lines: Sequence[str], needle: str, start: int, occurrence: int) -> int | None:
    seen = 0
    for number in range(start, len(lines)):
        if needle in lines[number]:
            seen += 1
            if seen == occurrence:
                return number
    return None
