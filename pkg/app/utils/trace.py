import json
from typing import Any, Iterable, Iterator

from app.schemas.trace import TraceCategory, TraceEvent
from app.utils.errors import TrustZoneError
from app.utils.sanitize import dumps_line, sanitize_json


class TraceFormatError(TrustZoneError):
    """Raised when a trace file cannot be parsed; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class TraceRecorder:
    """Collects trace events in emission order, assigning gapless sequence numbers."""

    def __init__(self):
        self.events: list[TraceEvent] = []

    def emit(self, at: int, category: TraceCategory, body: dict[str, Any]) -> TraceEvent:
        event = TraceEvent(
            at=at, seq=len(self.events), category=category, body=sanitize_json(body)
        )
        self.events.append(event)
        return event

    @property
    def last_seq(self) -> int:
        return len(self.events) - 1

    def lines(self) -> Iterator[str]:
        for event in self.events:
            yield to_line(event)


def to_line(event: TraceEvent) -> str:
    # Field order is part of the file format
    return dumps_line(
        {
            "at": event.at,
            "seq": event.seq,
            "category": event.category.value,
            "body": event.body,
        }
    )


def write_trace(path: str, events: Iterable[TraceEvent]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for event in events:
            f.write(to_line(event))
            f.write("\n")


def parse_trace(lines: Iterable[str]) -> list[TraceEvent]:
    """Parses line-delimited trace records, checking that seq is gapless."""
    events: list[TraceEvent] = []
    first_line = 1
    for number, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            data = json.loads(raw)
            event = TraceEvent(**data)
        except (json.JSONDecodeError, TypeError, ValueError) as e:
            raise TraceFormatError(number, f"unparseable record: {e}") from e
        if event.seq != len(events):
            raise TraceFormatError(
                number, f"expected seq {len(events)} but found {event.seq}"
            )
        if not events:
            first_line = number
        events.append(event)
    if not events:
        raise TraceFormatError(1, "trace is empty")
    if events[0].body.get("type") != "run_start":
        raise TraceFormatError(first_line, "trace does not begin with a run_start record")
    if events[-1].body.get("type") != "run_end":
        raise TraceFormatError(len(events), "trace is truncated (no run_end record)")
    return events


def read_trace(path: str) -> list[TraceEvent]:
    with open(path, encoding="utf-8") as f:
        return parse_trace(f)
