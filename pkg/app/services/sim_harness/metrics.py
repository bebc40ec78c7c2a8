from collections import Counter
from typing import Iterable

from app.schemas.state import TzState
from app.schemas.trace import RunMetrics, TraceCategory, TraceEvent
from app.services.emergency import EMERGENCY_CALL, EMERGENCY_SERVICE_NAMES

_LOCAL_STATES = (TzState.D.value, TzState.L.value)


def _security_ops(events: list[TraceEvent], kind: str | None = None) -> list[dict]:
    return [
        e.body
        for e in events
        if e.category is TraceCategory.DECISION
        and e.body.get("type") == "security_op"
        and (kind is None or e.body.get("kind") == kind)
    ]


def is_unauthorized_grant(body: dict) -> bool:
    """An access decision giving an untrusted device anything beyond emergency services."""
    if body.get("trust") != "Untrusted":
        return False
    if any(name not in EMERGENCY_SERVICE_NAMES for name in body.get("granted", [])):
        return True
    return bool(body.get("served")) and body.get("service") not in EMERGENCY_SERVICE_NAMES


def _audit_completeness(events: list[TraceEvent]) -> float:
    local_ops = [
        e
        for e in events
        if e.category is TraceCategory.DECISION
        and e.body.get("type") == "security_op"
        and e.body.get("state") in _LOCAL_STATES
    ]
    if not local_ops:
        return 1.0

    def key(at: int, body: dict) -> tuple:
        return (body["actor"], body["kind"], body["ue_id"], body["outcome"], at)

    audited = Counter(
        key(e.at, e.body)
        for e in events
        if e.category is TraceCategory.AUDIT and e.body.get("type") == "record"
    )
    matched = 0
    for op in local_ops:
        k = key(op.at, op.body)
        if audited[k] > 0:
            audited[k] -= 1
            matched += 1
    return matched / len(local_ops)


def _mean_time_in_state(events: list[TraceEvent]) -> dict[str, float]:
    start = next(e for e in events if e.body.get("type") == "run_start")
    end = next(e for e in reversed(events) if e.body.get("type") == "run_end")

    totals: dict[str, int] = {}
    visits: dict[str, int] = {}
    state, since = TzState.C.value, start.at
    visits[state] = 1
    for e in events:
        if e.category is not TraceCategory.TRANSITION:
            continue
        totals[state] = totals.get(state, 0) + e.at - since
        state, since = e.body["to"], e.at
        visits[state] = visits.get(state, 0) + 1
    totals[state] = totals.get(state, 0) + end.at - since
    return {s: totals.get(s, 0) / visits[s] for s in sorted(visits)}


def compute_metrics(trace: Iterable[TraceEvent]) -> RunMetrics:
    """Derives the run metrics from the trace alone."""
    events = list(trace)
    decisions = _security_ops(events, "AccessDecision")

    calls = [d for d in decisions if d.get("service") == EMERGENCY_CALL]
    vacuous = not calls
    availability = 1.0 if vacuous else sum(1 for d in calls if d.get("served")) / len(calls)

    return RunMetrics(
        emergency_call_availability=availability,
        vacuous_availability=vacuous,
        audit_completeness=_audit_completeness(events),
        unauthorized_grants=sum(1 for d in decisions if is_unauthorized_grant(d)),
        forced_reauths=len(_security_ops(events, "ForcedDisconnect")),
        local_auth_successes=sum(
            1
            for op in _security_ops(events, "LocalAuthenticate")
            if op.get("outcome") == "trusted"
        ),
        mean_time_in_state=_mean_time_in_state(events),
        dropped_envelopes=sum(1 for e in events if e.category is TraceCategory.DROP),
        transitions=sum(1 for e in events if e.category is TraceCategory.TRANSITION),
    )
