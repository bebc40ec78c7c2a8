from typing import Iterable, Sequence

from app.schemas.cccm import (
    Diagnosis,
    Ec4Sample,
    FunctionClass,
    Hypothesis,
    Priority,
    PriorityHint,
)
from app.schemas.emergency import DisasterEvent
from app.schemas.state import TzState
from app.utils.errors import WrongState

_PRIORITISED = (
    FunctionClass.AUTHENTICATION,
    FunctionClass.AUTHORIZATION,
    FunctionClass.SUBSCRIBER_SYNC,
)


def diagnose(
    window: Sequence[Ec4Sample],
    active_disasters: Iterable[DisasterEvent],
    state: TzState,
    abrupt_cut: bool,
    now: int,
) -> Diagnosis:
    """
    Explains a degraded EC4. Rule order: Disaster, Congestion, Attack, Unknown.
    """
    if state not in (TzState.W, TzState.L):
        raise WrongState(f"diagnosis is only produced in W or L, not {state}")

    disasters = sorted(active_disasters, key=lambda d: d.event_id)
    if disasters:
        return Diagnosis(
            at=now,
            hypothesis=Hypothesis.DISASTER,
            evidence=[f"disaster:{d.event_id}:{d.kind}" for d in disasters],
        )

    lossy = [s for s in window if s.reachable and s.loss_rate > 0]
    if lossy:
        worst = max(s.loss_rate for s in lossy)
        return Diagnosis(
            at=now,
            hypothesis=Hypothesis.CONGESTION,
            evidence=[f"loss:{worst:.3f}", f"lossy_samples:{len(lossy)}"],
        )

    if abrupt_cut:
        return Diagnosis(at=now, hypothesis=Hypothesis.ATTACK, evidence=["abrupt_cut"])

    return Diagnosis(at=now, hypothesis=Hypothesis.UNKNOWN, evidence=[])


def priority_hints(state: TzState) -> list[PriorityHint]:
    """In W the AAA and subscriber sync functions get network resources first."""
    hints = [
        PriorityHint(
            function_class=fc,
            priority=Priority.HIGH if state is TzState.W else Priority.NORMAL,
        )
        for fc in _PRIORITISED
    ]
    hints.append(PriorityHint(function_class=FunctionClass.OTHER, priority=Priority.NORMAL))
    return hints
