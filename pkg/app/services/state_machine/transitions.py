from app.schemas.state import (
    TRANSIENT_RESOLUTION,
    Ec4Class,
    TransitionRecord,
    TzState,
)
from app.utils.errors import TrustZoneError


class TransientInput(TrustZoneError):
    """Raised when an EC4 classification is applied to R or D."""

    pass


C, W, L, R, D = TzState.C, TzState.W, TzState.L, TzState.R, TzState.D

_EDGES: frozenset[tuple[TzState, TzState]] = frozenset(
    {
        (C, W),
        (C, D),
        (W, D),
        (W, R),
        (D, L),
        (L, W),
        (R, C),
        # steady self-loops
        (C, C),
        (W, W),
        (L, L),
    }
)

_NEXT: dict[tuple[TzState, Ec4Class], TzState] = {
    (C, Ec4Class.HEALTHY): C,
    (C, Ec4Class.WEAK): W,
    (C, Ec4Class.LOST): D,
    (W, Ec4Class.HEALTHY): R,
    (W, Ec4Class.WEAK): W,
    (W, Ec4Class.LOST): D,
    # L -> R is not an edge: recovery from L always enters at W
    (L, Ec4Class.HEALTHY): W,
    (L, Ec4Class.WEAK): W,
    (L, Ec4Class.LOST): L,
}


def valid_transitions() -> frozenset[tuple[TzState, TzState]]:
    return _EDGES


def is_valid_transition(from_state: TzState, to_state: TzState) -> bool:
    return (from_state, to_state) in _EDGES


def next_state(current: TzState, ec4: Ec4Class) -> TzState:
    """Maps a steady state and a classification onto the next state."""
    if not current.is_steady:
        raise TransientInput(f"state {current} is transient; resolve it first")
    return _NEXT[(current, ec4)]


def resolve_transient(current: TzState) -> TzState:
    if current is R:
        return C
    if current is D:
        return L
    return current


def advance(current: TzState, ec4: Ec4Class, now: int) -> list[TransitionRecord]:
    """
    Applies one classification and returns the records it produces.

    Self-loops produce nothing. A record into a transient state is returned
    on its own; the transient is resolved by a later call to `settle`.
    """
    target = next_state(current, ec4)
    if target is current:
        return []
    return [TransitionRecord(from_state=current, to_state=target, at=now, cause=ec4)]


def settle(current: TzState, now: int) -> TransitionRecord | None:
    """Resolves a transient state after its dwell time."""
    target = resolve_transient(current)
    if target is current:
        return None
    return TransitionRecord(
        from_state=current, to_state=target, at=now, cause=TRANSIENT_RESOLUTION
    )
