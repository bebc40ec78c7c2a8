from .transitions import (
    TransientInput,
    advance,
    is_valid_transition,
    next_state,
    resolve_transient,
    settle,
    valid_transitions,
)

__all__ = [
    "TransientInput",
    "advance",
    "is_valid_transition",
    "next_state",
    "resolve_transient",
    "settle",
    "valid_transitions",
]
