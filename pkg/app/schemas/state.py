from enum import StrEnum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class Character(StrEnum):
    STEADY = "Steady"
    TRANSIENT = "Transient"


class TzState(StrEnum):
    """Trust Zone state, driven by the quality of the edge-to-central connection."""

    C = "C"  # Connected
    W = "W"  # Weakly connected
    L = "L"  # Lost connection
    R = "R"  # Reconnecting
    D = "D"  # Disconnecting

    @property
    def character(self) -> Character:
        if self in (TzState.R, TzState.D):
            return Character.TRANSIENT
        return Character.STEADY

    @property
    def is_steady(self) -> bool:
        return self.character is Character.STEADY


class Ec4Class(StrEnum):
    HEALTHY = "Healthy"
    WEAK = "Weak"
    LOST = "Lost"

    @property
    def rank(self) -> int:
        return _EC4_RANK[self]

    def __lt__(self, other):
        if isinstance(other, Ec4Class):
            return self.rank < other.rank
        return NotImplemented

    def __le__(self, other):
        if isinstance(other, Ec4Class):
            return self.rank <= other.rank
        return NotImplemented

    def __gt__(self, other):
        if isinstance(other, Ec4Class):
            return self.rank > other.rank
        return NotImplemented

    def __ge__(self, other):
        if isinstance(other, Ec4Class):
            return self.rank >= other.rank
        return NotImplemented


_EC4_RANK = {Ec4Class.LOST: 0, Ec4Class.WEAK: 1, Ec4Class.HEALTHY: 2}

TransientResolution = Literal["transient_resolution"]
TRANSIENT_RESOLUTION: TransientResolution = "transient_resolution"


class TransitionRecord(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    from_state: TzState = Field(..., alias="from")
    to_state: TzState = Field(..., alias="to")
    at: int = Field(..., ge=0)
    cause: Ec4Class | TransientResolution
