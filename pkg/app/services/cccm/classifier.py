from statistics import fmean
from typing import Sequence

from pydantic import BaseModel, ConfigDict

from app.schemas.cccm import Ec4Sample
from app.schemas.scenario import SimulationConfig
from app.schemas.state import Ec4Class
from app.utils.errors import TrustZoneError


class EmptyWindow(TrustZoneError):
    """Raised when classification is requested on an empty window."""

    pass


class Thresholds(BaseModel):
    model_config = ConfigDict(frozen=True)

    weak_loss: float = 0.10
    weak_latency_ms: float = 500.0
    weak_throughput: float = 0.25

    @classmethod
    def from_config(cls, config: SimulationConfig) -> "Thresholds":
        return cls(
            weak_loss=config.weak_loss_threshold,
            weak_latency_ms=config.weak_latency_threshold_ms,
            weak_throughput=config.weak_throughput_threshold,
        )


def merge_samples(first: Ec4Sample, second: Ec4Sample) -> Ec4Sample:
    """Pessimistic merge of two probe readings: the worse one wins field by field."""
    at = max(first.at, second.at)
    if not first.reachable or not second.reachable:
        return Ec4Sample.unreachable(at)
    return Ec4Sample(
        at=at,
        reachable=True,
        latency=max(first.latency, second.latency),
        loss_rate=max(first.loss_rate, second.loss_rate),
        throughput=min(first.throughput, second.throughput),
    )


def classify_ec4(window: Sequence[Ec4Sample], thresholds: Thresholds) -> Ec4Class:
    """
    Classifies a window of samples.

    Lost only when every sample is unreachable. Otherwise the means are taken
    over the reachable samples and any one threshold breach makes it Weak.
    """
    if not window:
        raise EmptyWindow("cannot classify an empty window")

    reachable = [s for s in window if s.reachable]
    if not reachable:
        return Ec4Class.LOST

    mean_loss = fmean(s.loss_rate for s in reachable)
    mean_latency = fmean(s.latency for s in reachable)
    mean_throughput = fmean(s.throughput for s in reachable)
    if (
        mean_loss > thresholds.weak_loss
        or mean_latency > thresholds.weak_latency_ms
        or mean_throughput < thresholds.weak_throughput
    ):
        return Ec4Class.WEAK
    return Ec4Class.HEALTHY
