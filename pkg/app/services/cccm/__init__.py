from .classifier import EmptyWindow, Thresholds, classify_ec4, merge_samples
from .diagnosis import diagnose, priority_hints
from .monitor import CentralCloudMonitor

__all__ = [
    "CentralCloudMonitor",
    "EmptyWindow",
    "Thresholds",
    "classify_ec4",
    "diagnose",
    "merge_samples",
    "priority_hints",
]
