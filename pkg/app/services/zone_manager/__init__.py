from .orchestrator import LaaInactive, NotTrusted, UnknownUe, ZoneManager
from .reauth import build_reauth_schedule

__all__ = [
    "LaaInactive",
    "NotTrusted",
    "UnknownUe",
    "ZoneManager",
    "build_reauth_schedule",
]
