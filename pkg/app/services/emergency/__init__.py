from .catalog import (
    DEFAULT_CATALOG,
    EMERGENCY_CALL,
    EMERGENCY_SERVICE_NAMES,
    get_service,
)
from .policy import available_services, decide_policy
from .service import EmergencyServices

__all__ = [
    "DEFAULT_CATALOG",
    "EMERGENCY_CALL",
    "EMERGENCY_SERVICE_NAMES",
    "EmergencyServices",
    "available_services",
    "decide_policy",
    "get_service",
]
