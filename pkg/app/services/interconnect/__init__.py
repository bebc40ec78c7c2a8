from .bus import IllegalRoute, Interconnect, LinkView
from .routes import (
    ALLOWED_PAYLOADS,
    AUDIT_TRANSPORT,
    CENTRAL_CROSSING,
    ROUTES,
    connectivity_matrix,
    receiver_of,
)

__all__ = [
    "ALLOWED_PAYLOADS",
    "AUDIT_TRANSPORT",
    "CENTRAL_CROSSING",
    "IllegalRoute",
    "Interconnect",
    "LinkView",
    "ROUTES",
    "connectivity_matrix",
    "receiver_of",
]
