from typing import Collection, Iterable

from app.schemas.emergency import (
    DisasterEvent,
    EmergencyService,
    PolicyDecision,
    PolicyVerdict,
    ServiceClass,
)
from app.schemas.state import TzState
from app.schemas.zone import Trust

_CENTRAL_STATES = (TzState.C, TzState.W, TzState.R)


def decide_policy(
    service: EmergencyService,
    tz_state: TzState,
    trust: Trust,
    active_disasters: Collection[DisasterEvent],
) -> PolicyDecision:
    """Security policy for one emergency service in the current situation."""
    name = service.name

    if service.service_class is ServiceClass.ALWAYS_NO_AUTH:
        return PolicyDecision(service=name, verdict=PolicyVerdict.ALLOW, requires_auth=False)

    if service.service_class is ServiceClass.DISASTER_SPECIFIC:
        if active_disasters:
            return PolicyDecision(
                service=name, verdict=PolicyVerdict.ALLOW, requires_auth=False
            )
        return PolicyDecision(
            service=name, verdict=PolicyVerdict.INACTIVE, requires_auth=False
        )

    # AlwaysWithPolicy
    if tz_state in _CENTRAL_STATES:
        return PolicyDecision(service=name, verdict=PolicyVerdict.ALLOW, requires_auth=True)
    if trust is Trust.TRUSTED:
        return PolicyDecision(service=name, verdict=PolicyVerdict.ALLOW, requires_auth=True)
    return PolicyDecision(
        service=name, verdict=PolicyVerdict.ALLOW_RESTRICTED, requires_auth=False
    )


def available_services(
    catalog: Iterable[EmergencyService],
    tz_state: TzState,
    trust: Trust,
    active_disasters: Collection[DisasterEvent],
) -> dict[str, PolicyDecision]:
    return {
        service.name: decide_policy(service, tz_state, trust, active_disasters)
        for service in catalog
    }
