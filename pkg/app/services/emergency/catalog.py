from app.schemas.emergency import EmergencyService, ServiceClass

EMERGENCY_CALL = "EmergencyCall"
DISASTER_ALARM = "DisasterAlarm"
EVACUATION_GUIDANCE = "EvacuationGuidance"
POSITIONING = "Positioning"
SMS = "SMS"

# Positioning is classed with SMS.
DEFAULT_CATALOG: tuple[EmergencyService, ...] = (
    EmergencyService(name=DISASTER_ALARM, service_class=ServiceClass.DISASTER_SPECIFIC),
    EmergencyService(
        name=EVACUATION_GUIDANCE, service_class=ServiceClass.DISASTER_SPECIFIC
    ),
    EmergencyService(name=POSITIONING, service_class=ServiceClass.ALWAYS_WITH_POLICY),
    EmergencyService(name=EMERGENCY_CALL, service_class=ServiceClass.ALWAYS_NO_AUTH),
    EmergencyService(name=SMS, service_class=ServiceClass.ALWAYS_WITH_POLICY),
)

EMERGENCY_SERVICE_NAMES: frozenset[str] = frozenset(s.name for s in DEFAULT_CATALOG)


def get_service(name: str) -> EmergencyService | None:
    for service in DEFAULT_CATALOG:
        if service.name == name:
            return service
    return None
