"""Static adjacency of the Trust Zone entities and the payloads each edge may carry."""

from app.schemas.messages import Entity, InterfaceName

I = InterfaceName
E = Entity

# (sender, interface) -> receiver
ROUTES: dict[tuple[Entity, InterfaceName], Entity] = {
    (E.CCCM, I.CM_MA): E.MANO,
    (E.MANO, I.CM_MA): E.CCCM,
    (E.CCCM, I.CM_ZM): E.ZM,
    (E.ZM, I.CM_ZM): E.CCCM,
    (E.ES, I.ES_CM): E.CCCM,
    (E.ZM, I.ES_ZM): E.ES,
    (E.IOT, I.IO_ES): E.ES,
    (E.LSS, I.LA_LS): E.LAA,
    (E.LAA, I.LA_SA): E.SA,
    (E.AMF, I.ME_ZM): E.ZM,
    (E.ZM, I.ME_ZM): E.AMF,
    (E.CCCM, I.OS_CM): E.OSS,
    (E.OSS, I.OS_CM): E.CCCM,
    (E.ZM, I.ZM_LA): E.LAA,
    (E.LAA, I.ZM_LA): E.ZM,
    (E.ZM, I.ZM_SA): E.SA,
    (E.ZM, I.ZM_UE): E.UE,
    (E.UE, I.ZM_UE): E.ZM,
}

# (sender, interface) -> payload kinds allowed in that direction
ALLOWED_PAYLOADS: dict[tuple[Entity, InterfaceName], frozenset[str]] = {
    (E.CCCM, I.CM_MA): frozenset({"ProbeRequest", "DiagnosisReport", "PriorityHints"}),
    (E.MANO, I.CM_MA): frozenset({"ProbeReading"}),
    (E.CCCM, I.CM_ZM): frozenset({"Ec4Report"}),
    (E.ZM, I.CM_ZM): frozenset({"StateChange"}),
    (E.ES, I.ES_CM): frozenset({"DisasterAlarm"}),
    (E.ZM, I.ES_ZM): frozenset({"StateChange"}),
    (E.IOT, I.IO_ES): frozenset({"DisasterAlarm"}),
    (E.LSS, I.LA_LS): frozenset({"ProfileSnapshot"}),
    (E.LAA, I.LA_SA): frozenset({"OperationReport"}),
    (E.AMF, I.ME_ZM): frozenset({"KeyToken", "CentralAuthResponse"}),
    (E.ZM, I.ME_ZM): frozenset({"KeyRequest", "CentralAuthRequest"}),
    (E.CCCM, I.OS_CM): frozenset({"ProbeRequest"}),
    (E.OSS, I.OS_CM): frozenset({"ProbeReading"}),
    (E.ZM, I.ZM_LA): frozenset({"StateChange", "LocalAuthRequest", "KeyRequest"}),
    (E.LAA, I.ZM_LA): frozenset({"KeyToken", "LocalAuthResult"}),
    (E.ZM, I.ZM_SA): frozenset({"StateChange", "OperationReport"}),
    (E.ZM, I.ZM_UE): frozenset(
        {"AccessResponse", "SecurityModeCommand", "ForcedDisconnect"}
    ),
    (E.UE, I.ZM_UE): frozenset({"Attach", "Detach", "AccessRequest"}),
}

# Interfaces whose far end sits in the central cloud
CENTRAL_CROSSING: frozenset[InterfaceName] = frozenset(
    {I.CM_MA, I.OS_CM, I.ME_ZM, I.LA_LS}
)

# Name used in the trace for the SA <-> central auditing center transport
AUDIT_TRANSPORT = "audit-transport"


def receiver_of(sender: Entity, interface: InterfaceName) -> Entity | None:
    return ROUTES.get((sender, interface))


def connectivity_matrix() -> frozenset[tuple[Entity, Entity, InterfaceName]]:
    return frozenset(
        (sender, receiver, interface)
        for (sender, interface), receiver in ROUTES.items()
    )
