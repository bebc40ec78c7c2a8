from typing import Iterable

from app.schemas.zone import (
    AuthOrigin,
    DeviceRecord,
    ReauthEntry,
    ReauthSchedule,
    Trust,
)


def _flush_order(device: DeviceRecord) -> tuple[int, str]:
    # locally authenticated devices are flushed first
    return (0 if device.auth_origin is AuthOrigin.LOCAL else 1, device.ue_id)


def build_reauth_schedule(
    devices: Iterable[DeviceRecord], now: int, stagger_ms: int
) -> ReauthSchedule:
    """Disconnect order for every attached trusted device, spaced by `stagger_ms`."""
    trusted = sorted(
        (d for d in devices if d.attached and d.trust is Trust.TRUSTED),
        key=_flush_order,
    )
    return ReauthSchedule(
        entries=tuple(
            ReauthEntry(
                ue_id=device.ue_id,
                disconnect_at=now + (i + 1) * stagger_ms,
                auth_origin=device.auth_origin,
            )
            for i, device in enumerate(trusted)
        )
    )
