import logging
from typing import Iterable

from app.schemas.local_access import SubscriberProfile, SyncReport
from app.schemas.state import TzState
from app.utils.errors import NoConnectivity


class LocalSubscriberServer:
    """Edge copy of the subscriber database; the central cloud is authoritative."""

    def __init__(self, profiles: Iterable[SubscriberProfile] = ()):
        self._profiles: dict[str, SubscriberProfile] = {
            p.subscriber_id: p for p in profiles
        }

    def get(self, subscriber_id: str) -> SubscriberProfile | None:
        return self._profiles.get(subscriber_id)

    def profiles(self) -> list[SubscriberProfile]:
        return [self._profiles[k] for k in sorted(self._profiles)]

    def bump_counter(self, subscriber_id: str) -> SubscriberProfile:
        profile = self._profiles[subscriber_id]
        updated = profile.model_copy(update={"key_counter": profile.key_counter + 1})
        self._profiles[subscriber_id] = updated
        return updated

    def sync_profiles(
        self,
        central_snapshot: Iterable[SubscriberProfile],
        now: int,
        tz_state: TzState,
    ) -> SyncReport:
        """
        Applies a central snapshot as one batch. Newer central versions replace
        the local copy; key counters are max-merged so they never rewind.
        """
        if tz_state in (TzState.L, TzState.D):
            raise NoConnectivity(f"cannot sync subscriber profiles in state {tz_state}")

        staged = dict(self._profiles)
        applied = skipped = 0
        for central in sorted(central_snapshot, key=lambda p: p.subscriber_id):
            local = staged.get(central.subscriber_id)
            if local is not None and central.sync_version <= local.sync_version:
                skipped += 1
                continue
            counter = central.key_counter
            if local is not None:
                counter = max(counter, local.key_counter)
            staged[central.subscriber_id] = central.model_copy(
                update={"key_counter": counter}
            )
            applied += 1

        self._profiles = staged
        logging.debug(f"LSS sync at {now} ms: applied={applied} skipped={skipped}")
        return SyncReport(applied=applied, skipped=skipped)
