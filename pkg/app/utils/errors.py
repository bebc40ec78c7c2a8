class TrustZoneError(Exception):
    """Base class for every error raised by the Trust Zone kernel."""

    pass


class WrongState(TrustZoneError):
    """Raised when an operation is invoked in a TZ state that does not allow it."""

    pass


class NoConnectivity(TrustZoneError):
    """Raised when an operation needs the EC4 but the central cloud is not reachable."""

    pass


class Unreachable(TrustZoneError):
    """Raised by central cloud oracles when the request could not cross the EC4."""

    pass


class InvariantViolation(TrustZoneError):
    """
    Raised by debug-checked runs when a protocol invariant is broken.
    This is a bug in the kernel, never a simulated outcome.
    """

    def __init__(self, name: str, seq: int, detail: str = ""):
        self.name = name
        self.seq = seq
        self.detail = detail
        super().__init__(f"invariant {name} violated at trace seq {seq}: {detail}")
