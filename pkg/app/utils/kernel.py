import heapq
import itertools
import logging
from enum import IntEnum
from typing import Any, Callable


class Phase(IntEnum):
    """Order of work scheduled for the same millisecond."""

    SCENARIO = 0
    DELIVERY = 1
    TIMER = 2
    TRANSIENT = 3
    POLL = 4
    SYNC = 5


class EventLoop:
    """
    Single-threaded discrete-event kernel.

    Time is integer milliseconds and only ever advances to the timestamp of
    the next scheduled item. Items at the same time run by phase, then in
    the order they were scheduled.
    """

    def __init__(self):
        self._queue: list[tuple[int, int, int, Callable[..., Any], tuple]] = []
        self._counter = itertools.count()
        self.now = 0

    def schedule(
        self, at: int, phase: Phase, callback: Callable[..., Any], *args: Any
    ) -> None:
        if at < self.now:
            raise ValueError(f"cannot schedule at {at}, clock already at {self.now}")
        heapq.heappush(self._queue, (at, int(phase), next(self._counter), callback, args))

    def run(self, until: int, after_step: Callable[[], None] | None = None) -> int:
        """Runs every item scheduled at or before `until`; returns the step count."""
        steps = 0
        while self._queue and self._queue[0][0] <= until:
            at, _, _, callback, args = heapq.heappop(self._queue)
            self.now = at
            callback(*args)
            steps += 1
            if after_step is not None:
                after_step()
        self.now = until
        logging.debug(f"Event loop stopped at {until} ms after {steps} steps")
        return steps
