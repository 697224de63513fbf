"""File-replay stand-in for a live sensor.

Frames are due at a fixed rate; a consumer that polls late misses the
frames that went by (latest wins), exactly as a physical sensor would
overwrite an unread buffer. Clock and sleep are injectable for tests.
"""

from __future__ import annotations

import time
from typing import Callable, Optional

from ..errors import ConfigError


class ReplaySensor:
    """Delivers frame indices 0..total-1 at up to ``hz`` frames/s."""

    def __init__(
        self,
        total: int,
        hz: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
        start: int = 0,
    ):
        if hz <= 0:
            raise ConfigError(f"replay rate must be positive, got {hz}")
        self.total = int(total)
        self.hz = float(hz)
        self._clock = clock
        self._sleep = sleep
        self._start: Optional[float] = None
        self._base = max(int(start), 0)
        self._next = self._base
        self.delivered = 0
        self.dropped = 0

    def poll(self) -> Optional[int]:
        """Next frame index, blocking until it is due; None when exhausted."""
        if self._next >= self.total:
            return None
        if self._start is None:
            self._start = self._clock()
        due_time = self._start + (self._next - self._base) / self.hz
        now = self._clock()
        if now < due_time:
            self._sleep(due_time - now)
            current = self._next
        else:
            # Late poll: frames that were due in the meantime are gone.
            latest_due = min(
                self._base + int((now - self._start) * self.hz), self.total - 1
            )
            self.dropped += max(latest_due - self._next, 0)
            current = max(latest_due, self._next)
        self._next = current + 1
        self.delivered += 1
        return current
