"""
Cooperative Cancellation.

Long-running searches accept an optional token and call ``check()`` inside
their loops; the runner arms the token with the configured timeout.
"""
import threading
import time
from typing import Optional

from homascend.core.errors import ResourceLimitExceeded


class CancellationToken:
    """Deadline plus an explicit cancel flag, safe to share across threads."""

    def __init__(self, timeout: Optional[float] = None):
        self._event = threading.Event()
        self._deadline = time.monotonic() + timeout if timeout else None

    def cancel(self) -> None:
        self._event.set()

    @property
    def cancelled(self) -> bool:
        if self._event.is_set():
            return True
        if self._deadline is not None and time.monotonic() > self._deadline:
            self._event.set()
            return True
        return False

    def check(self) -> None:
        """Raise ResourceLimitExceeded once the token is cancelled or expired."""
        if self.cancelled:
            raise ResourceLimitExceeded("resource bound exceeded (timeout or cancellation)")


def checkpoint(token: Optional[CancellationToken]) -> None:
    if token is not None:
        token.check()
