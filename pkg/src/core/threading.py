"""
Thread helpers for stream serving, collection and the robot bridge.

Provides a cooperative cancellation token and a background worker thread that
runs one callable and records exactly one terminal outcome (result, error or
cancellation) for the thread that started it.
"""

from __future__ import annotations

import logging
import threading
from collections.abc import Callable
from typing import Generic, TypeVar

from .errors import BaseAppError, CancellationError, from_exception

logger = logging.getLogger(__name__)

T = TypeVar("T")


class CancellationToken:
    """
    Simple cancellation token for cooperative cancellation.

    Long-running loops (replay servers, collectors, bridges) check the token
    between units of work and stop gracefully once it is set.
    """

    def __init__(self) -> None:
        """Initialize the cancellation token."""
        self._cancelled = threading.Event()

    def cancel(self) -> None:
        """Request cancellation of the operation."""
        self._cancelled.set()

    def is_cancelled(self) -> bool:
        """Check if cancellation has been requested."""
        return self._cancelled.is_set()

    def wait(self, timeout: float) -> bool:
        """Sleep up to ``timeout`` seconds, waking early on cancellation; returns the cancelled flag."""
        return self._cancelled.wait(timeout)

    def check_cancelled(self) -> None:
        """
        Check if cancelled and raise an exception if so.

        Raises:
            CancellationError: If cancellation has been requested
        """
        if self.is_cancelled():
            raise CancellationError("Operation was cancelled")


class BackgroundWorker(threading.Thread, Generic[T]):
    """
    Daemon thread running ``target(token)`` once.

    The outcome is available after ``join()``: ``result`` on success,
    ``error`` (normalized to BaseAppError) on failure, ``cancelled`` when the
    token fired. ``outcome()`` re-raises the captured error in the caller's thread.
    """

    def __init__(self, target: Callable[[CancellationToken], T], *, name: str = "BackgroundWorker") -> None:
        super().__init__(name=name, daemon=True)
        self._target_fn = target
        self.token = CancellationToken()
        self.result: T | None = None
        self.error: BaseAppError | None = None
        self.cancelled = False

    def cancel(self) -> None:
        """Request cancellation; thread-safe."""
        logger.info(f"Cancellation requested for {self.name}")
        self.token.cancel()

    def run(self) -> None:
        try:
            self.result = self._target_fn(self.token)
        except CancellationError:
            self.cancelled = True
            logger.info(f"{self.name} cancelled")
        except Exception as e:
            self.error = from_exception(e, {"thread": self.name})
            logger.error(f"{self.name} failed: {self.error.user_message}")
        else:
            self.cancelled = self.token.is_cancelled()

    def outcome(self, timeout: float | None = None) -> T | None:
        """
        Join the thread and return its result.

        Raises:
            BaseAppError: The error captured in the worker thread
            TimeoutError: If the thread is still running after ``timeout``
        """
        self.join(timeout)
        if self.is_alive():
            raise TimeoutError(f"{self.name} did not finish within {timeout} s")
        if self.error is not None:
            raise self.error
        return self.result
