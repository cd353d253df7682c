"""
Tests for the threading helpers.
"""

import time

import pytest

from core.errors import CancellationError, ErrorCode, ProtocolError
from core.threading import BackgroundWorker, CancellationToken


class TestCancellationToken:
    """Test the cooperative cancellation token."""

    def test_cancel(self):
        """Test that cancel flips the flag and check_cancelled raises."""
        token = CancellationToken()
        assert not token.is_cancelled()
        token.check_cancelled()
        token.cancel()
        assert token.is_cancelled()
        with pytest.raises(CancellationError):
            token.check_cancelled()

    def test_wait_wakes_on_cancel(self):
        """Test that wait returns early once cancelled."""
        token = CancellationToken()
        token.cancel()
        start = time.perf_counter()
        assert token.wait(5.0)
        assert time.perf_counter() - start < 1.0


class TestBackgroundWorker:
    """Test the single-outcome worker thread."""

    def test_result(self):
        """Test that the return value is available after the thread ends."""
        worker: BackgroundWorker[int] = BackgroundWorker(lambda token: 42, name="Answer")
        worker.start()
        assert worker.outcome(2.0) == 42
        assert worker.error is None
        assert not worker.cancelled

    def test_error_is_reraised_in_caller(self):
        """Test that an error raised in the thread surfaces from outcome()."""

        def fail(token: CancellationToken) -> None:
            raise ProtocolError(code=ErrorCode.SAMPLE_GAP, user_message="gap")

        worker: BackgroundWorker[None] = BackgroundWorker(fail)
        worker.start()
        with pytest.raises(ProtocolError):
            worker.outcome(2.0)

    def test_builtin_errors_are_normalized(self):
        """Test that a built-in exception is stored as an application error."""

        def fail(token: CancellationToken) -> None:
            raise ValueError("broken")

        worker: BackgroundWorker[None] = BackgroundWorker(fail)
        worker.start()
        worker.join(2.0)
        assert worker.error is not None
        assert worker.error.code == ErrorCode.INVALID_INPUT

    def test_cancellation(self):
        """Test that a cancelled loop ends with the cancelled flag set."""

        def loop(token: CancellationToken) -> None:
            while True:
                token.check_cancelled()
                token.wait(0.01)

        worker: BackgroundWorker[None] = BackgroundWorker(loop)
        worker.start()
        worker.cancel()
        assert worker.outcome(2.0) is None
        assert worker.cancelled

    def test_timeout(self):
        """Test that outcome() times out while the thread is still running."""
        worker: BackgroundWorker[None] = BackgroundWorker(lambda token: token.wait(5.0) and None)
        worker.start()
        with pytest.raises(TimeoutError):
            worker.outcome(0.05)
        worker.cancel()
        worker.join(2.0)
