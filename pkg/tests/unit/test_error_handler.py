"""
Tests for the error taxonomy and the ErrorHandler.

Tests cover:
- Exception normalization
- Exit codes per error category
- Logging bootstrap
- Unhandled-exception hooks
"""

import logging
import sys
import threading

import pytest

from core.error_handler import ErrorHandler, get_error_handler, init_logging
from core.errors import (
    BaseAppError,
    ConfigError,
    ErrorCode,
    ErrorType,
    FileError,
    NumericalError,
    PipelineError,
    ProtocolError,
    SystemError,
    ValidationError,
    map_exception,
)


class TestErrorHandlerSingleton:
    """Test the singleton pattern implementation."""

    def test_singleton_pattern(self):
        """Test that ErrorHandler follows singleton pattern."""
        assert ErrorHandler() is ErrorHandler()
        assert get_error_handler() is ErrorHandler()


class TestMapException:
    """Test normalization of built-in exceptions."""

    @pytest.mark.parametrize(
        ("exc", "error_type", "code"),
        [
            (FileNotFoundError("x"), ErrorType.FILE, ErrorCode.FILE_NOT_FOUND),
            (PermissionError("x"), ErrorType.FILE, ErrorCode.PERMISSION_DENIED),
            (ConnectionResetError("x"), ErrorType.FILE, ErrorCode.OS_ERROR),
            (ValueError("x"), ErrorType.VALIDATION, ErrorCode.INVALID_INPUT),
            (TimeoutError("x"), ErrorType.SYSTEM, ErrorCode.TIMEOUT),
            (MemoryError(), ErrorType.SYSTEM, ErrorCode.MEMORY_ERROR),
        ],
    )
    def test_known_exceptions(self, exc, error_type, code):
        """Test that known exception types map to their category and code."""
        app_error = map_exception(exc)
        assert app_error.type == error_type
        assert app_error.code == code

    def test_app_errors_pass_through(self):
        """Test that an application error is returned unchanged."""
        error = ProtocolError(code=ErrorCode.SAMPLE_GAP, user_message="gap")
        assert map_exception(error) is error

    def test_unknown_exception(self):
        """Test that unknown exceptions become generic system errors."""
        app_error = map_exception(KeyError("k"))
        assert isinstance(app_error, SystemError)
        assert app_error.code == ErrorCode.UNKNOWN


class TestExitCodes:
    """Test the exit code of each error category."""

    @pytest.mark.parametrize(
        ("error", "exit_code"),
        [
            (ConfigError(code=ErrorCode.CONFIG_INVALID, user_message="c"), 2),
            (ValidationError(code=ErrorCode.INVALID_INPUT, user_message="v"), 2),
            (FileError(code=ErrorCode.BAD_MAGIC, user_message="f"), 3),
            (ProtocolError(code=ErrorCode.MALFORMED_FRAME, user_message="p"), 4),
            (NumericalError(code=ErrorCode.NAN_LOSS, user_message="n"), 5),
            (PipelineError(code=ErrorCode.TRIAL_ABORTED, user_message="t"), 6),
            (SystemError(code=ErrorCode.UNKNOWN, user_message="s"), 1),
        ],
    )
    def test_exit_code_for(self, error, exit_code):
        """Test that each category maps to its distinct exit code."""
        assert get_error_handler().exit_code_for(error) == exit_code


class TestHandle:
    """Test capture, logging and user messages."""

    def test_capture_adds_context_and_traceback(self):
        """Test that captured errors carry the context and a traceback."""
        app_error = get_error_handler().capture(ValueError("bad"), {"command": "synth"})
        assert isinstance(app_error, BaseAppError)
        assert app_error.context["command"] == "synth"
        assert "traceback" in app_error.context
        assert "ValueError: bad" in app_error.technical_message

    def test_user_message_names_path(self):
        """Test that the config path is appended when the message lacks it."""
        error = ConfigError(code=ErrorCode.CONFIG_INVALID, user_message="Value too large", path="synth.separability")
        assert get_error_handler().to_user_message(error) == "Value too large (at synth.separability)"

    def test_handle_returns_normalized_error(self):
        """Test that handle normalizes and returns the error."""
        app_error = get_error_handler().handle(FileNotFoundError("missing.eegr"))
        assert app_error.code == ErrorCode.FILE_NOT_FOUND

    def test_handle_reraises_keyboard_interrupt(self):
        """Test that interrupts are never swallowed."""
        with pytest.raises(KeyboardInterrupt):
            get_error_handler().handle(KeyboardInterrupt())  # type: ignore[arg-type]


class TestInitLogging:
    """Test the logging bootstrap."""

    def test_log_file_receives_records(self, tmp_path):
        """Test that a requested log file receives log records."""
        log_file = tmp_path / "logs" / "run.log"
        init_logging("DEBUG", log_file)
        logging.getLogger("bci.test").info("hello from the test")
        for handler in logging.getLogger().handlers:
            handler.flush()
        assert "hello from the test" in log_file.read_text(encoding="utf-8")
        init_logging("INFO")


def _broken_worker() -> None:
    raise ValueError("worker broke")


class TestHooks:
    """Test the unhandled-exception hooks."""

    def test_install_and_restore(self):
        """Test that hooks are installed and the originals restored."""
        original_sys, original_thread = sys.excepthook, threading.excepthook
        handler = get_error_handler()
        handler.install_hooks()
        try:
            assert sys.excepthook is not original_sys
            assert threading.excepthook is not original_thread
        finally:
            handler.restore_hooks()
        assert sys.excepthook is original_sys
        assert threading.excepthook is original_thread

    def test_worker_thread_errors_are_logged(self, caplog):
        """Test that an uncaught error in a thread goes through the handler."""
        handler = get_error_handler()
        handler.install_hooks()
        try:
            with caplog.at_level(logging.ERROR, logger="imagery_bci.errors"):
                logging.getLogger("imagery_bci.errors").propagate = True
                worker = threading.Thread(target=_broken_worker)
                worker.start()
                worker.join()
        finally:
            logging.getLogger("imagery_bci.errors").propagate = False
            handler.restore_hooks()
        assert "worker broke" in caplog.text
