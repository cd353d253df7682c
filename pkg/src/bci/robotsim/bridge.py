"""
Line-delimited JSON bridge so an external robot process can stand in for the simulator.

Request: ``{"object": "Apple", "placement": "Left" | null, "scenario": "BaseDemo"}``
Response: ``ActionResult.to_dict()`` or ``{"error": message}``; one JSON object per line.
"""

from __future__ import annotations

import json
import logging
import socket
import time
from typing import Any

from core.errors import BaseAppError, ErrorCode, ProtocolError, ValidationError
from core.threading import BackgroundWorker, CancellationToken

from ..stream.transport import Transport, accept, connect, open_server
from .executor import ActionRequest, ActionResult, Executor, Placement, Scenario
from .objects import RobotConfig

logger = logging.getLogger(__name__)


def parse_request(line: bytes, config: RobotConfig) -> ActionRequest:
    """
    Raises:
        ValidationError: For malformed JSON or unknown fields
    """
    try:
        data: dict[str, Any] = json.loads(line.decode("utf-8"))
        placement = data.get("placement")
        return ActionRequest(
            config.object_spec(str(data["object"])),
            Placement(placement) if placement is not None else None,
            Scenario(data.get("scenario", Scenario.BASE_DEMO.value)),
        )
    except BaseAppError:
        raise
    except (ValueError, KeyError, TypeError, AttributeError) as e:
        raise ValidationError(code=ErrorCode.INVALID_INPUT, user_message=f"Malformed robot request: {e}", field="request") from e


class _LineReader:
    def __init__(self, transport: Transport) -> None:
        self.transport = transport
        self._buffer = b""

    def readline(self, token: CancellationToken | None = None, timeout: float | None = None) -> bytes | None:
        """Next line without its newline; ``None`` at end of stream or cancellation."""
        deadline = None if timeout is None else time.monotonic() + timeout
        while b"\n" not in self._buffer:
            if token is not None and token.is_cancelled():
                return None
            if deadline is not None and time.monotonic() > deadline:
                raise ProtocolError(code=ErrorCode.TRANSPORT_FAILURE, user_message="Robot bridge timed out", retriable=True)
            data = self.transport.recv()
            if data is None:
                continue
            if data == b"":
                return None
            self._buffer += data
        line, _, self._buffer = self._buffer.partition(b"\n")
        return line


class RobotBridgeServer:
    """Serves one client at a time, forwarding each request to ``executor``."""

    def __init__(self, executor: Executor, config: RobotConfig | None = None, host: str = "127.0.0.1", port: int = 0) -> None:
        self.executor = executor
        self.config = config or RobotConfig()
        self._listener: socket.socket = open_server(host, port)
        self.port = int(self._listener.getsockname()[1])
        self.served = 0
        self._worker: BackgroundWorker[None] = BackgroundWorker(self._serve, name="RobotBridge")

    def start(self) -> RobotBridgeServer:
        self._worker.start()
        return self

    def stop(self, timeout: float = 2.0) -> None:
        self._worker.cancel()
        self._worker.join(timeout)
        self._listener.close()

    def _serve(self, token: CancellationToken) -> None:
        while not token.is_cancelled():
            try:
                transport = accept(self._listener, timeout=0.2)
            except ProtocolError:
                continue
            with transport:
                reader = _LineReader(transport)
                try:
                    while (line := reader.readline(token)) is not None:
                        transport.send(json.dumps(self._answer(line)).encode("utf-8") + b"\n")
                except ProtocolError as e:
                    logger.warning(f"Robot bridge client dropped: {e.user_message}")

    def _answer(self, line: bytes) -> dict[str, Any]:
        try:
            req = parse_request(line, self.config)
        except ValidationError as e:
            logger.warning(f"Rejected robot request: {e.user_message}")
            return {"error": e.user_message}
        self.served += 1
        return self.executor.execute(req).to_dict()


class RemoteExecutor:
    """Executor that forwards requests to a ``RobotBridgeServer``."""

    def __init__(self, host: str, port: int, timeout: float = 120.0) -> None:
        self._transport = connect(host, port)
        self._reader = _LineReader(self._transport)
        self.timeout = timeout

    def execute(self, req: ActionRequest) -> ActionResult:
        """
        Raises:
            ProtocolError: If the bridge closes, times out or answers with an error
        """
        self._transport.send(json.dumps(req.to_dict()).encode("utf-8") + b"\n")
        line = self._reader.readline(timeout=self.timeout)
        if line is None:
            raise ProtocolError(code=ErrorCode.TRANSPORT_FAILURE, user_message="Robot bridge closed the connection")
        try:
            data = json.loads(line.decode("utf-8"))
            if "error" in data:
                raise ProtocolError(code=ErrorCode.UNEXPECTED_FRAME, user_message=f"Robot bridge error: {data['error']}")
            return ActionResult.from_dict(data)
        except (ValueError, KeyError, TypeError) as e:
            raise ProtocolError(code=ErrorCode.MALFORMED_FRAME, user_message=f"Malformed robot response: {e}") from e

    def close(self) -> None:
        self._transport.close()
