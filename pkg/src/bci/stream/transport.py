"""
Byte-stream transports: an in-process socket pair and plain TCP.

Reads use a short socket timeout so reader loops can poll a cancellation token.
"""

from __future__ import annotations

import logging
import socket

from core.errors import ErrorCode, ProtocolError

logger = logging.getLogger(__name__)

POLL_SECONDS = 0.2
RECV_BYTES = 1 << 16


class Transport:
    """A connected byte stream."""

    def __init__(self, sock: socket.socket, name: str = "transport") -> None:
        self._sock = sock
        self._sock.settimeout(POLL_SECONDS)
        self.name = name
        self.bytes_sent = 0
        self.bytes_received = 0

    def send(self, data: bytes) -> None:
        """
        Raises:
            ProtocolError: If the peer is gone or the write fails
        """
        try:
            self._sock.settimeout(None)
            self._sock.sendall(data)
        except OSError as e:
            raise ProtocolError(
                code=ErrorCode.TRANSPORT_FAILURE, user_message=f"Write to {self.name} failed: {e}", retriable=True
            ) from e
        finally:
            self._sock.settimeout(POLL_SECONDS)
        self.bytes_sent += len(data)

    def recv(self) -> bytes | None:
        """
        Next available bytes; ``None`` when nothing arrived within the poll
        interval, ``b""`` at end of stream.
        """
        try:
            data = self._sock.recv(RECV_BYTES)
        except TimeoutError:
            return None
        except OSError as e:
            raise ProtocolError(code=ErrorCode.TRANSPORT_FAILURE, user_message=f"Read from {self.name} failed: {e}") from e
        self.bytes_received += len(data)
        return data

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()

    def __enter__(self) -> Transport:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


class LoopbackTransport:
    """Connected in-process endpoints for tests and single-process runs."""

    @staticmethod
    def pair() -> tuple[Transport, Transport]:
        server, client = socket.socketpair()
        return Transport(server, "loopback-server"), Transport(client, "loopback-client")


def open_server(host: str, port: int) -> socket.socket:
    """Listening TCP socket; port 0 picks a free port."""
    listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        listener.bind((host, port))
    except OSError as e:
        listener.close()
        raise ProtocolError(
            code=ErrorCode.TRANSPORT_FAILURE, user_message=f"Cannot listen on {host}:{port}: {e}", context={"port": port}
        ) from e
    listener.listen(1)
    logger.info(f"Listening on {host}:{listener.getsockname()[1]}")
    return listener


def accept(listener: socket.socket, timeout: float | None = None) -> Transport:
    listener.settimeout(timeout)
    try:
        sock, peer = listener.accept()
    except OSError as e:
        raise ProtocolError(code=ErrorCode.TRANSPORT_FAILURE, user_message=f"No client connected: {e}", retriable=True) from e
    logger.info(f"Client connected from {peer[0]}:{peer[1]}")
    return Transport(sock, f"tcp:{peer[0]}:{peer[1]}")


def connect(host: str, port: int, timeout: float = 5.0) -> Transport:
    try:
        sock = socket.create_connection((host, port), timeout=timeout)
    except OSError as e:
        raise ProtocolError(
            code=ErrorCode.TRANSPORT_FAILURE, user_message=f"Cannot connect to {host}:{port}: {e}", retriable=True
        ) from e
    return Transport(sock, f"tcp:{host}:{port}")
