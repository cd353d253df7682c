"""Framed EEG streaming: wire codec, replay server and task-window collector."""

from .client import CollectorStats, RingBuffer, StreamCollector, TaskWindow, client_collect
from .frames import Bye, Chunk, Frame, FrameDecoder, FrameKind, Hello, Trigger, decode_payload, encode_frame
from .server import ReplayStats, serve_replay, start_replay
from .settings import DEFAULT_PORT, ClockMode, StreamSettings
from .transport import LoopbackTransport, Transport, accept, connect, open_server

__all__ = [
    "DEFAULT_PORT",
    "Bye",
    "Chunk",
    "ClockMode",
    "CollectorStats",
    "Frame",
    "FrameDecoder",
    "FrameKind",
    "Hello",
    "LoopbackTransport",
    "ReplayStats",
    "RingBuffer",
    "StreamCollector",
    "StreamSettings",
    "TaskWindow",
    "Transport",
    "Trigger",
    "accept",
    "client_collect",
    "connect",
    "decode_payload",
    "encode_frame",
    "open_server",
    "serve_replay",
    "start_replay",
]
