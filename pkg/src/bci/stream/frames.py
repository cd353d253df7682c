"""
Stream wire format.

Every frame is ``u32-LE length | u8 kind | payload`` where ``length`` counts
the kind byte plus the payload. Payloads, all little-endian:

* Hello (1): UTF-8 JSON ``{"format_version", "sample_rate_hz", "channels"}``
* Chunk (2): ``u64 first_sample | u32 n_frames | f32 samples``, channel-major
* Trigger (3): ``u8 code | u64 sample_index | u8 has_label | u8 task | u8 value``
* Bye (4): ``u8 aborted``

``FrameDecoder`` accepts bytes split at arbitrary points. Any malformed input
raises ``ProtocolError`` and nothing else.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Union

import numpy as np

from core.container import FORMAT_VERSION, parse_channels
from core.errors import BaseAppError, ErrorCode, ProtocolError
from core.recording import ChannelInfo, ClassLabel, Task, TriggerCode, TriggerEvent

MAX_FRAME_BYTES = 64 * 1024 * 1024

_LENGTH = struct.Struct("<I")
_CHUNK_HEAD = struct.Struct("<QI")
_TRIGGER = struct.Struct("<BQBBB")
_BYE = struct.Struct("<B")
_TASKS = (Task.VI, Task.MI)


class FrameKind(IntEnum):
    HELLO = 1
    CHUNK = 2
    TRIGGER = 3
    BYE = 4


@dataclass(frozen=True)
class Hello:
    sample_rate_hz: float
    channels: tuple[ChannelInfo, ...]


@dataclass(frozen=True)
class Chunk:
    first_sample: int
    samples: np.ndarray

    @property
    def n_frames(self) -> int:
        return int(self.samples.shape[1])

    @property
    def stop(self) -> int:
        return self.first_sample + self.n_frames


@dataclass(frozen=True)
class Trigger:
    event: TriggerEvent


@dataclass(frozen=True)
class Bye:
    aborted: bool = False


Frame = Union[Hello, Chunk, Trigger, Bye]


def _frame(kind: FrameKind, payload: bytes) -> bytes:
    return _LENGTH.pack(len(payload) + 1) + bytes([kind]) + payload


def encode_frame(frame: Frame) -> bytes:
    """Serialize one frame, length prefix included."""
    if isinstance(frame, Hello):
        header: dict[str, Any] = {
            "format_version": FORMAT_VERSION,
            "sample_rate_hz": frame.sample_rate_hz,
            "channels": [{"name": ch.name, "role": ch.role.value, "index": ch.index} for ch in frame.channels],
        }
        return _frame(FrameKind.HELLO, json.dumps(header, sort_keys=True).encode("utf-8"))
    if isinstance(frame, Chunk):
        block = np.ascontiguousarray(frame.samples, dtype="<f4")
        return _frame(FrameKind.CHUNK, _CHUNK_HEAD.pack(frame.first_sample, frame.n_frames) + block.tobytes())
    if isinstance(frame, Trigger):
        ev = frame.event
        if ev.label is None:
            payload = _TRIGGER.pack(int(ev.code), ev.sample_index, 0, 0, 0)
        else:
            payload = _TRIGGER.pack(int(ev.code), ev.sample_index, 1, _TASKS.index(ev.label.task), ev.label.value)
        return _frame(FrameKind.TRIGGER, payload)
    return _frame(FrameKind.BYE, _BYE.pack(1 if frame.aborted else 0))


def _malformed(message: str, **context: Any) -> ProtocolError:
    return ProtocolError(code=ErrorCode.MALFORMED_FRAME, user_message=message, context=context)


def decode_payload(kind: int, payload: bytes) -> Frame:
    """
    Parse one frame body.

    Raises:
        ProtocolError: For unknown kinds and any payload that does not parse
    """
    try:
        if kind == FrameKind.HELLO:
            header = json.loads(payload.decode("utf-8"))
            if header.get("format_version") != FORMAT_VERSION:
                raise ProtocolError(
                    code=ErrorCode.VERSION_MISMATCH,
                    user_message=f"Stream format version {header.get('format_version')} is not supported",
                )
            rate = float(header["sample_rate_hz"])
            if not rate > 0:
                raise _malformed("Hello carries a non-positive sample rate")
            return Hello(rate, parse_channels(header))
        if kind == FrameKind.CHUNK:
            first, n_frames = _CHUNK_HEAD.unpack_from(payload)
            body = len(payload) - _CHUNK_HEAD.size
            if n_frames == 0 or body <= 0 or body % (4 * n_frames):
                raise _malformed(f"Chunk body of {body} bytes does not hold {n_frames} frames", first_sample=first)
            samples = np.frombuffer(payload, dtype="<f4", offset=_CHUNK_HEAD.size).reshape(-1, n_frames)
            return Chunk(int(first), samples.astype(np.float32))
        if kind == FrameKind.TRIGGER:
            if len(payload) != _TRIGGER.size:
                raise _malformed(f"Trigger payload is {len(payload)} bytes, expected {_TRIGGER.size}")
            code, sample, has_label, task, value = _TRIGGER.unpack(payload)
            label = ClassLabel(_TASKS[task], value) if has_label else None
            return Trigger(TriggerEvent(TriggerCode(code), int(sample), label))
        if kind == FrameKind.BYE:
            if len(payload) != _BYE.size:
                raise _malformed(f"Bye payload is {len(payload)} bytes, expected {_BYE.size}")
            return Bye(aborted=bool(payload[0]))
    except ProtocolError:
        raise
    except (BaseAppError, ValueError, KeyError, TypeError, IndexError, AttributeError, RecursionError, struct.error) as e:
        raise _malformed(f"Undecodable frame of kind {kind}: {e}", kind=kind) from e
    raise _malformed(f"Unknown frame kind {kind}", kind=kind)


class FrameDecoder:
    """Incremental decoder: feed raw bytes, get back the complete frames so far."""

    def __init__(self, max_frame_bytes: int = MAX_FRAME_BYTES) -> None:
        self._buffer = bytearray()
        self._max = max_frame_bytes

    @property
    def pending_bytes(self) -> int:
        return len(self._buffer)

    def feed(self, data: bytes) -> list[Frame]:
        self._buffer.extend(data)
        frames: list[Frame] = []
        while len(self._buffer) >= _LENGTH.size:
            (length,) = _LENGTH.unpack_from(self._buffer)
            if length == 0 or length > self._max:
                raise _malformed(f"Frame length {length} outside [1, {self._max}]", length=length)
            end = _LENGTH.size + length
            if len(self._buffer) < end:
                break
            kind = self._buffer[_LENGTH.size]
            payload = bytes(self._buffer[_LENGTH.size + 1 : end])
            del self._buffer[:end]
            frames.append(decode_payload(kind, payload))
        return frames
