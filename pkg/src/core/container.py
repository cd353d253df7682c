"""
On-disk recording container.

Layout: ``magic "EEGR" | u32-LE header_len | header text (UTF-8 JSON) | f32-LE payload``.
The payload stores frames consecutively in time, one sample per channel per frame
(c0s0, c1s0, ..., c0s1, c1s1, ...). The header lists channels with roles, the
sample rate, the sample count, the trigger list and the format version.
"""

from __future__ import annotations

import json
import logging
import os
import struct
import tempfile
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ErrorCode, FileError, ValidationError
from .recording import ChannelInfo, ChannelRole, ClassLabel, Recording, Task, TriggerCode, TriggerEvent

logger = logging.getLogger(__name__)

RECORDING_MAGIC = b"EEGR"
FORMAT_VERSION = 1
_LEN_PREFIX = struct.Struct("<I")


def encode_label(label: ClassLabel | None) -> dict[str, Any] | None:
    return None if label is None else {"task": label.task.value, "value": label.value}


def decode_label(data: dict[str, Any] | None) -> ClassLabel | None:
    return None if data is None else ClassLabel(Task(data["task"]), int(data["value"]))


def recording_header(rec: Recording) -> dict[str, Any]:
    """Header dictionary shared by the container and the stream Hello frame."""
    return {
        "format_version": FORMAT_VERSION,
        "sample_rate_hz": rec.sample_rate_hz,
        "n_samples": rec.n_samples,
        "channels": [{"name": ch.name, "role": ch.role.value, "index": ch.index} for ch in rec.channels],
        # Explicit list, possibly empty
        "triggers": [
            {"code": ev.code.name, "sample_index": ev.sample_index, "label": encode_label(ev.label)} for ev in rec.triggers
        ],
    }


def parse_channels(header: dict[str, Any]) -> tuple[ChannelInfo, ...]:
    return tuple(ChannelInfo(c["name"], ChannelRole(c["role"]), int(c["index"])) for c in header["channels"])


def parse_triggers(header: dict[str, Any]) -> tuple[TriggerEvent, ...]:
    return tuple(
        TriggerEvent(TriggerCode[t["code"]], int(t["sample_index"]), decode_label(t.get("label"))) for t in header["triggers"]
    )


def check_version(header: dict[str, Any], path: Path | str) -> None:
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise FileError(
            code=ErrorCode.VERSION_MISMATCH,
            user_message=f"Unsupported container version {version!r} (reader supports {FORMAT_VERSION})",
            context={"path": str(path)},
        )


def pack_container(magic: bytes, header: dict[str, Any], payload: bytes) -> bytes:
    header_bytes = json.dumps(header, sort_keys=True, indent=1).encode("utf-8")
    return magic + _LEN_PREFIX.pack(len(header_bytes)) + header_bytes + payload


def unpack_container(blob: bytes, magic: bytes, path: Path | str) -> tuple[dict[str, Any], bytes]:
    """
    Split a container blob into its parsed header and raw payload.

    Raises:
        FileError: If the magic, length prefix or header text is malformed
    """
    prefix_end = len(magic) + _LEN_PREFIX.size
    if len(blob) < prefix_end or blob[: len(magic)] != magic:
        raise FileError(
            code=ErrorCode.BAD_MAGIC,
            user_message=f"Not a {magic.decode()} container: {path}",
            context={"path": str(path)},
        )
    (header_len,) = _LEN_PREFIX.unpack_from(blob, len(magic))
    if len(blob) < prefix_end + header_len:
        raise FileError(
            code=ErrorCode.TRUNCATED_PAYLOAD, user_message=f"Header truncated in {path}", context={"path": str(path)}
        )
    try:
        header = json.loads(blob[prefix_end : prefix_end + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FileError(
            code=ErrorCode.INVALID_FORMAT, user_message=f"Corrupt header in {path}: {e}", context={"path": str(path)}
        ) from e
    return header, blob[prefix_end + header_len :]


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Write via a temporary file in the same directory followed by an atomic rename."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
    except OSError as e:
        raise FileError(
            code=ErrorCode.PERMISSION_DENIED if isinstance(e, PermissionError) else ErrorCode.OS_ERROR,
            user_message=f"Cannot write {path}: {e}",
            technical_message=f"{type(e).__name__}: {e}",
            context={"path": str(path)},
        ) from e


def read_bytes(path: Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except FileNotFoundError as e:
        raise FileError(code=ErrorCode.FILE_NOT_FOUND, user_message=f"File not found: {path}") from e
    except OSError as e:
        raise FileError(code=ErrorCode.OS_ERROR, user_message=f"Cannot read {path}: {e}") from e


def frames_to_bytes(samples: np.ndarray) -> bytes:
    """Channel-major matrix → frame-interleaved f32-LE bytes."""
    return np.ascontiguousarray(samples.T, dtype="<f4").tobytes()


def bytes_to_frames(payload: bytes, n_channels: int, n_samples: int) -> np.ndarray:
    """Frame-interleaved f32-LE bytes → float32 ``[n_channels × n_samples]`` matrix."""
    frames = np.frombuffer(payload, dtype="<f4").reshape(n_samples, n_channels)
    return np.ascontiguousarray(frames.T).astype(np.float32)


def write_recording(rec: Recording, path: Path | str) -> None:
    """
    Write a recording to the container format.

    Args:
        rec: Recording to persist (samples are stored as 32-bit floats)
        path: Destination file

    Raises:
        ValidationError: If header and matrix disagree
        FileError: If the path is not writable
    """
    rec.validate()
    header = recording_header(rec)
    payload = frames_to_bytes(rec.samples)
    if len(payload) != rec.n_channels * rec.n_samples * 4:
        raise ValidationError(code=ErrorCode.DIMENSION_MISMATCH, user_message="Header/matrix size inconsistency")
    atomic_write_bytes(Path(path), pack_container(RECORDING_MAGIC, header, payload))
    logger.debug(f"Wrote recording {path}: {rec.n_channels} ch × {rec.n_samples} samples, {len(rec.triggers)} triggers")


def read_recording(path: Path | str) -> Recording:
    """
    Read and validate a recording container.

    Args:
        path: Container file produced by ``write_recording``

    Returns:
        Validated recording with float32 samples

    Raises:
        FileError: On truncated payload, bad magic or version mismatch
        ValidationError: If a trigger index is out of range
    """
    blob = read_bytes(Path(path))
    header, payload = unpack_container(blob, RECORDING_MAGIC, path)
    check_version(header, path)

    channels = parse_channels(header)
    n_samples = int(header["n_samples"])
    expected = len(channels) * n_samples * 4
    if len(payload) != expected:
        raise FileError(
            code=ErrorCode.TRUNCATED_PAYLOAD,
            user_message=f"Payload is {len(payload)} bytes, expected {expected} ({len(channels)} ch × {n_samples} samples × 4)",
            context={"path": str(path)},
        )
    samples = bytes_to_frames(payload, len(channels), n_samples)
    return Recording(channels, float(header["sample_rate_hz"]), samples, parse_triggers(header))
