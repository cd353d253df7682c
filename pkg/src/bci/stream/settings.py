"""Stream session settings."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any

from core.errors import ErrorCode, ValidationError

DEFAULT_PORT = 7878
DEFAULT_CHUNK_SIZE = 40
MIN_RING_SECONDS = 20.0


class ClockMode(Enum):
    REALTIME = "Realtime"
    ACCELERATED = "Accelerated"
    UNPACED = "Unpaced"


@dataclass(frozen=True)
class StreamSettings:
    host: str = "127.0.0.1"
    port: int = DEFAULT_PORT
    chunk_size: int = DEFAULT_CHUNK_SIZE
    clock_mode: ClockMode = ClockMode.UNPACED
    accel_factor: float = 1.0
    ring_seconds: float = MIN_RING_SECONDS
    queue_capacity: int = 8

    def __post_init__(self) -> None:
        if self.chunk_size < 1:
            raise ValidationError(code=ErrorCode.VALUE_OUT_OF_RANGE, user_message="chunk_size must be at least 1", field="chunk_size")
        if self.accel_factor <= 0:
            raise ValidationError(code=ErrorCode.VALUE_OUT_OF_RANGE, user_message="accel_factor must be positive", field="accel_factor")
        if self.ring_seconds < MIN_RING_SECONDS:
            raise ValidationError(
                code=ErrorCode.VALUE_OUT_OF_RANGE,
                user_message=f"ring_seconds must be at least {MIN_RING_SECONDS}",
                field="ring_seconds",
            )
        if self.queue_capacity < 1:
            raise ValidationError(
                code=ErrorCode.VALUE_OUT_OF_RANGE, user_message="queue_capacity must be at least 1", field="queue_capacity"
            )

    @property
    def speedup(self) -> float:
        """Replay speed relative to real time; 0 means unpaced."""
        if self.clock_mode is ClockMode.UNPACED:
            return 0.0
        return self.accel_factor if self.clock_mode is ClockMode.ACCELERATED else 1.0

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> StreamSettings:
        return cls(
            host=str(data.get("host", "127.0.0.1")),
            port=int(data.get("port", DEFAULT_PORT)),
            chunk_size=int(data.get("chunk_size", DEFAULT_CHUNK_SIZE)),
            clock_mode=ClockMode(data.get("clock_mode", "Unpaced")),
            accel_factor=float(data.get("accel_factor", 1.0)),
            ring_seconds=float(data.get("ring_seconds", MIN_RING_SECONDS)),
            queue_capacity=int(data.get("queue_capacity", 8)),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "host": self.host,
            "port": self.port,
            "chunk_size": self.chunk_size,
            "clock_mode": self.clock_mode.value,
            "accel_factor": self.accel_factor,
            "ring_seconds": self.ring_seconds,
            "queue_capacity": self.queue_capacity,
        }
