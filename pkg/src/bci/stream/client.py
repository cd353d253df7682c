"""
Stream client: reassembles chunks into a ring buffer and cuts task windows.

A reader thread owns the transport and the ring buffer. When a
``TaskViEnd``/``TaskMiEnd`` trigger arrives, the window ``[start, end)`` of
the matching start trigger is cut as soon as the samples up to ``end`` are in,
and handed to the consumer through a bounded queue. The reader waits on a full
queue instead of dropping windows, so delivery order always equals trigger order.
"""

from __future__ import annotations

import logging
import math
import queue
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from core.errors import BaseAppError, ErrorCode, ProtocolError
from core.recording import ChannelInfo, ClassLabel, Recording, Task, TriggerCode, TriggerEvent
from core.threading import BackgroundWorker, CancellationToken

from .frames import Bye, Chunk, FrameDecoder, Hello, Trigger
from .settings import StreamSettings
from .transport import Transport

logger = logging.getLogger(__name__)

_TASK_BOUNDS: dict[TriggerCode, tuple[Task, bool]] = {
    TriggerCode.TASK_VI_START: (Task.VI, True),
    TriggerCode.TASK_VI_END: (Task.VI, False),
    TriggerCode.TASK_MI_START: (Task.MI, True),
    TriggerCode.TASK_MI_END: (Task.MI, False),
}


@dataclass(frozen=True)
class TaskWindow:
    """Samples ``[start_sample, end_sample)`` of one online task."""

    task: Task
    label: ClassLabel | None
    start_sample: int
    samples: np.ndarray
    channels: tuple[ChannelInfo, ...]
    sample_rate_hz: float

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[1])

    @property
    def end_sample(self) -> int:
        return self.start_sample + self.n_samples

    def recording(self) -> Recording:
        return Recording(self.channels, self.sample_rate_hz, self.samples)


@dataclass
class CollectorStats:
    chunks: int = 0
    samples: int = 0
    triggers: int = 0
    windows: int = 0
    overwritten_samples: int = 0
    lost_windows: int = 0
    queue_waits: int = 0


class RingBuffer:
    """Fixed-capacity sample ring indexed by absolute sample number."""

    def __init__(self, n_channels: int, capacity: int) -> None:
        self.data = np.zeros((n_channels, capacity), dtype=np.float32)
        self.capacity = capacity
        self.total = 0

    @property
    def oldest(self) -> int:
        return max(0, self.total - self.capacity)

    def append(self, block: np.ndarray) -> int:
        """Write a block; returns how many previously held samples were overwritten."""
        n = block.shape[1]
        if n >= self.capacity:
            block = block[:, n - self.capacity :]
        idx = (self.total + np.arange(n - block.shape[1], n)) % self.capacity
        self.data[:, idx] = block
        lost = max(0, self.total + n - self.capacity) - self.oldest
        self.total += n
        return lost

    def read(self, start: int, stop: int) -> np.ndarray | None:
        """Copy of ``[start, stop)``, or ``None`` if any of it was overwritten or not yet written."""
        if start < self.oldest or stop > self.total or start > stop:
            return None
        return self.data[:, np.arange(start, stop) % self.capacity].copy()


@dataclass
class _Pending:
    task: Task
    label: ClassLabel | None
    start: int
    end: int


_END = object()


class StreamCollector:
    """
    Client side of a stream session.

    Usage: ``start()``, then iterate ``windows()``. With
    ``keep_history`` every chunk and trigger is also retained so the complete
    recording can be rebuilt with ``recording()``.
    """

    def __init__(self, transport: Transport, settings: StreamSettings, keep_history: bool = False) -> None:
        self.transport = transport
        self.settings = settings
        self.keep_history = keep_history
        self.stats = CollectorStats()
        self.hello: Hello | None = None
        self.ring: RingBuffer | None = None
        self.corrupt = False
        self.aborted = False
        self._decoder = FrameDecoder()
        self._queue: queue.Queue[object] = queue.Queue(maxsize=settings.queue_capacity)
        self._open: dict[Task, TriggerEvent] = {}
        self._pending: list[_Pending] = []
        self._history: list[np.ndarray] = []
        self._triggers: list[TriggerEvent] = []
        self._worker: BackgroundWorker[None] = BackgroundWorker(self._read_loop, name="StreamCollector")

    def start(self) -> StreamCollector:
        self._worker.start()
        return self

    def stop(self) -> None:
        self._worker.cancel()

    def join(self, timeout: float | None = None) -> None:
        """
        Wait for the reader to finish.

        Raises:
            ProtocolError: If the session was corrupt or the transport failed
        """
        self._worker.outcome(timeout)

    def windows(self, timeout: float | None = None) -> Iterator[TaskWindow]:
        """
        Yield task windows in trigger order until the stream ends.

        Raises:
            ProtocolError: After the last good window, if the session turned out corrupt
            queue.Empty: If nothing arrives within ``timeout`` seconds
        """
        while True:
            item = self._queue.get(timeout=timeout)
            if item is _END:
                break
            assert isinstance(item, TaskWindow)
            yield item
        self.join()

    def recording(self) -> Recording:
        """The complete received recording; needs ``keep_history`` and a finished session."""
        if self.hello is None:
            raise ProtocolError(code=ErrorCode.UNEXPECTED_FRAME, user_message="No Hello frame received")
        if not self.keep_history:
            raise ProtocolError(code=ErrorCode.INVALID_INPUT, user_message="Collector was created without keep_history")
        n_channels = len(self.hello.channels)
        samples = np.concatenate(self._history, axis=1) if self._history else np.zeros((n_channels, 0), dtype=np.float32)
        return Recording(self.hello.channels, self.hello.sample_rate_hz, samples, tuple(self._triggers))

    # Reader thread

    def _read_loop(self, token: CancellationToken) -> None:
        try:
            while not token.is_cancelled():
                data = self.transport.recv()
                if data is None:
                    continue
                if data == b"":
                    raise ProtocolError(
                        code=ErrorCode.TRANSPORT_FAILURE,
                        user_message=f"Stream closed without Bye after {self.stats.samples} samples",
                    )
                for frame in self._decoder.feed(data):
                    if isinstance(frame, Bye):
                        self.aborted = frame.aborted
                        if frame.aborted:
                            raise ProtocolError(
                                code=ErrorCode.TRANSPORT_FAILURE,
                                user_message=f"Server aborted the session after {self.stats.samples} samples",
                            )
                        logger.info(
                            f"Stream ended: {self.stats.samples} samples, {self.stats.windows} windows, "
                            f"{self.stats.overwritten_samples} samples overwritten"
                        )
                        return
                    self._handle(frame, token)
        except BaseAppError:
            self.corrupt = True
            raise
        finally:
            self._put(_END, token, force=True)

    def _handle(self, frame: Hello | Chunk | Trigger, token: CancellationToken) -> None:
        if isinstance(frame, Hello):
            if self.hello is not None:
                raise ProtocolError(code=ErrorCode.UNEXPECTED_FRAME, user_message="Second Hello within one session")
            self.hello = frame
            capacity = math.ceil(self.settings.ring_seconds * frame.sample_rate_hz)
            self.ring = RingBuffer(len(frame.channels), capacity)
            return
        if self.hello is None or self.ring is None:
            raise ProtocolError(code=ErrorCode.UNEXPECTED_FRAME, user_message=f"{type(frame).__name__} frame before Hello")

        if isinstance(frame, Trigger):
            self._on_trigger(frame.event)
            return

        if frame.first_sample != self.ring.total:
            raise ProtocolError(
                code=ErrorCode.SAMPLE_GAP,
                user_message=f"Chunk starts at sample {frame.first_sample}, expected {self.ring.total}",
                context={"expected": self.ring.total, "received": frame.first_sample},
            )
        if frame.samples.shape[0] != len(self.hello.channels):
            raise ProtocolError(
                code=ErrorCode.MALFORMED_FRAME,
                user_message=f"Chunk has {frame.samples.shape[0]} channels, Hello announced {len(self.hello.channels)}",
            )
        lost = self.ring.append(frame.samples)
        if lost:
            self.stats.overwritten_samples += lost
        if self.keep_history:
            self._history.append(frame.samples)
        self.stats.chunks += 1
        self.stats.samples += frame.n_frames
        self._flush_ready(token)

    def _on_trigger(self, event: TriggerEvent) -> None:
        self.stats.triggers += 1
        if self.keep_history:
            self._triggers.append(event)
        bound = _TASK_BOUNDS.get(event.code)
        if bound is None:
            return
        task, is_start = bound
        if is_start:
            self._open[task] = event
            return
        start = self._open.pop(task, None)
        if start is None:
            logger.warning(f"{event.code.name} at sample {event.sample_index} without a start; ignored")
            return
        self._pending.append(_Pending(task, start.label, start.sample_index, event.sample_index))

    def _flush_ready(self, token: CancellationToken) -> None:
        assert self.ring is not None and self.hello is not None
        while self._pending and self._pending[0].end <= self.ring.total:
            item = self._pending.pop(0)
            data = self.ring.read(item.start, item.end)
            if data is None:
                self.stats.lost_windows += 1
                logger.warning(
                    f"{item.task.value} window [{item.start}, {item.end}) no longer in the ring buffer; "
                    f"{self.stats.lost_windows} lost so far"
                )
                continue
            window = TaskWindow(item.task, item.label, item.start, data, self.hello.channels, self.hello.sample_rate_hz)
            self.stats.windows += 1
            self._put(window, token)

    def _put(self, item: object, token: CancellationToken, force: bool = False) -> None:
        while True:
            try:
                self._queue.put(item, timeout=0.1)
                return
            except queue.Full:
                self.stats.queue_waits += 1
                if token.is_cancelled() and not force:
                    return
                if token.is_cancelled() and force:
                    # Make room for the end marker
                    try:
                        self._queue.get_nowait()
                    except queue.Empty:
                        pass


def client_collect(transport: Transport, settings: StreamSettings, timeout: float | None = None) -> list[TaskWindow]:
    """Collect every task window of a session until Bye."""
    collector = StreamCollector(transport, settings).start()
    return list(collector.windows(timeout))
