"""
Replay server: streams a recording as Hello, interleaved Chunk/Trigger frames, Bye.

A trigger is sent before the chunk that contains its sample. In paced modes a
chunk covering ``[s, s + n)`` leaves once ``(s + n) / fs`` seconds (divided by
the speed-up) have elapsed since the start of the replay.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

from core.errors import ProtocolError
from core.recording import Recording
from core.threading import BackgroundWorker, CancellationToken

from .frames import Bye, Chunk, Hello, Trigger, encode_frame
from .settings import StreamSettings
from .transport import Transport

logger = logging.getLogger(__name__)


@dataclass
class ReplayStats:
    n_chunks: int = 0
    n_triggers: int = 0
    max_drift_s: float = 0.0
    final_drift_s: float = 0.0
    completed: bool = False


def serve_replay(
    rec: Recording, transport: Transport, settings: StreamSettings, token: CancellationToken | None = None
) -> ReplayStats:
    """
    Stream ``rec`` over ``transport``.

    Args:
        rec: Recording to replay
        transport: Connected transport
        settings: Chunk size and clock mode
        token: Optional cancellation; a cancelled replay ends with an aborted Bye

    Returns:
        Frame counts and pacing drift (always zero when unpaced)

    Raises:
        ProtocolError: If the transport fails; an aborted Bye is attempted first
    """
    stats = ReplayStats()
    fs = rec.sample_rate_hz
    speedup = settings.speedup
    triggers = list(rec.triggers)
    next_trigger = 0

    try:
        transport.send(encode_frame(Hello(fs, rec.channels)))
        start = time.perf_counter()
        for first in range(0, rec.n_samples, settings.chunk_size):
            if token is not None and token.is_cancelled():
                logger.info(f"Replay cancelled at sample {first}")
                transport.send(encode_frame(Bye(aborted=True)))
                return stats
            stop = min(first + settings.chunk_size, rec.n_samples)
            if speedup > 0:
                due = stop / fs / speedup
                delay = due - (time.perf_counter() - start)
                if delay > 0:
                    if token is not None:
                        token.wait(delay)
                    else:
                        time.sleep(delay)
                drift = (time.perf_counter() - start) - due
                stats.max_drift_s = max(stats.max_drift_s, abs(drift))
                stats.final_drift_s = drift
            while next_trigger < len(triggers) and triggers[next_trigger].sample_index < stop:
                transport.send(encode_frame(Trigger(triggers[next_trigger])))
                next_trigger += 1
                stats.n_triggers += 1
            transport.send(encode_frame(Chunk(first, rec.samples[:, first:stop])))
            stats.n_chunks += 1
        transport.send(encode_frame(Bye()))
    except ProtocolError:
        logger.error(f"Replay aborted after {stats.n_chunks} chunks")
        try:
            transport.send(encode_frame(Bye(aborted=True)))
        except ProtocolError:
            pass
        raise

    stats.completed = True
    logger.info(
        f"Replayed {rec.n_samples} samples in {stats.n_chunks} chunks with {stats.n_triggers} triggers "
        f"(max drift {1000 * stats.max_drift_s:.1f} ms)"
    )
    return stats


def start_replay(rec: Recording, transport: Transport, settings: StreamSettings) -> BackgroundWorker[ReplayStats]:
    """Run ``serve_replay`` on a daemon thread; ``outcome()`` returns its stats."""
    worker: BackgroundWorker[ReplayStats] = BackgroundWorker(
        lambda token: serve_replay(rec, transport, settings, token), name="ReplayServer"
    )
    worker.start()
    return worker
