"""
Tests for the stream codec, ring buffer, replay server and collector.

Tests cover:
- Frame encoding and incremental decoding
- Malformed input handling
- Loopback and TCP sessions (integration)
- Sample gaps, aborted sessions and overwritten windows
"""

import numpy as np
import pytest

from bci.stream import (
    Bye,
    Chunk,
    ClockMode,
    FrameDecoder,
    FrameKind,
    Hello,
    LoopbackTransport,
    RingBuffer,
    StreamCollector,
    StreamSettings,
    Trigger,
    accept,
    client_collect,
    connect,
    decode_payload,
    encode_frame,
    open_server,
    serve_replay,
    start_replay,
)
from conftest import make_recording, task_triggers
from core.errors import ErrorCode, ProtocolError, ValidationError
from core.recording import ClassLabel, Task, TriggerCode, TriggerEvent, build_montage
from core.threading import BackgroundWorker

FAST = StreamSettings(chunk_size=40, clock_mode=ClockMode.UNPACED)


def _frames() -> list:
    return [
        Hello(1000.0, build_montage(4)),
        Chunk(120, np.arange(18, dtype=np.float32).reshape(9, 2)),
        Trigger(TriggerEvent(TriggerCode.TASK_MI_START, 130, ClassLabel.mi(1))),
        Trigger(TriggerEvent(TriggerCode.BEEP, 7)),
        Bye(aborted=True),
    ]


def _task_recording(fs: float = 1000.0, n_samples: int = 6000) -> tuple:
    vi = task_triggers(Task.VI, ClassLabel.vi(2), 500, 2000)
    mi = task_triggers(Task.MI, ClassLabel.mi(0), 3000, 2000)
    return make_recording(n_samples=n_samples, fs=fs, triggers=(TriggerEvent(TriggerCode.BEEP, 100), *vi, *mi))


class TestCodec:
    """Test frame encoding and decoding."""

    def test_round_trip(self):
        """Test that every frame kind decodes to an equal frame."""
        decoder = FrameDecoder()
        for frame in _frames():
            (decoded,) = decoder.feed(encode_frame(frame))
            if isinstance(frame, Chunk):
                assert decoded.first_sample == frame.first_sample
                np.testing.assert_array_equal(decoded.samples, frame.samples)
            else:
                assert decoded == frame
        assert decoder.pending_bytes == 0

    def test_wire_layout(self):
        """Test the length prefix and kind byte of a trigger frame."""
        data = encode_frame(Trigger(TriggerEvent(TriggerCode.BEEP, 7)))
        assert int.from_bytes(data[:4], "little") == len(data) - 4
        assert data[4] == FrameKind.TRIGGER
        assert len(data) == 4 + 1 + 12

    @pytest.mark.parametrize("step", [1, 3, 7, 64])
    def test_arbitrary_split_points(self, step):
        """Test that bytes fed in small pieces decode to the same frames."""
        stream = b"".join(encode_frame(f) for f in _frames())
        decoder = FrameDecoder()
        frames = []
        for i in range(0, len(stream), step):
            frames.extend(decoder.feed(stream[i : i + step]))
        assert [type(f) for f in frames] == [type(f) for f in _frames()]

    def test_unknown_kind(self):
        """Test that an unknown kind byte is malformed."""
        with pytest.raises(ProtocolError) as exc_info:
            decode_payload(9, b"")
        assert exc_info.value.code == ErrorCode.MALFORMED_FRAME

    def test_zero_length_frame(self):
        """Test that a zero length prefix is malformed."""
        with pytest.raises(ProtocolError):
            FrameDecoder().feed(b"\x00\x00\x00\x00")

    def test_oversized_frame(self):
        """Test that a frame beyond the size limit is refused before buffering it."""
        with pytest.raises(ProtocolError):
            FrameDecoder(max_frame_bytes=16).feed((100).to_bytes(4, "little") + b"\x02")

    def test_chunk_body_must_fit_frames(self):
        """Test that a chunk body not divisible into its frames is malformed."""
        payload = (0).to_bytes(8, "little") + (3).to_bytes(4, "little") + bytes(8)
        with pytest.raises(ProtocolError):
            decode_payload(FrameKind.CHUNK, payload)

    def test_hello_version_mismatch(self):
        """Test that a foreign Hello version is reported as such."""
        with pytest.raises(ProtocolError) as exc_info:
            decode_payload(FrameKind.HELLO, b'{"format_version": 99, "sample_rate_hz": 1000, "channels": []}')
        assert exc_info.value.code == ErrorCode.VERSION_MISMATCH

    def test_deeply_nested_hello(self):
        """Test that a Hello body nested past the parser's depth limit is malformed."""
        with pytest.raises(ProtocolError) as exc_info:
            decode_payload(FrameKind.HELLO, b"[" * 100_000)
        assert exc_info.value.code == ErrorCode.MALFORMED_FRAME

    def test_fuzzed_input_raises_only_protocol_errors(self):
        """Test that random and bit-flipped input never escapes as another exception."""
        rng = np.random.default_rng(0)
        valid = b"".join(encode_frame(f) for f in _frames())
        for _ in range(500):
            if rng.random() < 0.5:
                data = rng.bytes(int(rng.integers(1, 200)))
            else:
                mutated = bytearray(valid)
                for pos in rng.integers(0, len(mutated), size=3):
                    mutated[pos] ^= 1 << int(rng.integers(0, 8))
                data = bytes(mutated)
            try:
                FrameDecoder(max_frame_bytes=4096).feed(data)
            except ProtocolError:
                pass


class TestSettings:
    """Test stream settings."""

    def test_speedup(self):
        """Test the pacing factor per clock mode."""
        assert StreamSettings(clock_mode=ClockMode.UNPACED).speedup == 0.0
        assert StreamSettings(clock_mode=ClockMode.REALTIME, accel_factor=5.0).speedup == 1.0
        assert StreamSettings(clock_mode=ClockMode.ACCELERATED, accel_factor=5.0).speedup == 5.0

    @pytest.mark.parametrize("kwargs", [{"chunk_size": 0}, {"accel_factor": 0.0}, {"ring_seconds": 10.0}])
    def test_invalid(self, kwargs):
        """Test that invalid settings are rejected."""
        with pytest.raises(ValidationError):
            StreamSettings(**kwargs)

    def test_dict_round_trip(self):
        """Test that to_dict feeds back into from_dict."""
        settings = StreamSettings(port=9000, clock_mode=ClockMode.ACCELERATED, accel_factor=3.0)
        assert StreamSettings.from_dict(settings.to_dict()) == settings


class TestRingBuffer:
    """Test the absolute-index sample ring."""

    def test_read_back(self):
        """Test that appended samples read back by absolute index."""
        ring = RingBuffer(2, 100)
        block = np.arange(160, dtype=np.float32).reshape(2, 80)
        ring.append(block)
        np.testing.assert_array_equal(ring.read(10, 50), block[:, 10:50])

    def test_wrap_and_overwrite(self):
        """Test that old samples become unreadable once overwritten."""
        ring = RingBuffer(1, 100)
        ring.append(np.zeros((1, 80), dtype=np.float32))
        lost = ring.append(np.ones((1, 70), dtype=np.float32))
        assert lost == 50
        assert ring.oldest == 50
        assert ring.read(0, 10) is None
        np.testing.assert_array_equal(ring.read(80, 150), np.ones((1, 70)))

    def test_future_samples(self):
        """Test that samples not yet written are not readable."""
        ring = RingBuffer(1, 100)
        ring.append(np.zeros((1, 10), dtype=np.float32))
        assert ring.read(5, 20) is None


@pytest.mark.integration
class TestSession:
    """Test complete replay sessions over a loopback transport."""

    def test_windows_and_recording_round_trip(self):
        """Test that windows match the source and the received recording is identical."""
        rec = _task_recording()
        server, client = LoopbackTransport.pair()
        replay = start_replay(rec, server, FAST)
        collector = StreamCollector(client, FAST, keep_history=True).start()
        windows = list(collector.windows(timeout=10.0))
        stats = replay.outcome(10.0)

        assert [w.task for w in windows] == [Task.VI, Task.MI]
        assert windows[0].label == ClassLabel.vi(2)
        assert windows[0].start_sample == 500
        np.testing.assert_array_equal(windows[0].samples, rec.samples[:, 500:2500])
        np.testing.assert_array_equal(windows[1].samples, rec.samples[:, 3000:5000])

        received = collector.recording()
        assert received.equals(rec)
        assert stats.completed
        assert stats.n_chunks == 150
        assert stats.n_triggers == len(rec.triggers)
        assert collector.stats.windows == 2
        server.close()
        client.close()

    def test_client_collect(self):
        """Test the one-call collection helper."""
        rec = _task_recording()
        server, client = LoopbackTransport.pair()
        start_replay(rec, server, FAST)
        windows = client_collect(client, FAST, timeout=10.0)
        assert len(windows) == 2

    def test_accelerated_pacing(self):
        """Test that an accelerated replay keeps its drift small."""
        rec = _task_recording(n_samples=6000)
        settings = StreamSettings(chunk_size=100, clock_mode=ClockMode.ACCELERATED, accel_factor=20.0)
        server, client = LoopbackTransport.pair()
        replay = start_replay(rec, server, settings)
        list(StreamCollector(client, settings).start().windows(timeout=10.0))
        assert replay.outcome(10.0).max_drift_s < 0.25

    def test_sample_gap(self):
        """Test that a skipped chunk ends the session with SAMPLE_GAP."""
        server, client = LoopbackTransport.pair()
        collector = StreamCollector(client, FAST).start()
        block = np.zeros((13, 40), dtype=np.float32)
        server.send(encode_frame(Hello(1000.0, build_montage(8))))
        server.send(encode_frame(Chunk(0, block)))
        server.send(encode_frame(Chunk(80, block)))
        with pytest.raises(ProtocolError) as exc_info:
            list(collector.windows(timeout=5.0))
        assert exc_info.value.code == ErrorCode.SAMPLE_GAP
        assert collector.corrupt

    def test_chunk_before_hello(self):
        """Test that data before Hello is an unexpected frame."""
        server, client = LoopbackTransport.pair()
        collector = StreamCollector(client, FAST).start()
        server.send(encode_frame(Chunk(0, np.zeros((13, 40), dtype=np.float32))))
        with pytest.raises(ProtocolError) as exc_info:
            list(collector.windows(timeout=5.0))
        assert exc_info.value.code == ErrorCode.UNEXPECTED_FRAME

    def test_aborted_bye(self):
        """Test that an aborted Bye surfaces as a transport failure."""
        server, client = LoopbackTransport.pair()
        collector = StreamCollector(client, FAST).start()
        server.send(encode_frame(Hello(1000.0, build_montage(8))))
        server.send(encode_frame(Bye(aborted=True)))
        with pytest.raises(ProtocolError) as exc_info:
            list(collector.windows(timeout=5.0))
        assert exc_info.value.code == ErrorCode.TRANSPORT_FAILURE
        assert collector.aborted

    def test_closed_without_bye(self):
        """Test that an early close is a transport failure."""
        server, client = LoopbackTransport.pair()
        collector = StreamCollector(client, FAST).start()
        server.send(encode_frame(Hello(1000.0, build_montage(8))))
        server.close()
        with pytest.raises(ProtocolError) as exc_info:
            list(collector.windows(timeout=5.0))
        assert exc_info.value.code == ErrorCode.TRANSPORT_FAILURE

    def test_window_longer_than_ring_is_lost(self):
        """Test that a window overwritten before its end trigger is counted as lost."""
        vi = task_triggers(Task.VI, ClassLabel.vi(0), 100, 4500)
        rec = make_recording(n_samples=5000, fs=100.0, triggers=vi)
        server, client = LoopbackTransport.pair()
        start_replay(rec, server, FAST)
        collector = StreamCollector(client, FAST).start()
        assert list(collector.windows(timeout=10.0)) == []
        assert collector.stats.lost_windows == 1
        assert collector.stats.overwritten_samples == 3000

    def test_cancelled_replay_sends_aborted_bye(self):
        """Test that cancelling the server ends the client with an aborted session."""
        rec = make_recording(n_samples=20000)
        settings = StreamSettings(chunk_size=40, clock_mode=ClockMode.REALTIME)
        server, client = LoopbackTransport.pair()
        replay = start_replay(rec, server, settings)
        collector = StreamCollector(client, settings).start()
        replay.cancel()
        assert replay.outcome(5.0).completed is False
        with pytest.raises(ProtocolError):
            list(collector.windows(timeout=5.0))

    def test_tcp_session(self):
        """Test a replay over a real TCP connection."""
        rec = _task_recording()
        listener = open_server("127.0.0.1", 0)
        port = listener.getsockname()[1]

        def serve(token):
            with accept(listener, timeout=5.0) as transport:
                return serve_replay(rec, transport, FAST, token)

        worker = BackgroundWorker(serve, name="TcpReplay")
        worker.start()
        with connect("127.0.0.1", port) as transport:
            windows = client_collect(transport, FAST, timeout=10.0)
        assert worker.outcome(10.0).completed
        listener.close()
        assert [w.label for w in windows] == [ClassLabel.vi(2), ClassLabel.mi(0)]
