"""Online dual-task pipeline: VI and MI decoding, robot dispatch, timing and session reports."""

from .aggregation import WindowVote, aggregate_votes
from .config import STAGES, Aggregation, PipelineConfig, StageTiming, TimingMode
from .decoding import ONLINE_WINDOWS, DecodeResult, ModelDecoder, SimulatedDecoder, TaskDecoder
from .report import read_session_report, render_session_report, write_session_report
from .session import PUBLISHED_SYSTEM_ACCURACY, SessionReport, run_session, simulate_system
from .trial import TaskBuffer, TrialOutcome, finish_trial, run_trial

__all__ = [
    "ONLINE_WINDOWS",
    "PUBLISHED_SYSTEM_ACCURACY",
    "STAGES",
    "Aggregation",
    "DecodeResult",
    "ModelDecoder",
    "PipelineConfig",
    "SessionReport",
    "SimulatedDecoder",
    "StageTiming",
    "TaskBuffer",
    "TaskDecoder",
    "TimingMode",
    "TrialOutcome",
    "WindowVote",
    "aggregate_votes",
    "finish_trial",
    "read_session_report",
    "render_session_report",
    "run_session",
    "run_trial",
    "simulate_system",
    "write_session_report",
]
