from .postprocess import (
    epsilon_correct,
    eta_distinguishability,
    extract_raw_key,
    output_length,
    privacy_amplify,
    reconcile,
    sift,
    test_phase,
)
from .session import SessionConfig, SessionTranscript, run_session
from .wire import WireMessage

__all__ = [
    "SessionConfig",
    "SessionTranscript",
    "WireMessage",
    "epsilon_correct",
    "eta_distinguishability",
    "extract_raw_key",
    "output_length",
    "privacy_amplify",
    "reconcile",
    "run_session",
    "sift",
    "test_phase",
]
