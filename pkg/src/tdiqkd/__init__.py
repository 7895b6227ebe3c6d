"""Ternary device-independent QKD simulator built on the impossible colouring game."""

from .errors import TDIQKDError
from .game import NoiseSpec, play_round, simulate_rounds
from .ks import builtin_rayset, colouring_search, peres33
from .protocol import SessionConfig, SessionTranscript, run_session
from .security import bb84_rate, key_rate, mutual_information_printed, rate_lower_bound

__version__ = "0.1.0"

__all__ = [
    "NoiseSpec",
    "SessionConfig",
    "SessionTranscript",
    "TDIQKDError",
    "bb84_rate",
    "builtin_rayset",
    "colouring_search",
    "key_rate",
    "mutual_information_printed",
    "peres33",
    "play_round",
    "rate_lower_bound",
    "run_session",
    "simulate_rounds",
]
