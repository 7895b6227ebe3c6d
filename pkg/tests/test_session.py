import math

import pytest

from tdiqkd.errors import RangeError
from tdiqkd.game import NoiseSpec
from tdiqkd.ks import axes3
from tdiqkd.protocol import SessionConfig, SessionTranscript, run_session
from tdiqkd.protocol.postprocess import privacy_amplify


@pytest.fixture(scope="module")
def clean9000():
    return run_session(SessionConfig(9000, eta_tolerance=0.05, gamma=0.2, seed=11))


def check_invariants(tr: SessionTranscript):
    assert set(tr.test_indices) <= set(tr.kept_indices)
    assert len(tr.raw_key_a) == len(tr.raw_key_b)
    if tr.raw_key_a:
        assert len(tr.raw_key_a) + len(tr.test_indices) + tr.discarded == tr.rounds
    disclosed = [m for s, m in tr.messages if s == "A" and m.type == "PARITY"]
    assert tr.leakage_bits == len(disclosed)
    assert all(m.get("parity") is not None for m in disclosed)


def test_noiseless_session(clean9000):
    tr = clean9000
    assert tr.completed and tr.status == "Completed"
    assert tr.raw_key_a == tr.raw_key_b
    assert abs(len(tr.kept_indices) - 3000) < 4 * math.sqrt(9000 * 2 / 9)
    assert abs(len(tr.raw_key_a) - 2400) < 4 * math.sqrt(9000 * 2 / 9)
    assert tr.observed_failure == 0.0
    assert tr.final_key_a == tr.final_key_b
    assert len(tr.final_key_a) == tr.output_length > 0
    assert tr.sizing == "asymptotic" and tr.hash_verified
    check_invariants(tr)


def test_final_key_recomputes_from_transcript(clean9000):
    tr = clean9000
    (seed_msg,) = [m for _, m in tr.messages if m.type == "PA_SEED"]
    assert seed_msg["length"] == tr.output_length
    out = privacy_amplify(tr.raw_key_a, tr.output_length, seed_msg["seed"])
    assert "".join(map(str, out)) == tr.final_key_a


def test_message_order(clean9000):
    types = [m.type for _, m in clean9000.messages]
    assert types[:9000] == ["VECTORS"] * 9000
    assert types[9000:18000] == ["ANNOUNCE"] * 9000
    assert types[18000:21000][:3] == ["TEST_SET", "TEST_REVEAL", "VERDICT"]
    assert types[-2:] == ["PA_SEED", "DONE"]
    assert all(s == "A" for s, m in clean9000.messages if m.type in ("VECTORS", "TEST_SET", "PA_SEED"))


def test_small_session_keeps_about_a_third():
    kept = [len(run_session(SessionConfig(24, seed=s)).kept_indices) for s in range(200)]
    assert abs(sum(kept) / len(kept) - 8) < 4 * math.sqrt(24 * 2 / 9) / math.sqrt(200)


def test_high_noise_aborts():
    cfg = SessionConfig(9000, eta_tolerance=0.05, noise=NoiseSpec.depolarizing(0.3), seed=7)
    tr = run_session(cfg)
    assert tr.outcome == "TestFailed" and tr.status == "Aborted(TestFailed)"
    assert tr.observed_failure > 0.05
    assert tr.raw_key_a == tr.final_key_a == ""
    check_invariants(tr)


def test_empty_key():
    tr = run_session(SessionConfig(0, seed=1))
    assert tr.outcome == "EmptyKey"


def test_even_error_blocks_trigger_hash_abort():
    cfg = SessionConfig(3000, eta_tolerance=0.25, noise=NoiseSpec.depolarizing(0.3), block_size=16, seed=3)
    tr = run_session(cfg)
    assert tr.outcome == "HashMismatch" and tr.hash_verified is False
    assert tr.final_key_a == ""
    check_invariants(tr)


def test_noisy_session_reconciles():
    # sparse errors with a small block size are fully corrected
    cfg = SessionConfig(6000, eta_tolerance=0.05, noise=NoiseSpec.depolarizing(0.003), block_size=4, seed=5)
    tr = run_session(cfg)
    assert tr.completed
    assert tr.final_key_a == tr.final_key_b
    check_invariants(tr)


def test_determinism_and_transports():
    cfg = dict(rounds=1500, noise=NoiseSpec.depolarizing(0.01), eta_tolerance=0.1, seed=42)
    a = run_session(SessionConfig(**cfg)).dumps()
    b = run_session(SessionConfig(**cfg)).dumps()
    c = run_session(SessionConfig(**cfg, transport="socket")).dumps()
    assert a == b == c
    d = run_session(SessionConfig(**{**cfg, "seed": 43})).dumps()
    assert d != a


def test_transcript_roundtrip(clean9000):
    text = clean9000.dumps()
    back = SessionTranscript.loads(text)
    assert back.dumps() == text
    assert back.kept_indices == clean9000.kept_indices


def test_finite_key_sizing_marker():
    tr = run_session(SessionConfig(3000, finite_key_c=2.0, seed=1))
    plain = run_session(SessionConfig(3000, seed=1))
    assert tr.sizing == "finite(c:2.0)"
    assert tr.output_length < plain.output_length


def test_custom_rayset_and_keyrate_sizing():
    tr = run_session(SessionConfig(900, rayset=axes3(), rate_fn="keyrate", seed=2))
    assert tr.completed and tr.final_key_a == tr.final_key_b


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(gamma=0.0),
        dict(gamma=1.0),
        dict(eta_tolerance=0.7),
        dict(block_size=0),
        dict(epsilon_sec=0.0),
        dict(seed=-1),
        dict(finite_key_c=-1),
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(RangeError):
        SessionConfig(100, **kwargs)


def test_config_rate_fn_validation():
    with pytest.raises(ValueError):
        SessionConfig(100, rate_fn="cubic")


def test_endpoint_failure_propagates(monkeypatch):
    import time

    from tdiqkd.protocol import session

    def broken_bob(*args):
        raise RuntimeError("bob crashed")

    monkeypatch.setattr(session, "run_bob", broken_bob)
    t0 = time.perf_counter()
    with pytest.raises(RuntimeError, match="bob crashed"):
        run_session(SessionConfig(300, seed=1))
    assert time.perf_counter() - t0 < 10
