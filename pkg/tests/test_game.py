import itertools

import numpy as np
import pytest

from tdiqkd.errors import NotOrthogonal, RangeError
from tdiqkd.game import (
    NoiseSpec,
    RoundInput,
    alice_basis,
    bob_basis,
    classical_bound,
    classical_win_probability,
    classical_win_rate,
    eta_from_p,
    p_from_eta,
    play_round,
    random_classical_strategy,
    sample_outcome,
    simulate_rounds,
)
from tdiqkd.gates import bell_state
from tdiqkd.ks import axes3, ortho_structure, peres33
from tdiqkd.linalg import Ray3, density, maximally_mixed

PHI0 = density(bell_state(0))


def four_sigma(n, p):
    return 4 * np.sqrt(n * p * (1 - p))


def test_alice_basis_examples():
    b = alice_basis((1, 0, 0), (0, 1, 0))
    assert list(b) == [Ray3(1, 0, 0), Ray3(0, 1, 0), Ray3(0, 0, 1)]
    s = 1 / np.sqrt(2)
    assert alice_basis((s, s, 0), (s, -s, 0))[2] == Ray3(0, 0, 1)
    with pytest.raises(NotOrthogonal):
        alice_basis((1, 0, 0), (1, 0, 0))


def test_bob_basis_starts_with_choice():
    for r in peres33().rays:
        assert bob_basis(r)[0] == r


def test_sample_outcome_skips_zero_cells():
    t = np.zeros((3, 3))
    t[1, 0] = 0.5
    t[2, 2] = 0.5
    for u in np.linspace(0, 0.999999, 101):
        assert sample_outcome(t, u) in {(1, 0), (2, 2)}


def test_noiseless_rounds_always_match():
    recs = simulate_rounds(PHI0, peres33(), 20_000, np.random.default_rng(0))
    kept = [r for r in recs if r.kept]
    assert kept and all(r.matched for r in kept)


def test_play_round_matches_fast_path():
    rng = np.random.default_rng(1)
    rays = peres33()
    s = ortho_structure(rays)
    for _ in range(200):
        i, j = s.pairs[int(rng.integers(len(s.pairs)))]
        inp = RoundInput(rays.rays[i], rays.rays[j], int(rng.integers(2)))
        rec = play_round(PHI0, inp, rng)
        if rec.kept:
            assert rec.matched and rec.alice_outcome == inp.bob_choice


def test_mixed_state_rates():
    n = 30_000
    recs = simulate_rounds(maximally_mixed(), peres33(), n, np.random.default_rng(2))
    kept = [r for r in recs if r.kept]
    assert abs(len(kept) - n / 3) < four_sigma(n, 1 / 3)
    m = sum(r.matched for r in kept)
    assert abs(m - len(kept) / 3) < four_sigma(len(kept), 1 / 3)


def test_keep_rate_noiseless():
    n = 9000
    kept = sum(r.kept for r in simulate_rounds(PHI0, peres33(), n, np.random.default_rng(3)))
    assert abs(kept - 3000) < four_sigma(n, 1 / 3)


def test_depolarized_failure_rate():
    n = 100_000
    recs = simulate_rounds(NoiseSpec.depolarizing(0.3).state(), peres33(), n, np.random.default_rng(4))
    kept = [r for r in recs if r.kept]
    fail = 1 - sum(r.matched for r in kept) / len(kept)
    assert abs(fail - 0.2) < 3 * np.sqrt(0.2 * 0.8 / len(kept))


def test_choice_symmetry():
    n = 60_000
    recs = simulate_rounds(NoiseSpec.depolarizing(0.2).state(), peres33(), n, np.random.default_rng(5))
    by = {c: [r for r in recs if r.input.bob_choice == c] for c in (0, 1)}
    for stat in (lambda r: r.kept, lambda r: r.kept and r.matched):
        a = sum(map(stat, by[0])) / len(by[0])
        b = sum(map(stat, by[1])) / len(by[1])
        se = np.sqrt(a * (1 - a) / len(by[0]) + b * (1 - b) / len(by[1]))
        assert abs(a - b) < 4 * se


def test_eta_maps():
    assert eta_from_p(0) == 0
    assert eta_from_p(0.3) == pytest.approx(0.2, abs=1e-15)
    assert p_from_eta(2 / 3) == 1
    for eta in np.linspace(0, 2 / 3, 67):
        assert abs(eta_from_p(p_from_eta(eta)) - eta) < 1e-12
    with pytest.raises(RangeError):
        p_from_eta(0.7)
    with pytest.raises(RangeError):
        eta_from_p(-0.1)


def test_eta_matches_table_computation():
    # exact conditional mismatch over every pair and choice, from the outcome tables
    from tdiqkd.linalg import joint_distribution

    rays = peres33()
    for p in (0.05, 0.3, 0.9):
        rho = NoiseSpec.depolarizing(p).state()
        kept = mism = 0.0
        for i, j in ortho_structure(rays).pairs:
            for c in (0, 1):
                v_l = rays.rays[i] if c == 0 else rays.rays[j]
                t = joint_distribution(rho, alice_basis(rays.rays[i], rays.rays[j]), bob_basis(v_l))
                kept += t[:, 0].sum()
                mism += t[:, 0].sum() - t[c, 0]
        assert mism / kept == pytest.approx(eta_from_p(p), abs=1e-12)


def test_classical_bound_values():
    assert classical_bound(3) == pytest.approx(1 / 3)
    assert classical_bound(2) == 0.5
    with pytest.raises(RangeError):
        classical_bound(1)


def test_classical_strategies_never_beat_bound():
    tuples = [list(alice_basis(peres33().rays[i], peres33().rays[j])) for i, j in ortho_structure(peres33()).pairs]
    rng = np.random.default_rng(6)
    best_exact = 0.0
    best_mc = 0.0
    rounds = 300
    for _ in range(10_000):
        s = random_classical_strategy(tuples, rng)
        best_exact = max(best_exact, classical_win_probability(s, tuples))
    for _ in range(200):
        s = random_classical_strategy(tuples, rng)
        best_mc = max(best_mc, classical_win_rate(s, tuples, rounds, rng))
    assert best_exact <= 1 / 3 + 1e-12
    assert best_mc <= 1 / 3 + 4 * np.sqrt((1 / 3) * (2 / 3) / rounds)


def test_classical_bound_exhaustive_on_axes():
    tuples = [list(axes3().rays)]
    best = 0.0
    for a in range(3):
        for colours in itertools.product((0, 1), repeat=3):
            from tdiqkd.game import ClassicalStrategy

            s = ClassicalStrategy((a,), dict(zip(tuples[0], colours)))
            best = max(best, classical_win_probability(s, tuples))
    assert best == pytest.approx(1 / 3)
