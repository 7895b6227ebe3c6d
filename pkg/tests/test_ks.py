import numpy as np
import pytest

from oracles import is_colourable_bruteforce, peres_rays
from tdiqkd.errors import NoOrthogonalPair, UnknownSet
from tdiqkd.ks import (
    Colourable,
    RaySet,
    Uncolourable,
    axes3,
    builtin_rayset,
    check_colouring,
    colouring_search,
    dumps_rayset,
    load_rayset,
    loads_rayset,
    ortho_structure,
    peres33,
    pick_orthogonal_pair,
)
from tdiqkd.linalg import Ray3

PERES_TRIPLES = 16
PERES_PAIRS = 72


def test_builtins():
    a = builtin_rayset("axes3")
    s = ortho_structure(a)
    assert len(a) == 3
    assert list(s.pairs) == [(0, 1), (0, 2), (1, 2)]
    assert list(s.triples) == [(0, 1, 2)]
    assert len(peres33()) == 33
    with pytest.raises(UnknownSet):
        builtin_rayset("cabello18")


def test_peres_against_bruteforce_generator():
    ref = peres_rays()
    assert len(ref) == 33
    assert set(peres33().rays) == {Ray3(v) for v in ref}


def test_peres_structure_golden_and_consistent():
    s = ortho_structure(peres33())
    assert len(s.pairs) == PERES_PAIRS
    assert len(s.triples) == PERES_TRIPLES
    pairs = set(s.pairs)
    for i, j, k in s.triples:
        assert {(i, j), (i, k), (j, k)} <= pairs


def test_non_orthogonal_set_has_no_structure():
    s = ortho_structure(RaySet("two", [(1, 0, 0), (1, 1, 0)]))
    assert len(s.pairs) == 0 and len(s.triples) == 0


def test_colouring_examples():
    r = colouring_search(axes3())
    assert isinstance(r, Colourable)
    assert sum(r.assignment.values()) == 1
    assert check_colouring(ortho_structure(axes3()), r.assignment) == []
    assert isinstance(colouring_search(peres33()), Uncolourable)
    empty = colouring_search(RaySet("empty", []))
    assert empty.colourable and empty.assignment == {}


def test_independent_triples_stay_colourable():
    rot = np.linalg.qr(np.random.default_rng(3).normal(size=(3, 3)))[0]
    combined = axes3().union(RaySet("rot", [rot[:, i] for i in range(3)]))
    r = colouring_search(combined)
    assert r.colourable
    assert check_colouring(ortho_structure(combined), r.assignment) == []


def test_small_sets_agree_with_bruteforce():
    rng = np.random.default_rng(11)
    rays = peres33().rays
    for _ in range(20):
        idx = rng.choice(len(rays), size=12, replace=False)
        sub = RaySet("sub", [rays[i] for i in idx])
        got = colouring_search(sub).colourable
        assert got == is_colourable_bruteforce([r.vector for r in sub.rays])


def test_verdict_is_deterministic():
    a, b = colouring_search(peres33()), colouring_search(peres33())
    assert a.nodes_explored == b.nodes_explored


def test_file_roundtrip(tmp_path):
    text = dumps_rayset(peres33())
    back = loads_rayset("# comment line\n" + text)
    assert back.name == "peres33" and back.rays == peres33().rays
    p = tmp_path / "rays.txt"
    p.write_text(text)
    assert load_rayset(p).rays == peres33().rays


def test_pick_pair():
    a = axes3()
    s = ortho_structure(a)
    rng = np.random.default_rng(0)
    v1, v2 = pick_orthogonal_pair(a, rng, s)
    assert v1.is_orthogonal(v2)
    x = pick_orthogonal_pair(a, np.random.default_rng(5))
    assert x == pick_orthogonal_pair(a, np.random.default_rng(5))
    with pytest.raises(NoOrthogonalPair):
        pick_orthogonal_pair(RaySet("one", [(1, 0, 0)]), rng)


def test_pick_pair_uniform_chi_square():
    rays = peres33()
    s = ortho_structure(rays)
    rng = np.random.default_rng(2)
    index = {(rays.rays[i], rays.rays[j]): k for k, (i, j) in enumerate(s.pairs)}
    counts = np.zeros(len(s.pairs))
    for _ in range(100_000):
        counts[index[pick_orthogonal_pair(rays, rng, s)]] += 1
    expected = 100_000 / len(s.pairs)
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    dof = len(s.pairs) - 1
    assert chi2 < dof + 4 * np.sqrt(2 * dof)
