import itertools
import math

import numpy as np
import pytest

from bosonmap.fock import CompositeBasis, FockBasis, restrict_composite, sector_dimension


def test_enumeration_counts_match_stars_and_bars():
    for d in range(1, 7):
        for n in range(0, 21):
            assert len(FockBasis(d, n)) == math.comb(n + d - 1, n)


def test_paper_sector_sizes():
    assert len(FockBasis(3, 2)) == 6
    assert len(FockBasis(10, 3)) == 220
    assert len(FockBasis(10, 5)) == 2002
    assert sector_dimension(3, 17) == 171


def test_ordering_descending_lexicographic():
    basis = FockBasis(3, 2)
    states = list(basis)
    assert states == [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]
    assert states == sorted(states, reverse=True)


def test_rank_unrank_bijection():
    rng = np.random.default_rng(7)
    for _ in range(20):
        d = int(rng.integers(1, 6))
        n = int(rng.integers(0, 9))
        basis = FockBasis(d, n)
        for k in range(len(basis)):
            assert basis.rank(basis.unrank(k)) == k


def test_fully_inverted_rank_matches_linear_scan():
    basis = FockBasis(4, 3)
    target = (0, 0, 0, 3)
    scan = next(i for i, s in enumerate(basis) if s == target)
    assert basis.rank(target) == scan == len(basis) - 1


def test_rank_rejects_wrong_sector():
    basis = FockBasis(3, 2)
    with pytest.raises(ValueError):
        basis.rank((1, 1, 1))  # three particles
    with pytest.raises(ValueError):
        basis.rank((1, 1))     # wrong mode count
    with pytest.raises(ValueError):
        basis.rank((3, -1, 0))


def test_basis_size_guard():
    with pytest.raises(ValueError, match="exceeds"):
        FockBasis(40, 40)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        FockBasis(0, 2)
    with pytest.raises(ValueError):
        FockBasis(2, -1)
    with pytest.raises(ValueError):
        CompositeBasis(FockBasis(2, 1), 0)


def _brute_force_retained(d, n, cavity_dim, weights, max_exc):
    count = 0
    for occ in itertools.product(range(n + 1), repeat=d):
        if sum(occ) != n:
            continue
        for p in range(cavity_dim):
            if sum(w * k for w, k in zip(weights, occ)) + p <= max_exc:
                count += 1
    return count


def test_restriction_matches_brute_force_filter():
    # one shared vibrational quantum at most: 2 molecules, 3 vib levels, 2 photon levels
    weights = [0, 1, 2]
    comp = CompositeBasis(FockBasis(3, 2), 2, excitation_weights=weights, max_excitation=1)
    assert comp.size == _brute_force_retained(3, 2, 2, weights, 1)
    exc = comp.excitations()[comp.retained]
    assert np.all(exc <= 1)


def test_unrestricted_is_identity():
    comp = CompositeBasis(FockBasis(3, 2), 2)
    assert comp.size == comp.unrestricted_size == 6 * 2
    assert comp.retained is None


def test_restriction_idempotent_and_monotone():
    base = CompositeBasis(FockBasis(3, 2), 3, excitation_weights=[0, 1, 2], max_excitation=2)
    twice = restrict_composite(base)
    assert np.array_equal(base.retained, twice.retained)
    larger = restrict_composite(base, max_excitation=4)
    assert set(base.retained.tolist()) <= set(larger.retained.tolist())


def test_restricted_index_round_trip():
    comp = CompositeBasis(FockBasis(3, 2), 2, excitation_weights=[0, 1, 2], max_excitation=1)
    # ground state present, high-excitation state rejected
    assert comp.index((2, 0, 0), 0) >= 0
    with pytest.raises(ValueError, match="removed"):
        comp.index((0, 0, 2), 1)


def test_composite_index_ordering_emitter_major():
    basis = FockBasis(2, 1)
    comp = CompositeBasis(basis, 3)
    for i, occ in enumerate(basis):
        for p in range(3):
            assert comp.index(occ, p) == i * 3 + p
