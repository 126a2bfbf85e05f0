import itertools
import math

import numpy as np
import pytest
import scipy.sparse as sp

from bosonmap.errors import GuardError
from bosonmap.fock import FockBasis, sector_dimension
from bosonmap.operators import MBodyCoefficients, SparseOperator, commutator, second_quantize
from bosonmap.oracle import (
    FullBasis,
    build_isometry,
    collective,
    full_density_entries,
    lift_local,
    liouville_density_entries,
    mbody_first_quantized,
    permutation_operator,
    symmetric_density_entries,
    symmetrizer,
)


def test_full_basis_indexing():
    basis = FullBasis(3, 2)
    assert basis.dim == 9
    assert basis.encode((1, 2)) == 5
    assert basis.decode(5) == (1, 2)
    for i in range(9):
        assert basis.encode(basis.decode(i)) == i


def test_identity_permutation():
    basis = FullBasis(2, 3)
    op = permutation_operator(basis, (0, 1, 2))
    assert op.max_abs_diff(SparseOperator(sp.identity(8), basis.tag)) == 0.0


def test_transposition_swaps_sites():
    basis = FullBasis(2, 2)
    op = permutation_operator(basis, (1, 0))
    vec = np.zeros(4)
    vec[basis.encode((0, 1))] = 1.0
    out = op.matrix @ vec
    assert out[basis.encode((1, 0))] == 1.0


def test_permutation_composition():
    rng = np.random.default_rng(9)
    basis = FullBasis(3, 4)
    for _ in range(5):
        p = tuple(rng.permutation(4).tolist())
        q = tuple(rng.permutation(4).tolist())
        composed = tuple(p[q[j]] for j in range(4))
        lhs = permutation_operator(basis, p) @ permutation_operator(basis, q)
        rhs = permutation_operator(basis, composed)
        assert lhs.max_abs_diff(rhs) == 0.0


def test_invalid_permutation_rejected():
    basis = FullBasis(2, 2)
    with pytest.raises(ValueError, match="permutation"):
        permutation_operator(basis, (0, 0))


def test_symmetrizer_is_projector():
    s = symmetrizer(2, 3)
    assert (s @ s).max_abs_diff(s) < 1e-14
    assert s.adjoint().max_abs_diff(s) < 1e-14


def test_symmetrizer_rank_counts_symmetric_states():
    s = symmetrizer(3, 3)
    rank = round(float(np.trace(s.toarray()).real))
    assert rank == sector_dimension(3, 3) == 10


def test_symmetrizer_two_site_average():
    s = symmetrizer(2, 2)
    basis = FullBasis(2, 2)
    vec = np.zeros(4)
    vec[basis.encode((0, 1))] = 1.0
    out = s.matrix @ vec
    expected = np.zeros(4)
    expected[basis.encode((0, 1))] = 0.5
    expected[basis.encode((1, 0))] = 0.5
    assert np.abs(out - expected).max() < 1e-15


def test_symmetrizer_guard():
    with pytest.raises(GuardError, match="permutations"):
        symmetrizer(2, 9)


def test_lift_local_and_collective():
    basis = FullBasis(2, 3)
    sz = np.diag([-0.5, 0.5])
    coll = collective(basis, sz)
    # eigenvalue on |eee> is 3/2
    vec = np.zeros(8)
    vec[basis.encode((1, 1, 1))] = 1.0
    assert (coll.matrix @ vec)[basis.encode((1, 1, 1))] == pytest.approx(1.5)
    s = symmetrizer(2, 3)
    assert commutator(s, coll).max_abs_diff(0.0 * coll) < 1e-14


def test_lifts_at_different_sites_commute():
    basis = FullBasis(3, 3)
    rng = np.random.default_rng(1)
    op1 = rng.standard_normal((3, 3))
    op2 = rng.standard_normal((3, 3))
    a = lift_local(basis, op1, 0)
    b = lift_local(basis, op2, 2)
    assert commutator(a, b).nnz == 0 or commutator(a, b).max_abs_diff(0.0 * a) < 1e-14
    with pytest.raises(ValueError, match="site"):
        lift_local(basis, op1, 3)


def test_mbody_order_one_is_collective():
    basis = FullBasis(3, 3)
    rng = np.random.default_rng(6)
    v = rng.standard_normal((3, 3))
    a = mbody_first_quantized(basis, MBodyCoefficients(1, v))
    b = collective(basis, v)
    assert a.max_abs_diff(b) < 1e-13


def test_mbody_two_body_hand_computation():
    # d=2, N=2, V all ones: (1/2) sum_{i != j} (sum_ab sigma^i_ab)(sum_cd sigma^j_cd)
    basis = FullBasis(2, 2)
    v = np.ones((2, 2, 2, 2))
    op = mbody_first_quantized(basis, MBodyCoefficients(2, v)).toarray()
    ones = np.ones((2, 2))
    hand = np.kron(ones, ones)  # sigma^0 sigma^1 + sigma^1 sigma^0 halved = one kron
    assert np.abs(op - hand).max() < 1e-13


def test_mbody_matches_primed_sum_brute_force():
    rng = np.random.default_rng(12)
    d, n = 2, 3
    basis = FullBasis(d, n)
    v = rng.standard_normal((d, d, d, d))
    mine = mbody_first_quantized(basis, MBodyCoefficients(2, v)).toarray()
    brute = np.zeros((basis.dim, basis.dim))
    for i, j in itertools.permutations(range(n), 2):
        for b1 in range(d):
            for b2 in range(d):
                for a1 in range(d):
                    for a2 in range(d):
                        sig1 = np.zeros((d, d))
                        sig1[b1, a1] = 1.0
                        sig2 = np.zeros((d, d))
                        sig2[b2, a2] = 1.0
                        term = (
                            lift_local(basis, sig1, i).toarray()
                            @ lift_local(basis, sig2, j).toarray()
                        )
                        brute += 0.5 * v[b1, b2, a1, a2] * term.real
    assert np.abs(mine - brute).max() < 1e-12


def test_isometry_columns():
    iso = build_isometry(2, 2)
    full, fock = iso.full_basis, iso.fock_basis
    col = iso.matrix[:, fock.rank((1, 1))].toarray().ravel()
    expected = np.zeros(4)
    expected[full.encode((0, 1))] = 1 / math.sqrt(2)
    expected[full.encode((1, 0))] = 1 / math.sqrt(2)
    assert np.abs(col - expected).max() < 1e-15
    # single-assignment column has a single unit entry
    col2 = iso.matrix[:, fock.rank((0, 2))].toarray().ravel()
    assert np.abs(np.linalg.norm(col2) - 1.0) < 1e-15
    assert np.count_nonzero(col2) == 1


def test_isometry_orthonormal_and_symmetric():
    iso = build_isometry(3, 4)
    gram = (iso.matrix.conjugate().transpose() @ iso.matrix).toarray()
    assert np.abs(gram - np.eye(gram.shape[0])).max() < 1e-12
    s = symmetrizer(3, 4)
    st = s.matrix @ iso.matrix
    assert np.abs((st - iso.matrix).toarray()).max() < 1e-12


def test_isometry_conjugation_reproduces_second_quantization():
    rng = np.random.default_rng(21)
    d, n = 3, 3
    iso = build_isometry(d, n)
    fock = FockBasis(d, n)
    # one-body
    v1 = rng.standard_normal((d, d))
    down = iso.conjugate(mbody_first_quantized(iso.full_basis, MBodyCoefficients(1, v1)))
    ref = second_quantize(fock, MBodyCoefficients(1, v1))
    assert down.max_abs_diff(ref) < 1e-12
    # two-body
    v2 = rng.standard_normal((d, d, d, d))
    down2 = iso.conjugate(mbody_first_quantized(iso.full_basis, MBodyCoefficients(2, v2)))
    ref2 = second_quantize(fock, MBodyCoefficients(2, v2))
    assert down2.max_abs_diff(ref2) < 1e-12


def test_full_basis_guard():
    with pytest.raises(GuardError, match="guard"):
        FullBasis(10, 9)


def test_entry_count_formulas():
    # factor-37 comparison point
    ratio = liouville_density_entries(3, 17, 6) / symmetric_density_entries(3, 17, 6)
    assert ratio == pytest.approx(36.99, abs=0.01)
    assert symmetric_density_entries(3, 17, 1) == 171**2
    assert full_density_entries(2, 1, 1) == symmetric_density_entries(2, 1, 1) == 4
    assert liouville_density_entries(3, 17, 2) == math.comb(25, 17) * 4
