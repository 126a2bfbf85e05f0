import math

import numpy as np
import pytest
import scipy.sparse as sp

from bosonmap.fock import CompositeBasis, FockBasis
from bosonmap.lindblad import (
    HBAR_EV_FS,
    LindbladSystem,
    Trajectory,
    evolve,
    expectation,
    rhs,
)
from bosonmap.operators import (
    SparseOperator,
    boson_mode,
    identity_like,
    kron,
    normal_ordered_string,
)


def decaying_cavity(dim=4, gamma=0.3):
    a, a_dag, n = boson_mode(dim, "cav")
    h = SparseOperator(sp.csr_matrix((dim, dim)), "cav")
    return LindbladSystem(h, [math.sqrt(gamma) * a]), n


def jaynes_cummings(g=0.1, omega=1.0, gamma_c=0.0):
    basis = FockBasis(2, 1)
    comp = CompositeBasis(basis, 2)
    a, a_dag, n_cav = boson_mode(2)
    i_em = identity_like(len(basis), basis.tag)
    i_cav = identity_like(2, a.basis_tag)
    n_e = normal_ordered_string(basis, [1], [1])
    n_g = normal_ordered_string(basis, [0], [0])
    h = (
        0.5 * omega * kron(n_e - n_g, i_cav, comp)
        + omega * kron(i_em, n_cav, comp)
        + g * (kron(normal_ordered_string(basis, [1], [0]), a, comp)
               + kron(normal_ordered_string(basis, [0], [1]), a_dag, comp))
    )
    collapses = [math.sqrt(gamma_c) * kron(i_em, a, comp)] if gamma_c else []
    rho0 = np.zeros((comp.size,) * 2, dtype=complex)
    k = comp.index((0, 1), 0)
    rho0[k, k] = 1.0
    obs = {
        "excited": kron(n_e, i_cav, comp),
        "cavity": kron(i_em, n_cav, comp),
    }
    return LindbladSystem(h, collapses), rho0, obs


def test_rhs_zero_system():
    dim = 5
    h = SparseOperator(sp.csr_matrix((dim, dim)), "z")
    system = LindbladSystem(h, [])
    rho = np.diag(np.linspace(0.1, 0.3, dim)).astype(complex)
    assert np.abs(rhs(system, rho)).max() == 0.0


def test_rhs_single_mode_decay_rate():
    system, n = decaying_cavity(dim=4, gamma=0.3)
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = 1.0
    dn_dt = np.trace(n.toarray() @ rhs(system, rho)).real
    assert dn_dt == pytest.approx(-0.3 / HBAR_EV_FS, rel=1e-12)


def test_rhs_trace_free_and_hermitian_preserving():
    rng = np.random.default_rng(2)
    system, _ = decaying_cavity()
    raw = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    herm = raw + raw.conj().T
    out = rhs(system, herm)
    assert abs(np.trace(out)) < 1e-13
    assert np.abs(out - out.conj().T).max() < 1e-13


def test_rhs_linearity_and_dagger_covariance():
    rng = np.random.default_rng(4)
    system, _ = decaying_cavity()
    r1 = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    r2 = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    a, b = 0.3 - 1.1j, 2.0 + 0.4j
    lin = rhs(system, a * r1 + b * r2) - a * rhs(system, r1) - b * rhs(system, r2)
    assert np.abs(lin).max() < 1e-13
    assert np.abs(rhs(system, r1).conj().T - rhs(system, r1.conj().T)).max() < 1e-13


def test_exponential_photon_decay():
    gamma = 0.3
    system, n = decaying_cavity(gamma=gamma)
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[1, 1] = 1.0
    t = np.linspace(0, 20, 41)
    traj = evolve(system, rho0, t, observables={"n": n}, rtol=1e-10, atol=1e-12)
    assert np.abs(traj.observables["n"] - np.exp(-gamma * t / HBAR_EV_FS)).max() < 1e-9


def test_decay_reaches_vacuum():
    gamma = 0.5
    system, n = decaying_cavity(gamma=gamma)
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[2, 2] = 1.0
    t = np.linspace(0, 60, 31)
    traj = evolve(system, rho0, t, observables={"n": n})
    assert traj.observables["n"][-1] == pytest.approx(0.0, abs=1e-6)


def test_zero_generator_keeps_state():
    dim = 3
    h = SparseOperator(sp.csr_matrix((dim, dim)), "z")
    system = LindbladSystem(h, [])
    rho0 = np.diag([0.5, 0.3, 0.2]).astype(complex)
    t = np.linspace(0, 10, 5)
    proj = SparseOperator(sp.csr_matrix(np.diag([1.0, 0, 0])), "z")
    traj = evolve(system, rho0, t, observables={"p0": proj})
    assert np.abs(traj.observables["p0"] - 0.5).max() < 1e-14


def test_jaynes_cummings_rabi_oscillation():
    g = 0.1
    system, rho0, obs = jaynes_cummings(g=g)
    period_fs = math.pi * HBAR_EV_FS / g
    t = np.linspace(0, 2 * period_fs, 201)
    traj = evolve(system, rho0, t, observables=obs, rtol=1e-11, atol=1e-13)
    expected = np.cos(g * t / HBAR_EV_FS) ** 2
    assert np.abs(traj.observables["excited"] - expected).max() < 1e-8
    # quarter and half period checks
    for frac, value in [(0.25, 0.5), (0.5, 0.0)]:
        idx = np.argmin(np.abs(t - frac * period_fs))
        assert traj.observables["excited"][idx] == pytest.approx(value, abs=1e-3)


def test_expectation_contracts():
    system, n = decaying_cavity()
    rho = np.zeros((4, 4), dtype=complex)
    rho[2, 2] = 1.0
    eye = identity_like(4, "cav")
    assert expectation(eye, rho) == pytest.approx(1.0)
    assert expectation(n, rho) == pytest.approx(2.0)
    val, imag = expectation(n, rho, return_imag=True)
    assert imag == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError, match="does not match"):
        expectation(n, np.zeros((3, 3), dtype=complex))


def test_evolve_validates_inputs():
    system, n = decaying_cavity()
    good = np.zeros((4, 4), dtype=complex)
    good[0, 0] = 1.0
    with pytest.raises(ValueError, match="start at 0"):
        evolve(system, good, np.linspace(1, 2, 5))
    with pytest.raises(ValueError, match="Hermitian"):
        bad = good.copy()
        bad[0, 1] = 1e-3
        evolve(system, bad, np.linspace(0, 1, 5))
    with pytest.raises(ValueError, match="trace"):
        evolve(system, 2 * good, np.linspace(0, 1, 5))
    with pytest.raises(ValueError, match="not Hermitian"):
        LindbladSystem(SparseOperator(sp.csr_matrix(np.array([[0, 1], [0, 0]])), "x"), [])


def test_trajectory_length_validation():
    with pytest.raises(ValueError, match="series"):
        Trajectory(times_fs=np.zeros(3), observables={"x": np.zeros(2)})


def test_adams_and_dopri5_agree_on_lindblad():
    system, rho0, obs = jaynes_cummings(g=0.08, gamma_c=0.05)
    t = np.linspace(0, 120, 61)
    t1 = evolve(system, rho0, t, observables=obs, method="dopri5", rtol=1e-10, atol=1e-12)
    t2 = evolve(system, rho0, t, observables=obs, method="adams", rtol=1e-10, atol=1e-12)
    for key in obs:
        assert np.abs(t1.observables[key] - t2.observables[key]).max() < 1e-7


def test_tolerance_halving_convergence():
    system, rho0, obs = jaynes_cummings(g=0.08, gamma_c=0.05)
    t = np.linspace(0, 100, 51)
    base = evolve(system, rho0, t, observables=obs, rtol=1e-8, atol=1e-10)
    tight = evolve(system, rho0, t, observables=obs, rtol=5e-9, atol=5e-11)
    for key in obs:
        assert np.abs(base.observables[key] - tight.observables[key]).max() < 1e-6


def test_uniform_energy_shift_leaves_trajectory_invariant():
    basis = FockBasis(2, 1)
    system, rho0, obs = jaynes_cummings(g=0.1, gamma_c=0.1)
    shifted = LindbladSystem(system.hamiltonian, system.collapses, energy_shift=0.77)
    t = np.linspace(0, 80, 41)
    a = evolve(system, rho0, t, observables=obs, rtol=1e-11, atol=1e-13)
    b = evolve(shifted, rho0, t, observables=obs, rtol=1e-11, atol=1e-13)
    for key in obs:
        assert np.abs(a.observables[key] - b.observables[key]).max() < 1e-8


def test_block_structure_matches_full_evolution():
    system, rho0, obs = jaynes_cummings(g=0.09, gamma_c=0.2)
    # excitation grading: emitter excited state + photon number
    basis = FockBasis(2, 1)
    w_em = basis.states @ np.array([0, 1])
    weights = (w_em[:, None] + np.arange(2)[None, :]).ravel()
    blocked = LindbladSystem(system.hamiltonian, system.collapses, sector_weights=weights)
    t = np.linspace(0, 100, 51)
    a = evolve(system, rho0, t, observables=obs, rtol=1e-11, atol=1e-13)
    b = evolve(blocked, rho0, t, observables=obs, rtol=1e-11, atol=1e-13)
    # sectors 0 and 1 are populated/reachable; the empty sector 2 is dropped
    assert b.diagnostics["n_blocks"] == 2
    for key in obs:
        assert np.abs(a.observables[key] - b.observables[key]).max() < 1e-9


def test_sector_weights_reject_nonconserving_hamiltonian():
    dim = 3
    h = SparseOperator(sp.csr_matrix(np.array([[0, 1.0, 0], [1.0, 0, 0], [0, 0, 0]])), "x")
    system = LindbladSystem(h, [], sector_weights=np.array([0, 1, 2]))
    rho0 = np.diag([1.0, 0, 0]).astype(complex)
    with pytest.raises(ValueError, match="grading"):
        evolve(system, rho0, np.linspace(0, 1, 3))


def test_block_mode_rejects_off_block_initial_state():
    system, rho0, obs = jaynes_cummings(g=0.09)
    basis = FockBasis(2, 1)
    w_em = basis.states @ np.array([0, 1])
    weights = (w_em[:, None] + np.arange(2)[None, :]).ravel()
    blocked = LindbladSystem(system.hamiltonian, system.collapses, sector_weights=weights)
    mixed = rho0.copy()
    # coherence between different excitation sectors
    k0 = int(np.flatnonzero(weights == 0)[0])
    k1 = int(np.flatnonzero(weights == 1)[0])
    mixed[k0, k1] = mixed[k1, k0] = 1e-3
    with pytest.raises(ValueError, match="sector blocks"):
        evolve(blocked, mixed, np.linspace(0, 1, 3))


def test_leakage_warning_emitted():
    # driveless cavity with photons initially at the top level
    dim = 3
    a, a_dag, n = boson_mode(dim, "cav")
    h = SparseOperator(sp.csr_matrix((dim, dim)), "cav")
    system = LindbladSystem(h, [0.4 * a])
    rho0 = np.zeros((dim, dim), dtype=complex)
    rho0[dim - 1, dim - 1] = 1.0
    top = SparseOperator(
        sp.csr_matrix((np.array([1.0 + 0j]), ([dim - 1], [dim - 1])), shape=(dim, dim)), "cav"
    )
    with pytest.warns(RuntimeWarning, match="leakage"):
        evolve(system, rho0, np.linspace(0, 5, 5),
               diagnostic_observables={"leakage": top}, leakage_threshold=1e-6)


def test_positivity_diagnostic_reported():
    system, rho0, obs = jaynes_cummings(g=0.1, gamma_c=0.1)
    t = np.linspace(0, 50, 26)
    traj = evolve(system, rho0, t, observables=obs)
    assert traj.diagnostics["min_eigenvalue"] > -1e-8
    assert traj.diagnostics["max_trace_error"] < 1e-10
    assert traj.diagnostics["max_herm_error"] < 1e-12
