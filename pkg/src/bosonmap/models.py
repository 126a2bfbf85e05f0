"""The four built-in emitter-cavity models.

Each constructor returns a ready-to-run Model: composite basis,
Hamiltonian, collapse operators, initial density matrix, named
observables, and (when the dynamics conserve a total-excitation grading)
the sector weights that let the engine evolve block-diagonally.

Models
------
tc           N two-level emitters + cavity, rotating-wave coupling.
htc          Two displaced-oscillator electronic surfaces per emitter
             (vibronic structure), cavity coupling weighted by
             vibrational overlap factors, cavity decay.
three_level  Equally spaced three-level ladders, all-to-all two-body
             dipole-dipole term, collective downward emission, cavity
             decay.
vsc          One harmonic vibrational mode per molecule resonant with
             the cavity, optionally restricted to a total-excitation
             subspace.

Every model is also available in brute-force first-quantized form on the
full d^N product space (``build_full_model``) for certification runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError
from .fock import CompositeBasis, FockBasis, sector_dimension
from .lindblad import LindbladSystem
from .operators import (
    MBodyCoefficients,
    SparseOperator,
    boson_mode,
    identity_like,
    kron,
    normal_ordered_string,
    second_quantize,
)
from . import oracle
from .oracle import FullBasis, FullComposite, collective, mbody_first_quantized

__all__ = [
    "ModelSpec",
    "Model",
    "franck_condon",
    "franck_condon_matrix",
    "tavis_cummings",
    "holstein_tavis_cummings",
    "three_level",
    "vsc",
    "build_model",
    "build_full_model",
    "initial_state",
    "run_model",
    "run_full_model",
    "dimension_report",
    "MODEL_KINDS",
]

MODEL_KINDS = ("tc", "htc", "three_level", "vsc")


@dataclass(frozen=True)
class ModelSpec:
    """Resolved numeric description of one model instance.

    Energies and rates are in eV, times in fs. Create via
    ``ModelSpec.create(kind, n_emitters, **overrides)`` so that every
    model-specific default is filled in (the CLI manifest serializes the
    resolved values).
    """

    kind: str
    n_emitters: int
    # energies / couplings (eV)
    omega_0: float = 0.0
    omega_c: float = 0.0
    omega_e: float = 0.0
    omega_v: float = 0.0
    lambda_v: float = 0.0
    g: float = 0.0
    dipole_d: float = 0.0
    gamma_cavity: float = 0.0
    gamma_down: float = 0.0
    # truncations
    n_levels: int = 0          # three_level ladder size / vsc vibrational levels
    n_vib_ground: int = 0      # htc
    n_vib_excited: int = 0     # htc
    cavity_dim: int = 0
    max_excitation: int | None = None
    # time grid
    t_max_fs: float = 0.0
    samples: int = 601

    @classmethod
    def create(cls, kind: str, n_emitters: int, **overrides) -> "ModelSpec":
        kind = kind.lower()
        if kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
        if n_emitters < 1:
            raise ConfigError(f"n_emitters must be >= 1, got {n_emitters}")
        base: dict = {"kind": kind, "n_emitters": int(n_emitters)}
        if kind == "tc":
            base.update(omega_0=1.0, omega_c=1.0, g=0.1, gamma_cavity=0.15, t_max_fs=200.0)
        elif kind == "htc":
            base.update(
                omega_e=3.5, omega_v=0.182, lambda_v=0.096, g=0.035, gamma_cavity=0.2,
                n_vib_ground=6, n_vib_excited=4, t_max_fs=300.0,
            )
        elif kind == "three_level":
            base.update(
                n_levels=3, omega_e=1.0, omega_c=1.0, dipole_d=0.1,
                gamma_cavity=0.15, gamma_down=0.05, t_max_fs=100.0,
                g=0.15 / math.sqrt(n_emitters),
            )
        elif kind == "vsc":
            base.update(omega_v=0.2, g=0.01, n_levels=4, t_max_fs=400.0)
        unknown = set(overrides) - {f.name for f in cls.__dataclass_fields__.values()}
        if unknown:
            raise ConfigError(f"unknown ModelSpec fields: {sorted(unknown)}")
        base.update(overrides)
        # resolved defaults that depend on other fields
        if kind == "htc" and "omega_c" not in overrides:
            base["omega_c"] = base["omega_e"] - 2 * base["lambda_v"] ** 2 / base["omega_v"]
        if kind == "vsc" and "omega_c" not in overrides:
            base["omega_c"] = base["omega_v"]
        if "cavity_dim" not in overrides or not overrides.get("cavity_dim"):
            base["cavity_dim"] = int(n_emitters) + 1
        spec = cls(**base)
        spec.validate()
        return spec

    def validate(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}")
        for name in ("gamma_cavity", "gamma_down"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.cavity_dim < 1:
            raise ConfigError("cavity_dim must be >= 1")
        if self.n_emitters < 1:
            raise ConfigError("n_emitters must be >= 1")
        if self.kind == "htc":
            if self.n_vib_ground < 1 or self.n_vib_excited < 1:
                raise ConfigError("HTC needs at least one vibrational level per surface")
            if self.omega_v <= 0:
                raise ConfigError("HTC needs omega_v > 0")
        if self.kind in ("three_level", "vsc") and self.n_levels < 2:
            raise ConfigError(f"{self.kind} needs n_levels >= 2")
        if self.max_excitation is not None and self.max_excitation < 0:
            raise ConfigError("max_excitation must be >= 0")
        if self.t_max_fs <= 0 or self.samples < 2:
            raise ConfigError("need t_max_fs > 0 and samples >= 2")

    @property
    def emitter_levels(self) -> int:
        """Number of levels per emitter (the d of the mapping)."""
        if self.kind == "tc":
            return 2
        if self.kind == "htc":
            return self.n_vib_ground + self.n_vib_excited
        return self.n_levels

    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max_fs, self.samples)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class Model:
    """Everything needed to evolve and observe one model instance.

    ``leakage_threshold`` is None when the cavity truncation is exact
    (rotating-wave models with cavity_dim = N+1 and decay-only loss keep
    the photon number bounded by N, so the top level holds genuine
    population); it is set where the truncation is an approximation and
    the top-level population must stay negligible.
    """

    spec: ModelSpec
    basis: object
    hamiltonian: SparseOperator
    collapses: list
    rho0: np.ndarray
    observables: dict
    diagnostic_observables: dict = field(default_factory=dict)
    sector_weights: np.ndarray | None = None
    leakage_threshold: float | None = None
    info: dict = field(default_factory=dict)

    def system(self, energy_shift: float = 0.0, use_sectors: bool = True) -> LindbladSystem:
        return LindbladSystem(
            self.hamiltonian,
            self.collapses,
            sector_weights=self.sector_weights if use_sectors else None,
            energy_shift=energy_shift,
        )


# --- Franck-Condon factors ----------------------------------------------------


def franck_condon_matrix(lambda_v: float, omega_v: float, n_upper: int, n_lower: int) -> np.ndarray:
    """Overlap matrix F[nu, nu'] = <nu; displaced | nu'> of two harmonic ladders.

    The upper-surface oscillator is displaced by the dimensionless shift
    delta = lambda_v / omega_v. Computed by the two-index recursion

        sqrt(m+1) G(m+1, n) = alpha G(m, n) + sqrt(n) G(m, n-1),

    with alpha = -delta and G(0, n) = exp(-delta^2/2) (+delta)^n / sqrt(n!),
    which is numerically stable for the displacements used here. Rows and
    columns square-sum to 1 as the truncation grows.
    """
    if omega_v <= 0:
        raise ValueError("omega_v must be positive")
    if n_upper < 1 or n_lower < 1:
        raise ValueError("need at least one level on each surface")
    delta = lambda_v / omega_v
    alpha = -delta
    g = np.zeros((n_upper, n_lower))
    pref = math.exp(-0.5 * delta * delta)
    for n in range(n_lower):
        g[0, n] = pref * (-alpha) ** n / math.sqrt(math.factorial(n))
    for m in range(n_upper - 1):
        for n in range(n_lower):
            lower = math.sqrt(n) * g[m, n - 1] if n else 0.0
            g[m + 1, n] = (alpha * g[m, n] + lower) / math.sqrt(m + 1)
    return g


def franck_condon(lambda_v: float, omega_v: float, nu: int, nu_prime: int) -> float:
    """Single overlap <nu; displaced | nu'> (see franck_condon_matrix)."""
    if nu < 0 or nu_prime < 0:
        raise ValueError("vibrational indices must be >= 0")
    return float(franck_condon_matrix(lambda_v, omega_v, nu + 1, nu_prime + 1)[nu, nu_prime])


# --- shared assembly helpers ---------------------------------------------------


def _number_op(basis: FockBasis, mode: int) -> SparseOperator:
    return normal_ordered_string(basis, [mode], [mode])


def _emitter_diagonal(basis: FockBasis, energies) -> SparseOperator:
    values = basis.states @ np.asarray(energies, dtype=float)
    return SparseOperator(sp.diags(values.astype(np.complex128)), basis.tag)


def _top_cavity_projector(dim: int) -> SparseOperator:
    proj = sp.csr_matrix(
        (np.array([1.0 + 0j]), ([dim - 1], [dim - 1])), shape=(dim, dim)
    )
    return SparseOperator(proj, f"mode({dim})")


def _composite_weights(comp: CompositeBasis, mode_weights) -> np.ndarray:
    w = (comp.emitter_basis.states @ np.asarray(mode_weights, dtype=np.int64))[:, None]
    full = (w + np.arange(comp.cavity_dim)[None, :]).ravel()
    return full[comp.retained] if comp.restricted else full


def _pure_state(comp: CompositeBasis, occ, n_cav: int = 0) -> np.ndarray:
    rho = np.zeros((comp.size, comp.size), dtype=np.complex128)
    i = comp.index(occ, n_cav)
    rho[i, i] = 1.0
    return rho


# --- Tavis-Cummings -------------------------------------------------------------


def tavis_cummings(spec: ModelSpec) -> Model:
    """N two-level emitters + cavity in the rotating-wave approximation.

    H = (omega_0/2)(n_e - n_g) + omega_c a†a + g (a b_e†b_g + a† b_g†b_e),
    optional cavity decay sqrt(gamma_c) a, fully inverted start.
    """
    if spec.kind != "tc":
        raise ConfigError(f"tavis_cummings got spec of kind {spec.kind!r}")
    basis = FockBasis(2, spec.n_emitters)
    comp = CompositeBasis(basis, spec.cavity_dim)
    a, a_dag, n_cav = boson_mode(spec.cavity_dim)
    i_em = identity_like(len(basis), basis.tag)
    i_cav = identity_like(spec.cavity_dim, a.basis_tag)

    n_g = _number_op(basis, 0)
    n_e = _number_op(basis, 1)
    raise_em = normal_ordered_string(basis, [1], [0])   # b_e† b_g
    lower_em = normal_ordered_string(basis, [0], [1])   # b_g† b_e

    h = (
        0.5 * spec.omega_0 * kron(n_e - n_g, i_cav, comp)
        + spec.omega_c * kron(i_em, n_cav, comp)
        + spec.g * (kron(raise_em, a, comp) + kron(lower_em, a_dag, comp))
    )
    collapses = []
    if spec.gamma_cavity > 0:
        collapses.append(math.sqrt(spec.gamma_cavity) * kron(i_em, a, comp))

    observables = {
        "cavity_population": kron(i_em, n_cav, comp),
        "excited_population": kron(n_e, i_cav, comp),
    }
    diagnostics = {
        "emitter_number": kron(n_g + n_e, i_cav, comp),
        "leakage": kron(i_em, _top_cavity_projector(spec.cavity_dim), comp),
    }
    return Model(
        spec=spec,
        basis=comp,
        hamiltonian=h,
        collapses=collapses,
        rho0=initial_state(spec, comp),
        observables=observables,
        diagnostic_observables=diagnostics,
        sector_weights=_composite_weights(comp, [0, 1]),
        info={"emitter_dim": len(basis), "composite_dim": comp.size},
    )


# --- Holstein-Tavis-Cummings -----------------------------------------------------


def holstein_tavis_cummings(spec: ModelSpec) -> Model:
    """Vibronic emitters (displaced-oscillator surfaces) + lossy cavity.

    Emitter modes are the single-molecule eigenstates: (g, nu) for
    nu < n_vib_ground with energy nu*omega_v, then (e, nu) for
    nu < n_vib_excited with energy omega_e + nu*omega_v - lambda_v^2/omega_v.
    The cavity couples through the vibrational overlap factors
    F[nu, nu'] : g sum (a F b_{e,nu}† b_{g,nu'} + h.c.).
    """
    if spec.kind != "htc":
        raise ConfigError(f"holstein_tavis_cummings got spec of kind {spec.kind!r}")
    nvg, nve = spec.n_vib_ground, spec.n_vib_excited
    d = nvg + nve
    basis = FockBasis(d, spec.n_emitters)
    comp = CompositeBasis(basis, spec.cavity_dim)
    a, a_dag, n_cav = boson_mode(spec.cavity_dim)
    i_em = identity_like(len(basis), basis.tag)
    i_cav = identity_like(spec.cavity_dim, a.basis_tag)

    energies = [spec.omega_v * nu for nu in range(nvg)]
    shift = spec.lambda_v**2 / spec.omega_v
    energies += [spec.omega_e + spec.omega_v * nu - shift for nu in range(nve)]

    fc = franck_condon_matrix(spec.lambda_v, spec.omega_v, nve, nvg)
    raise_em = sp.csr_matrix((len(basis),) * 2, dtype=np.complex128)
    for nu in range(nve):
        for nup in range(nvg):
            if fc[nu, nup] == 0.0:
                continue
            term = normal_ordered_string(basis, [nvg + nu], [nup])
            raise_em = raise_em + fc[nu, nup] * term.matrix
    raise_em = SparseOperator(raise_em, basis.tag)

    h = (
        kron(_emitter_diagonal(basis, energies), i_cav, comp)
        + spec.omega_c * kron(i_em, n_cav, comp)
        + spec.g * (kron(raise_em, a, comp) + kron(raise_em.adjoint(), a_dag, comp))
    )
    collapses = []
    if spec.gamma_cavity > 0:
        collapses.append(math.sqrt(spec.gamma_cavity) * kron(i_em, a, comp))

    n_exc_modes = sum(
        (_number_op(basis, nvg + nu) for nu in range(1, nve)),
        start=_number_op(basis, nvg),
    )
    n_total = sum((_number_op(basis, m) for m in range(1, d)), start=_number_op(basis, 0))
    per_mol = 1.0 / spec.n_emitters
    observables = {
        "cavity_population_per_molecule": per_mol * kron(i_em, n_cav, comp),
        "excited_population_per_molecule": per_mol * kron(n_exc_modes, i_cav, comp),
    }
    diagnostics = {
        "emitter_number": kron(n_total, i_cav, comp),
        "leakage": kron(i_em, _top_cavity_projector(spec.cavity_dim), comp),
    }
    mode_weights = [0] * nvg + [1] * nve
    rho0, fc_leak = _htc_initial_state(spec, comp, fc)
    return Model(
        spec=spec,
        basis=comp,
        hamiltonian=h,
        collapses=collapses,
        rho0=rho0,
        observables=observables,
        diagnostic_observables=diagnostics,
        sector_weights=_composite_weights(comp, mode_weights),
        info={
            "emitter_dim": len(basis),
            "composite_dim": comp.size,
            "fc_truncation_leakage": fc_leak,
        },
    )


def _htc_fc_amplitudes(spec: ModelSpec, fc: np.ndarray):
    """Renormalized vertical-transition amplitudes over the excited vib levels."""
    c = fc[:, 0].astype(float)
    norm2 = float(np.dot(c, c))
    if norm2 <= 0:
        raise ConfigError("vertical transition has zero weight after vib truncation")
    return c / math.sqrt(norm2), 1.0 - norm2


def _htc_initial_state(spec: ModelSpec, comp: CompositeBasis, fc: np.ndarray):
    """All molecules vertically excited: [sum_nu c_nu b_{e,nu}†]^N / sqrt(N!) |vac>."""
    c, leak = _htc_fc_amplitudes(spec, fc)
    nvg, nve = spec.n_vib_ground, spec.n_vib_excited
    n = spec.n_emitters
    basis = comp.emitter_basis
    psi_em = np.zeros(len(basis), dtype=np.complex128)
    for idx, occ in enumerate(basis):
        if sum(occ[:nvg]) != 0:
            continue
        ns = occ[nvg:]
        amp = math.sqrt(math.factorial(n))
        for nu, k in enumerate(ns):
            amp *= c[nu] ** k / math.sqrt(math.factorial(k))
        psi_em[idx] = amp
    # assemble in the composite basis with the cavity in vacuum
    psi = np.zeros(comp.size, dtype=np.complex128)
    if comp.restricted:
        raise ConfigError("HTC does not support excitation-restricted bases")
    psi[np.arange(len(basis)) * comp.cavity_dim] = psi_em
    return np.outer(psi, psi.conj()), leak


# --- three-level ladder ----------------------------------------------------------


def _ladder_matrix(d: int) -> np.ndarray:
    """mu^(lowering) = sum_nu |nu><nu+1| on one emitter (levels 0..d-1)."""
    m = np.zeros((d, d))
    for k in range(d - 1):
        m[k, k + 1] = 1.0
    return m


def three_level(spec: ModelSpec) -> Model:
    """Equally spaced d-level ladders with dipole-dipole coupling and a cavity.

    H = sum_nu nu*omega_e b_nu†b_nu + omega_c a†a + H_dd
        + g sum_nu (b_nu†b_{nu+1} a† + h.c.),
    H_dd = D * (sum over ordered distinct emitter pairs of mu_i mu_j),
    collapses sqrt(gamma_c) a and sqrt(Gamma_down) b_nu†b_{nu+1},
    fully inverted start. Level nu (1-based) has energy nu*omega_e.
    """
    if spec.kind != "three_level":
        raise ConfigError(f"three_level got spec of kind {spec.kind!r}")
    d = spec.n_levels
    basis = FockBasis(d, spec.n_emitters)
    comp = CompositeBasis(basis, spec.cavity_dim)
    a, a_dag, n_cav = boson_mode(spec.cavity_dim)
    i_em = identity_like(len(basis), basis.tag)
    i_cav = identity_like(spec.cavity_dim, a.basis_tag)

    energies = [(k + 1) * spec.omega_e for k in range(d)]
    mu = _ladder_matrix(d) + _ladder_matrix(d).T
    v2 = 2.0 * spec.dipole_d * np.einsum("ij,kl->ikjl", mu, mu)
    h_dd = second_quantize(basis, MBodyCoefficients(2, v2))

    lower_strings = [normal_ordered_string(basis, [k], [k + 1]) for k in range(d - 1)]
    lower_sum = sum(lower_strings[1:], start=lower_strings[0])

    h = (
        kron(_emitter_diagonal(basis, energies), i_cav, comp)
        + spec.omega_c * kron(i_em, n_cav, comp)
        + kron(h_dd, i_cav, comp)
        + spec.g * (kron(lower_sum, a_dag, comp) + kron(lower_sum.adjoint(), a, comp))
    )
    collapses = []
    if spec.gamma_cavity > 0:
        collapses.append(math.sqrt(spec.gamma_cavity) * kron(i_em, a, comp))
    if spec.gamma_down > 0:
        for op in lower_strings:
            collapses.append(math.sqrt(spec.gamma_down) * kron(op, i_cav, comp))

    pair_norm = 1.0 / (spec.dipole_d * spec.n_emitters * (spec.n_emitters - 1)) \
        if spec.n_emitters > 1 else 0.0
    observables = {}
    for k in range(d):
        observables[f"level{k + 1}_population"] = kron(_number_op(basis, k), i_cav, comp)
    if spec.n_emitters > 1:
        observables["dipole_dipole"] = pair_norm * kron(h_dd, i_cav, comp)
    n_total = sum((_number_op(basis, m) for m in range(1, d)), start=_number_op(basis, 0))
    diagnostics = {
        "emitter_number": kron(n_total, i_cav, comp),
        "leakage": kron(i_em, _top_cavity_projector(spec.cavity_dim), comp),
    }
    return Model(
        spec=spec,
        basis=comp,
        hamiltonian=h,
        collapses=collapses,
        rho0=initial_state(spec, comp),
        observables=observables,
        diagnostic_observables=diagnostics,
        # H_dd changes the total excitation by 0 and ±2, so only its parity
        # is conserved; both collapse families flip or keep it uniformly
        sector_weights=_composite_weights(comp, np.arange(d)) % 2,
        leakage_threshold=1e-6,
        info={"emitter_dim": len(basis), "composite_dim": comp.size},
    )


# --- vibrational strong coupling ---------------------------------------------------


def vsc(spec: ModelSpec) -> Model:
    """Harmonic vibrational ladders resonant with a cavity mode.

    Emitter mode n (n-th vibrational eigenstate) has energy n*omega_v;
    the coupling is g sqrt(n+1) (a b_{n+1}†b_n + h.c.). Closed dynamics
    by default (gamma_cavity = 0 unless overridden); optional restriction
    to the subspace with sum_n n b_n†b_n + a†a <= max_excitation.
    """
    if spec.kind != "vsc":
        raise ConfigError(f"vsc got spec of kind {spec.kind!r}")
    d = spec.n_levels
    basis = FockBasis(d, spec.n_emitters)
    weights = np.arange(d)
    comp = CompositeBasis(
        basis,
        spec.cavity_dim,
        excitation_weights=weights,
        max_excitation=spec.max_excitation,
    )
    a, a_dag, n_cav = boson_mode(spec.cavity_dim)
    i_em = identity_like(len(basis), basis.tag)
    i_cav = identity_like(spec.cavity_dim, a.basis_tag)

    energies = [n * spec.omega_v for n in range(d)]
    up = sp.csr_matrix((len(basis),) * 2, dtype=np.complex128)
    for n in range(d - 1):
        up = up + math.sqrt(n + 1) * normal_ordered_string(basis, [n + 1], [n]).matrix
    up = SparseOperator(up, basis.tag)

    h = (
        kron(_emitter_diagonal(basis, energies), i_cav, comp)
        + spec.omega_c * kron(i_em, n_cav, comp)
        + spec.g * (kron(up, a, comp) + kron(up.adjoint(), a_dag, comp))
    )
    collapses = []
    if spec.gamma_cavity > 0:
        collapses.append(math.sqrt(spec.gamma_cavity) * kron(i_em, a, comp))

    vib_quanta = sp.csr_matrix((len(basis),) * 2, dtype=np.complex128)
    for n in range(1, d):
        vib_quanta = vib_quanta + n * normal_ordered_string(basis, [n], [n]).matrix
    vib_quanta = SparseOperator(vib_quanta, basis.tag)
    per_mol = 1.0 / spec.n_emitters
    observables = {
        "cavity_population": kron(i_em, n_cav, comp),
        "mean_vibrational_quanta": per_mol * kron(vib_quanta, i_cav, comp),
    }
    n_total = sum((_number_op(basis, m) for m in range(1, d)), start=_number_op(basis, 0))
    diagnostics = {
        "emitter_number": kron(n_total, i_cav, comp),
        "leakage": kron(i_em, _top_cavity_projector(spec.cavity_dim), comp),
    }
    return Model(
        spec=spec,
        basis=comp,
        hamiltonian=h,
        collapses=collapses,
        rho0=initial_state(spec, comp),
        observables=observables,
        diagnostic_observables=diagnostics,
        sector_weights=_composite_weights(comp, weights),
        info={
            "emitter_dim": len(basis),
            "composite_dim": comp.size,
            "unrestricted_dim": comp.unrestricted_size,
        },
    )


# --- initial states -----------------------------------------------------------------


def initial_state(spec: ModelSpec, comp: CompositeBasis) -> np.ndarray:
    """Default initial density matrix of a model (pure, cavity in vacuum).

    tc / three_level: every emitter in its highest level, i.e. the Fock
    state (0, ..., 0, N). htc: vertical transition — see
    holstein_tavis_cummings. vsc: one vibrational quantum shared
    symmetrically, (N-1, 1, 0, ...), falling back to the ground state if
    the restriction excludes it.
    """
    d = spec.emitter_levels
    n = spec.n_emitters
    if spec.kind in ("tc", "three_level"):
        occ = (0,) * (d - 1) + (n,)
        return _pure_state(comp, occ)
    if spec.kind == "htc":
        fc = franck_condon_matrix(spec.lambda_v, spec.omega_v, spec.n_vib_excited,
                                  spec.n_vib_ground)
        rho, _ = _htc_initial_state(spec, comp, fc)
        return rho
    if spec.kind == "vsc":
        if d >= 2 and (spec.max_excitation is None or spec.max_excitation >= 1):
            occ = (n - 1, 1) + (0,) * (d - 2)
        else:
            occ = (n,) + (0,) * (d - 1)
        return _pure_state(comp, occ)
    raise ConfigError(f"unknown model kind {spec.kind!r}")


_BUILDERS = {
    "tc": tavis_cummings,
    "htc": holstein_tavis_cummings,
    "three_level": three_level,
    "vsc": vsc,
}


def build_model(spec: ModelSpec) -> Model:
    return _BUILDERS[spec.kind](spec)


# --- first-quantized (brute-force) twins ----------------------------------------------


def _local_pieces(spec: ModelSpec):
    """Per-site (diagonal energies, raising matrix in the model's basis)."""
    if spec.kind == "tc":
        energies = np.array([-0.5 * spec.omega_0, 0.5 * spec.omega_0])
        raising = np.zeros((2, 2))
        raising[1, 0] = 1.0
        return energies, raising
    if spec.kind == "htc":
        nvg, nve = spec.n_vib_ground, spec.n_vib_excited
        shift = spec.lambda_v**2 / spec.omega_v
        energies = np.array(
            [spec.omega_v * nu for nu in range(nvg)]
            + [spec.omega_e + spec.omega_v * nu - shift for nu in range(nve)]
        )
        fc = franck_condon_matrix(spec.lambda_v, spec.omega_v, nve, nvg)
        raising = np.zeros((nvg + nve, nvg + nve))
        raising[nvg:, :nvg] = fc
        return energies, raising
    if spec.kind == "three_level":
        d = spec.n_levels
        energies = np.array([(k + 1) * spec.omega_e for k in range(d)])
        return energies, _ladder_matrix(d).T
    if spec.kind == "vsc":
        d = spec.n_levels
        energies = np.array([n * spec.omega_v for n in range(d)])
        raising = np.zeros((d, d))
        for n in range(d - 1):
            raising[n + 1, n] = math.sqrt(n + 1)
        return energies, raising
    raise ConfigError(f"unknown model kind {spec.kind!r}")


def _full_kron(em_matrix: sp.spmatrix, cav_matrix: sp.spmatrix, tag: str) -> SparseOperator:
    return SparseOperator(sp.kron(em_matrix, cav_matrix, format="csr"), tag)


def build_full_model(spec: ModelSpec, size_limit: int = 5_000) -> Model:
    """Brute-force twin of build_model on the d^N product space.

    Operators are assembled from site-local lifts (sum over sites for the
    one-body parts, primed pair sum for the dipole-dipole term), so the
    construction shares no code path with the second-quantized build
    beyond the model parameters. Guarded to desk scale.
    """
    if spec.kind == "vsc" and spec.max_excitation is not None:
        raise ConfigError("the brute-force twin does not implement excitation restriction")
    d = spec.emitter_levels
    n = spec.n_emitters
    oracle.check_size(d**n * spec.cavity_dim, size_limit,
                      f"full composite dimension {d}^{n} * {spec.cavity_dim}")
    full = FullBasis(d, n)
    comp = FullComposite(full, spec.cavity_dim)
    tag = comp.tag

    energies, raising = _local_pieces(spec)
    a, a_dag, n_cav = boson_mode(spec.cavity_dim)
    i_em = sp.identity(full.dim, dtype=np.complex128, format="csr")
    i_cav = sp.identity(spec.cavity_dim, dtype=np.complex128, format="csr")

    h_em = collective(full, np.diag(energies))
    raise_coll = collective(full, raising)
    lower_coll = collective(full, raising.T)

    h = (
        _full_kron(h_em.matrix, i_cav, tag)
        + spec.omega_c * _full_kron(i_em, n_cav.matrix, tag)
        + spec.g * (
            _full_kron(raise_coll.matrix, a.matrix, tag)
            + _full_kron(lower_coll.matrix, a_dag.matrix, tag)
        )
    )

    observables: dict = {}
    h_dd_full = None
    if spec.kind == "three_level":
        mu = _ladder_matrix(d) + _ladder_matrix(d).T
        v2 = 2.0 * spec.dipole_d * np.einsum("ij,kl->ikjl", mu, mu)
        h_dd_full = mbody_first_quantized(full, MBodyCoefficients(2, v2))
        h = h + _full_kron(h_dd_full.matrix, i_cav, tag)

    collapses = []
    if spec.gamma_cavity > 0:
        collapses.append(
            math.sqrt(spec.gamma_cavity) * _full_kron(i_em, a.matrix, tag)
        )
    if spec.kind == "three_level" and spec.gamma_down > 0:
        for k in range(d - 1):
            sig = np.zeros((d, d))
            sig[k, k + 1] = 1.0
            collapses.append(
                math.sqrt(spec.gamma_down)
                * _full_kron(collective(full, sig).matrix, i_cav, tag)
            )

    # observables mirroring the second-quantized names
    per_mol = 1.0 / n
    if spec.kind == "tc":
        proj_e = np.zeros((2, 2))
        proj_e[1, 1] = 1.0
        observables = {
            "cavity_population": _full_kron(i_em, n_cav.matrix, tag),
            "excited_population": _full_kron(collective(full, proj_e).matrix, i_cav, tag),
        }
        level_weights = np.array([0, 1])
    elif spec.kind == "htc":
        nvg = spec.n_vib_ground
        proj_e = np.zeros((d, d))
        for nu in range(nvg, d):
            proj_e[nu, nu] = 1.0
        observables = {
            "cavity_population_per_molecule": per_mol * _full_kron(i_em, n_cav.matrix, tag),
            "excited_population_per_molecule": per_mol
            * _full_kron(collective(full, proj_e).matrix, i_cav, tag),
        }
        level_weights = np.array([0] * nvg + [1] * spec.n_vib_excited)
    elif spec.kind == "three_level":
        for k in range(d):
            proj = np.zeros((d, d))
            proj[k, k] = 1.0
            observables[f"level{k + 1}_population"] = _full_kron(
                collective(full, proj).matrix, i_cav, tag
            )
        if n > 1:
            pair_norm = 1.0 / (spec.dipole_d * n * (n - 1))
            observables["dipole_dipole"] = pair_norm * _full_kron(
                h_dd_full.matrix, i_cav, tag
            )
        level_weights = np.arange(d)  # reduced to parity below
    else:  # vsc
        vib = np.diag(np.arange(d, dtype=float))
        observables = {
            "cavity_population": _full_kron(i_em, n_cav.matrix, tag),
            "mean_vibrational_quanta": per_mol
            * _full_kron(collective(full, vib).matrix, i_cav, tag),
        }
        level_weights = np.arange(d)

    sector_weights = None
    if level_weights is not None:
        site_w = level_weights[full.levels].sum(axis=1)
        sector_weights = (site_w[:, None] + np.arange(spec.cavity_dim)[None, :]).ravel()
        if spec.kind == "three_level":
            sector_weights %= 2

    # the emitter count is trivially N on the product space; kept so both
    # pictures expose the same diagnostic columns
    diagnostics = {
        "emitter_number": _full_kron(n * i_em, i_cav, tag),
        "leakage": _full_kron(i_em, _top_cavity_projector(spec.cavity_dim).matrix, tag),
    }

    rho0 = _full_initial_state(spec, full, comp)
    return Model(
        spec=spec,
        basis=comp,
        hamiltonian=h,
        collapses=collapses,
        rho0=rho0,
        observables=observables,
        diagnostic_observables=diagnostics,
        sector_weights=sector_weights,
        leakage_threshold=1e-6 if spec.kind == "three_level" else None,
        info={"full_dim": full.dim, "composite_dim": comp.size},
    )


def _full_initial_state(spec: ModelSpec, full: FullBasis, comp: FullComposite) -> np.ndarray:
    d = spec.emitter_levels
    if spec.kind in ("tc", "three_level"):
        local = np.zeros(d)
        local[d - 1] = 1.0
    elif spec.kind == "htc":
        fc = franck_condon_matrix(spec.lambda_v, spec.omega_v, spec.n_vib_excited,
                                  spec.n_vib_ground)
        c, _ = _htc_fc_amplitudes(spec, fc)
        local = np.zeros(d)
        local[spec.n_vib_ground:] = c
    else:  # vsc: symmetric single vibrational quantum
        if d >= 2:
            psi = np.zeros(full.dim, dtype=np.complex128)
            one = np.zeros(d)
            one[1] = 1.0
            ground = np.zeros(d)
            ground[0] = 1.0
            for j in range(spec.n_emitters):
                factors = [one if k == j else ground for k in range(spec.n_emitters)]
                vec = factors[0]
                for f in factors[1:]:
                    vec = np.kron(vec, f)
                psi += vec
            psi /= np.linalg.norm(psi)
            return _lift_to_composite(psi, comp)
        local = np.zeros(d)
        local[0] = 1.0
    psi = local
    for _ in range(spec.n_emitters - 1):
        psi = np.kron(psi, local)
    return _lift_to_composite(psi.astype(np.complex128), comp)


def _lift_to_composite(psi_em: np.ndarray, comp: FullComposite) -> np.ndarray:
    cav = np.zeros(comp.cavity_dim, dtype=np.complex128)
    cav[0] = 1.0
    psi = np.kron(psi_em, cav)
    return np.outer(psi, psi.conj())


def run_model(
    model: Model,
    t_grid=None,
    energy_shift: float = 0.0,
    use_sectors: bool = True,
    **evolve_kwargs,
):
    """Evolve a model over its (or a supplied) time grid."""
    from .lindblad import evolve

    t = model.spec.time_grid() if t_grid is None else t_grid
    evolve_kwargs.setdefault("leakage_threshold", model.leakage_threshold)
    return evolve(
        model.system(energy_shift=energy_shift, use_sectors=use_sectors),
        model.rho0,
        t,
        observables=model.observables,
        diagnostic_observables=model.diagnostic_observables,
        **evolve_kwargs,
    )


def run_full_model(model: Model, t_grid=None, **run_kwargs):
    """Evolve a brute-force twin, enforcing the symmetric-sector preconditions.

    Checks (to 1e-12) that the full-space Hamiltonian and every collapse
    operator commute with the symmetrizer and that the initial state lies
    in the totally symmetric subspace; rejects anything else, since the
    sector mapping would not apply to it.
    """
    from .operators import commutator

    if not isinstance(model.basis, FullComposite):
        raise ConfigError("run_full_model expects a model built by build_full_model")
    full = model.basis.full_basis
    sym = oracle.symmetrizer(full.d, full.n_sites)
    sym_comp = SparseOperator(
        sp.kron(sym.matrix, sp.identity(model.basis.cavity_dim, dtype=np.complex128),
                format="csr"),
        model.hamiltonian.basis_tag,
    )
    for name, op in [("Hamiltonian", model.hamiltonian)] + [
        (f"collapse[{i}]", c) for i, c in enumerate(model.collapses)
    ]:
        comm = commutator(sym_comp, op)
        dev = 0.0 if comm.nnz == 0 else float(np.abs(comm.matrix.data).max())
        if dev > 1e-12:
            raise ValueError(f"{name} does not commute with the symmetrizer (|[S,O]|={dev:.2e})")
    oracle.assert_symmetric_state(model.rho0, sym, model.basis.cavity_dim)
    return run_model(model, t_grid=t_grid, **run_kwargs)


def dimension_report(spec: ModelSpec) -> dict:
    """Axis dimensions and density-matrix entry counts for one model instance."""
    d = spec.emitter_levels
    n = spec.n_emitters
    nc = spec.cavity_dim
    sym_axis = sector_dimension(d, n)
    report = {
        "d_levels": d,
        "n_emitters": n,
        "cavity_dim": nc,
        "symmetric_emitter_dim": sym_axis,
        "symmetric_axis": sym_axis * nc,
        "full_axis": d**n * nc,
        "symmetric_entries": oracle.symmetric_density_entries(d, n, nc),
        "full_entries": oracle.full_density_entries(d, n, nc),
        "liouville_entries": oracle.liouville_density_entries(d, n, nc),
    }
    report["full_over_symmetric"] = report["full_entries"] / report["symmetric_entries"]
    report["liouville_over_symmetric"] = (
        report["liouville_entries"] / report["symmetric_entries"]
    )
    return report
