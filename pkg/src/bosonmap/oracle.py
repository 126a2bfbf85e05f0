"""Brute-force reference on the full d^N product space.

Everything here exists to certify the bosonic-sector build on desk-scale
instances: explicit permutation operators, the symmetrizing projector,
site-local operator lifts, the primed-sum M-body builder, and the
isometry whose columns are the normalized symmetric product states. All
constructions carry hard feasibility guards — the full space grows as
d^N and is only ever used for certification, never production runs.

Site ordering: site 0 is the slowest (most significant) index, so the
product state |l_0 l_1 ... l_{N-1}> has index sum_j l_j * d^(N-1-j).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import GuardError
from .fock import FockBasis, sector_dimension
from .operators import MBodyCoefficients, SparseOperator

__all__ = [
    "FullBasis",
    "FullComposite",
    "Isometry",
    "permutation_operator",
    "symmetrizer",
    "lift_local",
    "collective",
    "mbody_first_quantized",
    "build_isometry",
    "check_size",
    "assert_symmetric_state",
    "symmetric_density_entries",
    "full_density_entries",
    "liouville_density_entries",
]

_MAX_PERMUTATION_SITES = 8
_MAX_FULL_DIM = 20_000
_MAX_COMPOSITE_DIM = 5_000


def check_size(value: int, limit: int, what: str) -> None:
    if value > limit:
        raise GuardError(
            f"{what} = {value} exceeds the oracle feasibility guard ({limit}); "
            "the full product space is for desk-scale certification only"
        )


class FullBasis:
    """Product basis of N distinguishable d-level sites."""

    def __init__(self, d: int, n_sites: int):
        if d < 1 or n_sites < 1:
            raise ValueError(f"need d >= 1 and N >= 1, got d={d}, N={n_sites}")
        dim = d**n_sites
        check_size(dim, _MAX_FULL_DIM, f"full-space dimension {d}^{n_sites}")
        self.d = d
        self.n_sites = n_sites
        self.dim = dim
        self.powers = d ** np.arange(n_sites - 1, -1, -1, dtype=np.int64)
        # levels[i, j] = level of site j in basis state i
        idx = np.arange(dim, dtype=np.int64)
        self.levels = (idx[:, None] // self.powers[None, :]) % d
        self.levels.setflags(write=False)

    @property
    def tag(self) -> str:
        return f"full(d={self.d},N={self.n_sites})"

    def encode(self, levels) -> int:
        levels = np.asarray(levels, dtype=np.int64)
        if levels.shape != (self.n_sites,) or np.any(levels < 0) or np.any(levels >= self.d):
            raise ValueError(f"invalid level assignment {levels} for {self.tag}")
        return int(levels @ self.powers)

    def decode(self, index: int) -> tuple:
        return tuple(self.levels[index].tolist())

    def __len__(self) -> int:
        return self.dim


@dataclass(frozen=True)
class FullComposite:
    """Full product space tensored with a truncated cavity mode."""

    full_basis: FullBasis
    cavity_dim: int

    @property
    def size(self) -> int:
        return self.full_basis.dim * self.cavity_dim

    @property
    def tag(self) -> str:
        return f"{self.full_basis.tag}*cav({self.cavity_dim})"

    def __len__(self) -> int:
        return self.size


def permutation_operator(basis: FullBasis, perm) -> SparseOperator:
    """Matrix of P_pi: the state of site j is moved to site perm[j].

    Composition satisfies P_pi P_sigma = P_{pi o sigma} with
    (pi o sigma)(j) = pi(sigma(j)).
    """
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(basis.n_sites)):
        raise ValueError(f"{perm} is not a permutation of 0..{basis.n_sites - 1}")
    inv = np.empty(basis.n_sites, dtype=np.int64)
    inv[list(perm)] = np.arange(basis.n_sites)
    # row state m has m[perm[j]] = l[j], i.e. m = l[inv]
    rows = basis.levels[:, inv] @ basis.powers
    cols = np.arange(basis.dim, dtype=np.int64)
    data = np.ones(basis.dim, dtype=np.complex128)
    return SparseOperator(sp.csr_matrix((data, (rows, cols)), shape=(basis.dim,) * 2), basis.tag)


def symmetrizer(d: int, n_sites: int) -> SparseOperator:
    """S = (1/N!) sum over all permutation operators (idempotent, Hermitian)."""
    if n_sites > _MAX_PERMUTATION_SITES:
        raise GuardError(
            f"symmetrizer over N={n_sites} sites needs {math.factorial(n_sites)} "
            f"permutations; guard is N <= {_MAX_PERMUTATION_SITES}"
        )
    basis = FullBasis(d, n_sites)
    acc = np.zeros((basis.dim, basis.dim))
    cols = np.arange(basis.dim, dtype=np.int64)
    for perm in itertools.permutations(range(n_sites)):
        inv = np.empty(n_sites, dtype=np.int64)
        inv[list(perm)] = np.arange(n_sites)
        rows = basis.levels[:, inv] @ basis.powers
        acc[rows, cols] += 1.0
    acc /= math.factorial(n_sites)
    return SparseOperator(sp.csr_matrix(acc), basis.tag)


def lift_local(basis: FullBasis, op, site: int) -> SparseOperator:
    """Embed a d x d single-site matrix at the given site (identity elsewhere)."""
    if not 0 <= site < basis.n_sites:
        raise ValueError(f"site {site} outside [0, {basis.n_sites})")
    op = sp.csr_matrix(np.asarray(op, dtype=np.complex128))
    if op.shape != (basis.d, basis.d):
        raise ValueError(f"local operator must be {basis.d}x{basis.d}, got {op.shape}")
    left = sp.identity(basis.d**site, dtype=np.complex128, format="csr")
    right = sp.identity(basis.d ** (basis.n_sites - site - 1), dtype=np.complex128, format="csr")
    return SparseOperator(sp.kron(sp.kron(left, op), right, format="csr"), basis.tag)


def collective(basis: FullBasis, op) -> SparseOperator:
    """Sum of the local lift of ``op`` over every site."""
    total = lift_local(basis, op, 0)
    for j in range(1, basis.n_sites):
        total = total + lift_local(basis, op, j)
    return total


def mbody_first_quantized(basis: FullBasis, coeffs: MBodyCoefficients) -> SparseOperator:
    """(1/M!) primed sum over distinct site tuples of V-weighted local products."""
    if coeffs.n_modes != basis.d:
        raise ValueError(
            f"coefficient tensor is over {coeffs.n_modes} levels, sites have {basis.d}"
        )
    m = coeffs.order
    if m > basis.n_sites:
        raise ValueError(f"body order {m} exceeds the number of sites {basis.n_sites}")
    acc = {}
    entries = np.argwhere(coeffs.tensor != 0)
    scale = 1.0 / math.factorial(m)
    for sites in itertools.permutations(range(basis.n_sites), m):
        site_powers = basis.powers[list(sites)]
        for index in entries:
            betas = index[:m]
            alphas = index[m:]
            v = coeffs.tensor[tuple(index)] * scale
            mask = np.all(basis.levels[:, list(sites)] == alphas[None, :], axis=1)
            cols = np.flatnonzero(mask)
            if cols.size == 0:
                continue
            shift = int(((betas - alphas) * site_powers).sum())
            for c in cols:
                key = (int(c) + shift, int(c))
                acc[key] = acc.get(key, 0.0) + v
    rows = np.fromiter((k[0] for k in acc), dtype=np.int64, count=len(acc))
    cols = np.fromiter((k[1] for k in acc), dtype=np.int64, count=len(acc))
    data = np.fromiter(acc.values(), dtype=np.complex128, count=len(acc))
    return SparseOperator(
        sp.csr_matrix((data, (rows, cols)), shape=(basis.dim,) * 2), basis.tag
    )


@dataclass(frozen=True)
class Isometry:
    """Map from the bosonic sector into the full product space.

    Columns are the normalized totally symmetric product states: the
    column of occupation (n_1..n_d) is the equal-amplitude superposition
    of its K = N!/prod(n_alpha!) distinct site assignments with amplitude
    1/sqrt(K). Satisfies T†T = identity on the sector and S T = T.
    """

    matrix: sp.csr_matrix
    full_basis: FullBasis
    fock_basis: FockBasis

    def conjugate(self, full_op: SparseOperator) -> SparseOperator:
        """T† O T: pull a full-space emitter operator down to the Fock sector."""
        if full_op.dim != self.full_basis.dim:
            raise ValueError("operator does not act on the full space of this isometry")
        t = self.matrix
        return SparseOperator(t.conjugate().transpose() @ full_op.matrix @ t, self.fock_basis.tag)

    def conjugate_composite(self, full_op: SparseOperator, cavity_dim: int) -> SparseOperator:
        """(T ⊗ I_cav)† O (T ⊗ I_cav) for composite-space operators."""
        t = sp.kron(self.matrix, sp.identity(cavity_dim, dtype=np.complex128), format="csr")
        if full_op.dim != t.shape[0]:
            raise ValueError("operator does not act on the composite full space")
        tag = f"{self.fock_basis.tag}*cav({cavity_dim})"
        return SparseOperator(t.conjugate().transpose() @ full_op.matrix @ t, tag)

    def apply(self, fock_vector: np.ndarray) -> np.ndarray:
        """Expand a sector state vector into the full product space."""
        return self.matrix @ fock_vector


def build_isometry(d: int, n_sites: int) -> Isometry:
    if n_sites > _MAX_PERMUTATION_SITES:
        raise GuardError(
            f"isometry over N={n_sites} sites enumerates site assignments; "
            f"guard is N <= {_MAX_PERMUTATION_SITES}"
        )
    full = FullBasis(d, n_sites)
    fock = FockBasis(d, n_sites)
    rows, cols, vals = [], [], []
    for k, occ in enumerate(fock):
        levels = [mode for mode, n in enumerate(occ) for _ in range(n)]
        assignments = sorted(set(itertools.permutations(levels)))
        amp = 1.0 / math.sqrt(len(assignments))
        for assignment in assignments:
            rows.append(int(np.asarray(assignment) @ full.powers))
            cols.append(k)
            vals.append(amp)
    mat = sp.csr_matrix(
        (np.asarray(vals, dtype=np.complex128), (rows, cols)),
        shape=(full.dim, len(fock)),
    )
    return Isometry(matrix=mat, full_basis=full, fock_basis=fock)


def assert_symmetric_state(rho: np.ndarray, sym: SparseOperator, cavity_dim: int = 1,
                           tol: float = 1e-10) -> None:
    """Reject initial states outside the totally symmetric subspace."""
    s = sym.matrix
    if cavity_dim > 1:
        s = sp.kron(s, sp.identity(cavity_dim, dtype=np.complex128), format="csr")
    projected = s @ rho @ s
    dev = float(np.max(np.abs(projected - rho)))
    if dev > tol:
        raise ValueError(
            f"initial state is not totally symmetric (|S rho S - rho| reaches {dev:.2e}); "
            "the symmetric-sector mapping does not apply to it"
        )


# --- density-matrix entry counting -------------------------------------------


def symmetric_density_entries(d: int, n_emitters: int, cavity_dim: int) -> int:
    """Entries of rho in the bosonic (totally symmetric) sector."""
    return sector_dimension(d, n_emitters) ** 2 * cavity_dim**2


def full_density_entries(d: int, n_emitters: int, cavity_dim: int) -> int:
    """Entries of rho on the unreduced d^N product space."""
    return d ** (2 * n_emitters) * cavity_dim**2


def liouville_density_entries(d: int, n_emitters: int, cavity_dim: int) -> int:
    """Entries of rho in the symmetrized-Liouville-space parametrization."""
    return math.comb(n_emitters + d**2 - 1, n_emitters) * cavity_dim**2
