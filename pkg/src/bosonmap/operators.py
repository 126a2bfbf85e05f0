"""Sparse second-quantized operators on Fock sectors and composite spaces.

Every operator is stored as a complex CSR matrix tagged with the basis it
acts on; binary operations check the tags so that a cavity operator can
never be silently combined with an emitter one. Emitter operators are
built from particle-number-conserving normal-ordered strings
b†_{beta_1}...b†_{beta_M} b_{alpha_1}...b_{alpha_M}; unbalanced strings
are rejected (nothing in scope needs them).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, sqrt

import numpy as np
import scipy.sparse as sp

from .fock import CompositeBasis, FockBasis

__all__ = [
    "SparseOperator",
    "MBodyCoefficients",
    "normal_ordered_string",
    "second_quantize",
    "boson_mode",
    "kron",
    "commutator",
    "identity_like",
]


class SparseOperator:
    """Immutable complex sparse matrix on a tagged basis.

    Wraps a ``scipy.sparse.csr_matrix`` (sorted indices, exact zeros
    dropped). Arithmetic delegates to scipy; ``@`` and ``+`` require
    matching basis tags.
    """

    __slots__ = ("matrix", "basis_tag")

    def __init__(self, matrix, basis_tag: str = ""):
        m = sp.csr_matrix(matrix, dtype=np.complex128, copy=False)
        m.eliminate_zeros()
        m.sort_indices()
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"operators must be square, got shape {m.shape}")
        self.matrix = m
        self.basis_tag = basis_tag

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def __repr__(self) -> str:
        return f"SparseOperator(dim={self.dim}, nnz={self.nnz}, basis={self.basis_tag!r})"

    def _check(self, other: "SparseOperator") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if self.basis_tag and other.basis_tag and self.basis_tag != other.basis_tag:
            raise ValueError(
                f"basis mismatch: {self.basis_tag!r} vs {other.basis_tag!r}"
            )

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        self._check(other)
        return SparseOperator(self.matrix + other.matrix, self.basis_tag or other.basis_tag)

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        self._check(other)
        return SparseOperator(self.matrix - other.matrix, self.basis_tag or other.basis_tag)

    def __neg__(self) -> "SparseOperator":
        return SparseOperator(-self.matrix, self.basis_tag)

    def __mul__(self, scalar) -> "SparseOperator":
        return SparseOperator(self.matrix * complex(scalar), self.basis_tag)

    __rmul__ = __mul__

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        self._check(other)
        return SparseOperator(self.matrix @ other.matrix, self.basis_tag or other.basis_tag)

    def adjoint(self) -> "SparseOperator":
        return SparseOperator(self.matrix.conjugate().transpose().tocsr(), self.basis_tag)

    @property
    def H(self) -> "SparseOperator":
        return self.adjoint()

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def trace(self) -> complex:
        return complex(self.matrix.diagonal().sum())

    def max_abs_diff(self, other: "SparseOperator") -> float:
        self._check(other)
        diff = self.matrix - other.matrix
        return 0.0 if diff.nnz == 0 else float(np.abs(diff.data).max())

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        diff = self.matrix - self.matrix.conjugate().transpose()
        return diff.nnz == 0 or float(np.abs(diff.data).max()) <= tol

    def dump_entries(self, stream) -> None:
        """Write one `row col real imag` line per stored entry (debug format)."""
        coo = self.matrix.tocoo()
        for r, c, v in zip(coo.row, coo.col, coo.data):
            stream.write(f"{r} {c} {float(v.real)!r} {float(v.imag)!r}\n")


def identity_like(dim: int, basis_tag: str = "") -> SparseOperator:
    return SparseOperator(sp.identity(dim, dtype=np.complex128, format="csr"), basis_tag)


def commutator(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    return a @ b - b @ a


@dataclass(frozen=True)
class MBodyCoefficients:
    """Coefficient tensor V[beta_1..beta_M, alpha_1..alpha_M] of an M-body operator.

    The tensor has 2M axes of length d (creation indices first); the
    generated operator is Hermitian iff V[betas, alphas] = conj(V[alphas, betas]).
    """

    order: int
    tensor: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.tensor, dtype=np.complex128)
        if self.order < 1:
            raise ValueError(f"body order must be >= 1, got {self.order}")
        if v.ndim != 2 * self.order:
            raise ValueError(
                f"tensor must have {2 * self.order} axes for order {self.order}, got {v.ndim}"
            )
        d = v.shape[0]
        if any(s != d for s in v.shape):
            raise ValueError(f"all tensor axes must have equal length, got {v.shape}")
        object.__setattr__(self, "tensor", v)

    @property
    def n_modes(self) -> int:
        return self.tensor.shape[0]

    def is_hermitian_generating(self, tol: float = 1e-12) -> bool:
        m = self.order
        swapped = np.transpose(self.tensor, tuple(range(m, 2 * m)) + tuple(range(m)))
        return bool(np.max(np.abs(self.tensor - np.conj(swapped))) <= tol)


def normal_ordered_string(basis: FockBasis, creations, annihilations) -> SparseOperator:
    """Matrix of b†_{c1}...b†_{cM} b_{a1}...b_{aM} on a fixed-N sector.

    Annihilations act first (each contributing sqrt(n)), then creations
    (sqrt(n+1)); states annihilated to zero contribute nothing. The string
    must be balanced — all operators in scope conserve particle number.
    """
    creations = [int(c) for c in creations]
    annihilations = [int(a) for a in annihilations]
    if len(creations) != len(annihilations):
        raise ValueError(
            f"unbalanced operator string: {len(creations)} creations vs "
            f"{len(annihilations)} annihilations (only particle-number-conserving "
            "strings are supported)"
        )
    for mode in creations + annihilations:
        if not 0 <= mode < basis.d:
            raise ValueError(f"mode index {mode} outside [0, {basis.d})")

    size = len(basis)
    rows, cols, vals = [], [], []
    for col, occ in enumerate(basis.states.tolist()):
        amp = 1.0
        work = list(occ)
        for a in reversed(annihilations):
            n = work[a]
            if n == 0:
                amp = 0.0
                break
            amp *= sqrt(n)
            work[a] = n - 1
        if amp == 0.0:
            continue
        for c in reversed(creations):
            work[c] += 1
            amp *= sqrt(work[c])
        rows.append(basis._rank[tuple(work)])
        cols.append(col)
        vals.append(amp)
    mat = sp.csr_matrix(
        (np.asarray(vals, dtype=np.complex128), (rows, cols)), shape=(size, size)
    )
    return SparseOperator(mat, basis.tag)


def second_quantize(basis: FockBasis, coeffs: MBodyCoefficients) -> SparseOperator:
    """(1/M!) sum_{alphas,betas} V[betas,alphas] b†...b† b...b on the sector.

    For M > N the operator is identically zero on the sector (every string
    annihilates the state), which falls out naturally.
    """
    if coeffs.n_modes != basis.d:
        raise ValueError(
            f"coefficient tensor is over {coeffs.n_modes} modes, basis has {basis.d}"
        )
    m = coeffs.order
    size = len(basis)
    total = sp.csr_matrix((size, size), dtype=np.complex128)
    scale = 1.0 / factorial(m)
    for index in np.argwhere(coeffs.tensor != 0):
        betas = [int(i) for i in index[:m]]
        alphas = [int(i) for i in index[m:]]
        v = coeffs.tensor[tuple(index)]
        term = normal_ordered_string(basis, betas, alphas)
        total = total + (scale * v) * term.matrix
    return SparseOperator(total, basis.tag)


def boson_mode(dim: int, basis_tag: str = ""):
    """Truncated ladder operators of a single bosonic mode.

    Returns (a, a_dagger, n) with a|k> = sqrt(k)|k-1>, n diagonal 0..dim-1.
    a_dagger is the exact adjoint of a in the truncated space, so
    a†|dim-1> = 0.
    """
    if dim < 1:
        raise ValueError(f"mode dimension must be >= 1, got {dim}")
    k = np.arange(1, dim)
    a = sp.diags(np.sqrt(k).astype(np.complex128), offsets=1, format="csr")
    n = sp.diags(np.arange(dim, dtype=np.complex128), offsets=0, format="csr")
    tag = basis_tag or f"mode({dim})"
    a_op = SparseOperator(a, tag)
    return a_op, a_op.adjoint(), SparseOperator(n, tag)


def kron(
    emitter_op: SparseOperator,
    subsystem_op: SparseOperator,
    composite: CompositeBasis,
) -> SparseOperator:
    """Tensor-product operator on a composite basis (emitter index slowest).

    If the basis is excitation-restricted, rows and columns outside the
    retained set are projected out, which equals building on the full
    product and then restricting.
    """
    if emitter_op.dim != len(composite.emitter_basis):
        raise ValueError(
            f"emitter factor has dim {emitter_op.dim}, basis needs "
            f"{len(composite.emitter_basis)}"
        )
    if subsystem_op.dim != composite.cavity_dim:
        raise ValueError(
            f"subsystem factor has dim {subsystem_op.dim}, basis needs "
            f"{composite.cavity_dim}"
        )
    if emitter_op.basis_tag and emitter_op.basis_tag != composite.emitter_basis.tag:
        raise ValueError(
            f"emitter factor acts on {emitter_op.basis_tag!r}, composite is built on "
            f"{composite.emitter_basis.tag!r}"
        )
    full = sp.kron(emitter_op.matrix, subsystem_op.matrix, format="csr")
    if composite.restricted:
        full = full[composite.retained][:, composite.retained]
    return SparseOperator(full, composite.tag)
