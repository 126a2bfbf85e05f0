"""Density-matrix evolution under the Lindblad master equation.

drho/dt = -(i/hbar)[H, rho] + (1/hbar) sum_i ( C_i rho C_i†
          - 1/2 {C_i† C_i, rho} )

with hbar = 0.6582119569 eV·fs: energies are in eV, interface times in
fs, and the internal integration variable is t_fs / hbar.

The right-hand side is evaluated as X + X† with
X = (-iH - 1/2 sum C†C) rho + 1/2 sum C (rho C†), which is exactly
Hermitian in floating point, so every linear integrator preserves
Hermiticity of rho to machine precision.

When the Hamiltonian conserves a declared integer excitation grading and
every collapse operator shifts it uniformly (e.g. cavity decay under the
rotating-wave approximation), a block-diagonal density matrix stays
block-diagonal exactly; the engine then evolves only the diagonal sector
blocks, which cuts both memory and flops by an order of magnitude for
the larger models. A system without a grading runs as a single block.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._kernels import diag_combine, gather_scale_add, sym_add_transpose
from .errors import NumericalError
from .integrate import integrate_vector
from .operators import SparseOperator

__all__ = [
    "HBAR_EV_FS",
    "LindbladSystem",
    "Trajectory",
    "evolve",
    "rhs",
    "expectation",
]

HBAR_EV_FS = 0.6582119569  # eV * fs

# Density above which a sector block of -iH - D/2 is applied with dense BLAS
# instead of CSR (single-core zgemm wins past roughly 8% fill).
_DENSE_DENSITY = 0.08
_DENSE_MIN_DIM = 192


def expectation(op: SparseOperator, rho: np.ndarray, return_imag: bool = False):
    """tr(O rho). Returns the real part; set return_imag for the residue."""
    if rho.shape != (op.dim, op.dim):
        raise ValueError(f"state shape {rho.shape} does not match operator dim {op.dim}")
    coo = op.matrix.tocoo()
    val = complex(np.dot(coo.data, rho[coo.col, coo.row]))
    if return_imag:
        return val.real, val.imag
    return val.real


class LindbladSystem:
    """Hamiltonian + collapse operators, with precomputed C†C products.

    Parameters
    ----------
    hamiltonian : SparseOperator
        Hermitian (checked to 1e-12), energies in eV.
    collapses : sequence of SparseOperator
        Each scaled so that C†C carries units of eV.
    sector_weights : array of int, optional
        Integer grading of the basis (e.g. a conserved excitation number,
        or its parity when the Hamiltonian only conserves excitation
        modulo 2). H must conserve it, and every collapse must map each
        sector into exactly one sector; the engine then evolves the
        diagonal sector blocks only.
    energy_shift : float
        Uniform shift: H_eff = H - shift*I. A uniform shift commutes into
        a global phase that cancels in the Lindblad equation, so rho(t)
        is invariant; exposed purely for numerical experimentation.
    """

    def __init__(
        self,
        hamiltonian: SparseOperator,
        collapses=(),
        sector_weights=None,
        energy_shift: float = 0.0,
    ):
        if not hamiltonian.is_hermitian(1e-12):
            raise ValueError("Hamiltonian is not Hermitian (tolerance 1e-12)")
        self.hamiltonian = hamiltonian
        self.collapses = list(collapses)
        for c in self.collapses:
            if c.dim != hamiltonian.dim:
                raise ValueError("collapse operator dimension does not match H")
        self.energy_shift = float(energy_shift)
        self.cdag_c = [c.adjoint() @ c for c in self.collapses]
        if sector_weights is not None:
            sector_weights = np.asarray(sector_weights, dtype=np.int64)
            if sector_weights.shape != (hamiltonian.dim,):
                raise ValueError("sector_weights must have one entry per basis state")
        self.sector_weights = sector_weights

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim


@dataclass
class Trajectory:
    """Time grid, named observable series, and run diagnostics."""

    times_fs: np.ndarray
    observables: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.times_fs)
        for name, series in self.observables.items():
            if len(series) != n:
                raise ValueError(f"series {name!r} has {len(series)} values for {n} times")


def _shift_of(matrix: sp.spmatrix, weights: np.ndarray, what: str) -> int:
    """Uniform grading shift of an operator; raises if it is not uniform."""
    coo = matrix.tocoo()
    if coo.nnz == 0:
        return 0
    shifts = np.unique(weights[coo.row] - weights[coo.col])
    if shifts.size != 1:
        raise ValueError(
            f"{what} does not shift the declared excitation grading uniformly "
            f"(found shifts {shifts.tolist()})"
        )
    return int(shifts[0])


class _Propagator:
    """Prepared per-sector operator slices and flat-vector packing.

    The evolved state is stored as real and imaginary planes of each
    sector block, concatenated into one float64 vector: the model
    Hamiltonians are real, so -iH - sum C†C/2 splits into a real part
    (usually diagonal) and an imaginary part, and every matrix product
    in the right-hand side runs as a real sparse-times-dense product;
    that is several times faster than the equivalent complex product.

    If ``rho0`` is given together with sector weights, sectors that can
    never acquire population (no initial weight and not reachable through
    any chain of collapse shifts from a populated sector) are dropped
    from the evolved state entirely; they stay exactly zero under the
    master equation, so this is a pure storage/flops optimization.
    """

    def __init__(self, system: LindbladSystem, rho0: np.ndarray | None = None):
        dim = system.dim
        weights = system.sector_weights
        if weights is None:
            blocks = [np.arange(dim)]
        else:
            h_shift = _shift_of(system.hamiltonian.matrix, weights, "Hamiltonian")
            if h_shift != 0:
                raise ValueError("Hamiltonian does not conserve the excitation grading")
            blocks = [np.flatnonzero(weights == w) for w in np.unique(weights)]
            if rho0 is not None:
                blocks = self._reachable_blocks(system, weights, blocks, rho0)
        self.blocks = blocks
        self.block_dims = np.array([len(b) for b in blocks], dtype=np.int64)
        self.offsets = np.concatenate([[0], np.cumsum(2 * self.block_dims**2)])
        self.n_flat = int(self.offsets[-1])
        self.dim = dim

        # position of each original index inside its block, and block id;
        # indices of dropped (unreachable) sectors carry -1
        self.block_of = np.full(dim, -1, dtype=np.int64)
        self.local_pos = np.full(dim, -1, dtype=np.int64)
        for b, idx in enumerate(blocks):
            self.block_of[idx] = b
            self.local_pos[idx] = np.arange(len(idx))

        h_half = (-1j) * system.hamiltonian.matrix
        if system.energy_shift:
            h_half = h_half + 1j * system.energy_shift * sp.identity(
                dim, dtype=np.complex128, format="csr"
            )
        for dd in system.cdag_c:
            h_half = h_half - 0.5 * dd.matrix
        self.m_parts = [
            self._split_operator(self._maybe_dense(h_half[idx][:, idx].tocsr()))
            for idx in blocks
        ]

        # collapse slices: each source block must flow into exactly one
        # target block (otherwise the sandwich would create coherences
        # between different target sectors and block-diagonality would be
        # lost). A slice with at most one entry per row and per column
        # (always the case for cavity decay) is applied as an index gather
        # with an outer scale instead of sparse products.
        self.sandwich = []  # per collapse: list over source blocks of kind-tagged slices
        for c in system.collapses:
            per_block = []
            for b, idx in enumerate(blocks):
                cols = c.matrix[:, idx].tocoo()
                if cols.nnz == 0:
                    per_block.append(None)
                    continue
                target_ids = np.unique(self.block_of[cols.row])
                if target_ids.size != 1 or target_ids[0] < 0:
                    raise ValueError(
                        "collapse operator scatters a sector into several blocks; "
                        "the declared grading does not support block evolution"
                    )
                tb = int(target_ids[0])
                c_slice = c.matrix[:, idx][self.blocks[tb], :].tocsr()
                coo = c_slice.tocoo()
                one_per_row = np.unique(coo.row).size == coo.nnz
                one_per_col = np.unique(coo.col).size == coo.nnz
                real_only = float(np.abs(coo.data.imag).max()) == 0.0
                if one_per_row and one_per_col and real_only:
                    v_half = np.ascontiguousarray(coo.data.real) / np.sqrt(2.0)
                    per_block.append(
                        ("gather", tb, coo.col.astype(np.int64),
                         coo.row.astype(np.int64), v_half)
                    )
                elif real_only:
                    cr = sp.csr_matrix(
                        (np.ascontiguousarray(coo.data.real), (coo.row, coo.col)),
                        shape=c_slice.shape,
                    )
                    per_block.append(("spmm", tb, cr))
                else:
                    per_block.append(("spmm_complex", tb, c_slice))
            self.sandwich.append(per_block)
        self._scratch = [np.empty((n, n), dtype=np.float64) for n in self.block_dims]
        # reused RHS output; integrators copy the returned vector before
        # the next evaluation (dopri5 assigns into its stage array, the
        # Adams wrappers copy through the f2py bridge)
        self._out = np.empty(self.n_flat, dtype=np.float64)

    @staticmethod
    def _maybe_dense(mat: sp.csr_matrix):
        n = mat.shape[0]
        if n >= _DENSE_MIN_DIM and mat.nnz >= _DENSE_DENSITY * n * n:
            return mat.toarray()
        return mat

    @staticmethod
    def _split_operator(m):
        """Split a block of -iH - D/2 into (diag_re, diag_im, offdiag_re, offdiag_im)."""
        if isinstance(m, np.ndarray):
            diag = np.ascontiguousarray(np.diagonal(m))
            off = m.copy()
            np.fill_diagonal(off, 0.0)
            o_re = np.ascontiguousarray(off.real)
            o_im = np.ascontiguousarray(off.imag)
            o_re = o_re if np.any(o_re) else None
            o_im = o_im if np.any(o_im) else None
        else:
            diag = m.diagonal()
            off = (m - sp.diags(diag, shape=m.shape)).tocsr()
            off.eliminate_zeros()
            o_re = off.real.tocsr()
            o_re.eliminate_zeros()
            o_im = off.imag.tocsr()
            o_im.eliminate_zeros()
            o_re = o_re if o_re.nnz else None
            o_im = o_im if o_im.nnz else None
        # the diagonal pass always runs (it also initializes the output)
        d_re = np.ascontiguousarray(diag.real)
        d_im = np.ascontiguousarray(diag.imag)
        return d_re, d_im, o_re, o_im

    @staticmethod
    def _reachable_blocks(system, weights, blocks, rho0):
        dim = system.dim
        block_of = np.full(dim, -1, dtype=np.int64)
        for b, idx in enumerate(blocks):
            block_of[idx] = b
        populated = set()
        for b, idx in enumerate(blocks):
            sub = rho0[np.ix_(idx, idx)]
            if sub.size and float(np.max(np.abs(sub))) > 1e-15:
                populated.add(b)
        edges = set()
        for c in system.collapses:
            coo = c.matrix.tocoo()
            pairs = np.unique(
                np.stack([block_of[coo.col], block_of[coo.row]], axis=1), axis=0
            )
            edges.update((int(a), int(t)) for a, t in pairs)
        frontier = set(populated)
        while frontier:
            nxt = set()
            for b in frontier:
                for src, tgt in edges:
                    if src == b and tgt not in populated:
                        populated.add(tgt)
                        nxt.add(tgt)
            frontier = nxt
        return [idx for b, idx in enumerate(blocks) if b in populated]

    # --- flat-vector packing -------------------------------------------------

    def plane_views(self, y: np.ndarray):
        """Per block: (real plane, imag plane) views into the flat vector."""
        out = []
        for b, n in enumerate(self.block_dims):
            base = self.offsets[b]
            out.append(
                (
                    y[base : base + n * n].reshape(n, n),
                    y[base + n * n : base + 2 * n * n].reshape(n, n),
                )
            )
        return out

    def pack(self, rho: np.ndarray) -> np.ndarray:
        y = np.empty(self.n_flat, dtype=np.float64)
        for idx, (re, im) in zip(self.blocks, self.plane_views(y)):
            sub = rho[np.ix_(idx, idx)]
            re[...] = sub.real
            im[...] = sub.imag
        return y

    def unpack(self, y: np.ndarray) -> np.ndarray:
        rho = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for idx, (re, im) in zip(self.blocks, self.plane_views(y)):
            rho[np.ix_(idx, idx)] = re + 1j * im
        return rho

    def off_block_mass(self, rho: np.ndarray) -> float:
        probe = np.array(rho, copy=True)
        for idx in self.blocks:
            probe[np.ix_(idx, idx)] = 0.0
        return float(np.max(np.abs(probe))) if probe.size else 0.0

    # --- dynamics ------------------------------------------------------------

    def rhs_flat(self, t: float, y: np.ndarray) -> np.ndarray:
        """X + X† per block on the split planes, in hbar = 1 time units.

        The collapse sandwich uses rho† in place of rho (exact on the
        Hermitian states produced by the integrators; the final
        symmetrization keeps the output exactly Hermitian either way).
        """
        planes = self.plane_views(y)
        out = self._out
        x = self.plane_views(out)
        for b, (d_re, d_im, o_re, o_im) in enumerate(self.m_parts):
            rr, ri = planes[b]
            xr, xi = x[b]
            tmp = self._scratch[b]
            diag_combine(d_re, d_im, rr, ri, xr, xi)
            if o_re is not None:
                if isinstance(o_re, np.ndarray):
                    np.matmul(o_re, rr, out=tmp)
                    xr += tmp
                    np.matmul(o_re, ri, out=tmp)
                    xi += tmp
                else:
                    xr += o_re @ rr
                    xi += o_re @ ri
            if o_im is not None:
                if isinstance(o_im, np.ndarray):
                    np.matmul(o_im, ri, out=tmp)
                    xr -= tmp
                    np.matmul(o_im, rr, out=tmp)
                    xi += tmp
                else:
                    xr -= o_im @ ri
                    xi += o_im @ rr
        for per_block in self.sandwich:
            for b, entry in enumerate(per_block):
                if entry is None:
                    continue
                rr, ri = planes[b]
                kind = entry[0]
                xr_t, xi_t = x[entry[1]]
                if kind == "gather":
                    _, tb, src, tgt, v_half = entry
                    gather_scale_add(xr_t, rr, src, tgt, v_half)
                    gather_scale_add(xi_t, ri, src, tgt, v_half)
                elif kind == "spmm":
                    _, tb, cr = entry
                    wr = cr @ rr
                    wi = cr @ ri
                    # 0.5 * C (w)† with w = C rho: real C
                    xr_t += 0.5 * (cr @ np.ascontiguousarray(wr.T))
                    xi_t -= 0.5 * (cr @ np.ascontiguousarray(wi.T))
                else:  # complex collapse slice: reconstruct, compute, split
                    _, tb, c_slice = entry
                    rho_b = rr + 1j * ri
                    w = c_slice @ rho_b
                    contrib = 0.5 * (c_slice @ np.ascontiguousarray(w.conj().T))
                    xr_t += contrib.real
                    xi_t += contrib.imag
        for xr, xi in x:
            sym_add_transpose(xr, 1.0)
            sym_add_transpose(xi, -1.0)
        return out

    def hermitize(self, y: np.ndarray) -> np.ndarray:
        for re, im in self.plane_views(y):
            sym_add_transpose(re, 1.0)
            re *= 0.5
            sym_add_transpose(im, -1.0)
            im *= 0.5
        return y

    def trace_and_herm(self, y: np.ndarray):
        tr = 0.0 + 0.0j
        herm = 0.0
        for re, im in self.plane_views(y):
            if not re.size:
                continue
            tr += np.trace(re) + 1j * np.trace(im)
            dev = np.hypot(re - re.T, im + im.T)
            herm = max(herm, float(dev.max()))
        return tr, herm

    def min_eigenvalue(self, y: np.ndarray) -> float:
        lo = np.inf
        for re, im in self.plane_views(y):
            if re.size:
                h = 0.5 * (re + re.T) + 0.5j * (im - im.T)
                lo = min(lo, float(np.linalg.eigvalsh(h)[0]))
        return lo

    def observable_closure(self, op: SparseOperator):
        """tr(O rho) evaluated on the packed planes.

        Entries of O between different sectors meet exact zeros of rho and
        are dropped; the result is exact for block-diagonal states.
        """
        coo = op.matrix.tocoo()
        same = (self.block_of[coo.row] == self.block_of[coo.col]) & (
            self.block_of[coo.row] >= 0
        )
        rows, cols, data = coo.row[same], coo.col[same], coo.data[same]
        b = self.block_of[rows]
        # tr(O rho) = sum_ij O_ij rho_ji; the real part of rho_ji sits at
        # offsets[b] + local(j)*dim_b + local(i), the imag part one plane later
        re_idx = self.offsets[b] + self.local_pos[cols] * self.block_dims[b] + self.local_pos[rows]
        im_idx = re_idx + self.block_dims[b] ** 2
        d_re = np.ascontiguousarray(data.real)
        d_im = np.ascontiguousarray(data.imag)
        has_im = bool(np.any(d_im))

        def value(y: np.ndarray) -> complex:
            g_re = y[re_idx]
            g_im = y[im_idx]
            val_r = np.dot(d_re, g_re)
            val_i = np.dot(d_re, g_im)
            if has_im:
                val_r -= np.dot(d_im, g_im)
                val_i += np.dot(d_im, g_re)
            return complex(val_r, val_i)

        return value


def rhs(system: LindbladSystem, rho: np.ndarray) -> np.ndarray:
    """drho/dt in 1/fs for a state in eV units (single evaluation).

    Valid for arbitrary (not necessarily Hermitian) rho, so that
    rhs(rho)† = rhs(rho†) and linearity hold exactly; evolve() uses an
    equivalent fast path specialized to Hermitian states. The uniform
    energy shift cancels identically in the commutator and does not
    appear here.
    """
    if rho.shape != (system.dim, system.dim):
        raise ValueError(f"state shape {rho.shape} does not match system dim {system.dim}")
    h = system.hamiltonian.matrix
    rho_dag = rho.conj().T
    # rho A = (A† rho†)† keeps every product sparse-on-the-left
    out = (-1j) * (h @ rho - (h @ rho_dag).conj().T)
    for c, dd in zip(system.collapses, system.cdag_c):
        cm, dm = c.matrix, dd.matrix
        out += cm @ ((cm @ rho_dag).conj().T)
        out -= 0.5 * (dm @ rho)
        out -= 0.5 * ((dm @ rho_dag).conj().T)
    return out / HBAR_EV_FS


def evolve(
    system: LindbladSystem,
    rho0: np.ndarray,
    t_grid_fs,
    observables: dict | None = None,
    diagnostic_observables: dict | None = None,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    method: str = "dopri5",
    order: int = 12,
    positivity_samples: int = 10,
    leakage_threshold: float | None = 1e-6,
) -> Trajectory:
    """Integrate the master equation and sample observables on a fs grid.

    The grid must be strictly increasing and start at 0. ``observables``
    become named columns of the trajectory; ``diagnostic_observables``
    (e.g. cavity-truncation leakage, total emitter number) are recorded
    under diagnostics. Positivity (smallest eigenvalue) is checked at
    ``positivity_samples`` evenly spaced grid times. Pass
    ``leakage_threshold=None`` for models whose cavity truncation is
    exact (the top-level population is then genuine, not leakage).
    """
    observables = observables or {}
    diagnostic_observables = diagnostic_observables or {}
    t_grid_fs = np.asarray(t_grid_fs, dtype=float)
    if t_grid_fs.ndim != 1 or len(t_grid_fs) < 2:
        raise ValueError("need a 1-D time grid with at least two points")
    if t_grid_fs[0] != 0.0 or np.any(np.diff(t_grid_fs) <= 0):
        raise ValueError("time grid must start at 0 and be strictly increasing")

    rho0 = np.asarray(rho0, dtype=np.complex128)
    if rho0.shape != (system.dim, system.dim):
        raise ValueError(f"rho0 shape {rho0.shape} does not match system dim {system.dim}")
    herm0 = float(np.max(np.abs(rho0 - rho0.conj().T)))
    if herm0 > 1e-10:
        raise ValueError(f"rho0 is not Hermitian (max |rho - rho†| = {herm0:.2e})")
    tr0 = complex(np.trace(rho0))
    if abs(tr0 - 1.0) > 1e-8:
        raise ValueError(f"rho0 has trace {tr0}, expected 1 within 1e-8")

    prop = _Propagator(system, rho0=rho0)
    if system.sector_weights is not None:
        off = prop.off_block_mass(rho0)
        if off > 1e-12:
            raise ValueError(
                f"rho0 has weight {off:.2e} outside the declared sector blocks; "
                "drop sector_weights to evolve the full matrix"
            )

    obs_closures = {k: prop.observable_closure(v) for k, v in observables.items()}
    diag_closures = {k: prop.observable_closure(v) for k, v in diagnostic_observables.items()}

    n_t = len(t_grid_fs)
    series = {k: np.empty(n_t) for k in obs_closures}
    diag_series = {k: np.empty(n_t) for k in diag_closures}
    trace_err = np.empty(n_t)
    herm_err = np.empty(n_t)
    max_imag = 0.0

    n_pos = max(2, min(positivity_samples, n_t))
    pos_indices = set(np.unique(np.linspace(0, n_t - 1, n_pos).round().astype(int)))
    min_eig = np.inf

    def on_sample(i: int, y: np.ndarray):
        nonlocal max_imag, min_eig
        tr, he = prop.trace_and_herm(y)
        trace_err[i] = abs(tr - 1.0)
        herm_err[i] = he
        for k, fn in obs_closures.items():
            val = fn(y)
            series[k][i] = val.real
            max_imag = max(max_imag, abs(val.imag))
        for k, fn in diag_closures.items():
            val = fn(y)
            diag_series[k][i] = val.real
            max_imag = max(max_imag, abs(val.imag))
        if i in pos_indices:
            min_eig = min(min_eig, prop.min_eigenvalue(y))

    y0 = prop.pack(rho0)
    t_internal = t_grid_fs / HBAR_EV_FS
    kwargs = {"order": order} if method == "adams" else {}
    _, stats = integrate_vector(
        method,
        prop.rhs_flat,
        y0,
        t_internal,
        rtol,
        atol,
        post_accept=prop.hermitize,
        on_sample=on_sample,
        **kwargs,
    )

    diagnostics = {
        "trace_error": trace_err,
        "herm_error": herm_err,
        **diag_series,
        "max_trace_error": float(trace_err.max()),
        "max_herm_error": float(herm_err.max()),
        "max_imag_expectation": float(max_imag),
        "min_eigenvalue": float(min_eig),
        "n_steps": stats.n_steps,
        "n_rejected": stats.n_rejected,
        "n_rhs": stats.n_rhs,
        "method": stats.method,
        "n_blocks": len(prop.blocks),
    }
    if "leakage" in diag_series:
        peak = float(diag_series["leakage"].max())
        diagnostics["max_leakage"] = peak
        if leakage_threshold is not None and peak > leakage_threshold:
            warnings.warn(
                f"cavity truncation leakage reached {peak:.3e} "
                f"(threshold {leakage_threshold:g}); increase the cavity dimension",
                RuntimeWarning,
                stacklevel=2,
            )
    if min_eig < -1e-8:
        warnings.warn(
            f"sampled density matrix has negative eigenvalue {min_eig:.3e}",
            RuntimeWarning,
            stacklevel=2,
        )
    return Trajectory(times_fs=t_grid_fs, observables=series, diagnostics=diagnostics)
