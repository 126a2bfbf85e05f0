"""Optional numba-accelerated inner loops with pure-numpy fallbacks.

These cover the memory-bound pieces of the Lindblad right-hand side on
split real/imaginary planes: adding the transpose in place, combining
the diagonal part of -iH - D/2 in one pass, and the cavity-decay
sandwich as a fused gather-scale-scatter. Everything degrades to numpy
transparently when numba is missing.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional accelerator
    HAVE_NUMBA = False


if HAVE_NUMBA:

    @njit(cache=True)
    def _sym_add_numba(x, sign):  # pragma: no cover - exercised via wrapper
        n = x.shape[0]
        tile = 64
        for i0 in range(0, n, tile):
            i1 = min(i0 + tile, n)
            for i in range(i0, i1):
                x[i, i] = x[i, i] + sign * x[i, i]
                for j in range(i + 1, i1):
                    a = x[i, j]
                    b = x[j, i]
                    x[i, j] = a + sign * b
                    x[j, i] = b + sign * a
            for j0 in range(i1, n, tile):
                j1 = min(j0 + tile, n)
                for i in range(i0, i1):
                    for j in range(j0, j1):
                        a = x[i, j]
                        b = x[j, i]
                        x[i, j] = a + sign * b
                        x[j, i] = b + sign * a

    @njit(cache=True)
    def _diag_combine_numba(d_re, d_im, rr, ri, xr, xi):  # pragma: no cover
        n, m = rr.shape
        for i in range(n):
            a = d_re[i]
            b = d_im[i]
            for j in range(m):
                xr[i, j] = a * rr[i, j] - b * ri[i, j]
                xi[i, j] = a * ri[i, j] + b * rr[i, j]

    @njit(cache=True)
    def _gather_add_numba(x_t, plane, src, tgt, v_half):  # pragma: no cover
        nt = src.shape[0]
        for a in range(nt):
            sa = src[a]
            ta = tgt[a]
            va = v_half[a]
            for b in range(nt):
                x_t[ta, tgt[b]] += va * v_half[b] * plane[sa, src[b]]

    def sym_add_transpose(x: np.ndarray, sign: float = 1.0) -> None:
        """x += sign * x.T in place (square, float dtype)."""
        if x.size:
            _sym_add_numba(x, sign)

    def diag_combine(d_re, d_im, rr, ri, xr, xi) -> None:
        """xr = d_re*rr - d_im*ri, xi = d_re*ri + d_im*rr (row scaling)."""
        if rr.size:
            _diag_combine_numba(d_re, d_im, rr, ri, xr, xi)

    def gather_scale_add(x_t, plane, src, tgt, v_half) -> None:
        """x_t[tgt x tgt] += (v v^T / 2) * plane[src x src], fused."""
        if src.size:
            _gather_add_numba(x_t, plane, src, tgt, v_half)

else:

    def sym_add_transpose(x: np.ndarray, sign: float = 1.0) -> None:
        """x += sign * x.T in place (square, float dtype)."""
        if x.size:
            x += sign * x.T.copy()

    def diag_combine(d_re, d_im, rr, ri, xr, xi) -> None:
        """xr = d_re*rr - d_im*ri, xi = d_re*ri + d_im*rr (row scaling)."""
        np.multiply(d_re[:, None], rr, out=xr)
        xr -= d_im[:, None] * ri
        np.multiply(d_re[:, None], ri, out=xi)
        xi += d_im[:, None] * rr

    def gather_scale_add(x_t, plane, src, tgt, v_half) -> None:
        """x_t[tgt x tgt] += (v v^T / 2) * plane[src x src], fused."""
        if not src.size:
            return
        sub = plane[np.ix_(src, src)]
        sub *= v_half[:, None]
        sub *= v_half[None, :]
        x_t[np.ix_(tgt, tgt)] += sub
