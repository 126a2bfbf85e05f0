"""Occupation-number bases for d bosonic modes at fixed particle number.

A collection of N identical d-level emitters, restricted to its totally
symmetric subspace, is isomorphic to N bosons distributed over d modes.
This module enumerates those occupation vectors, provides rank/unrank
maps, and builds composite (emitter ⊗ cavity) index spaces, optionally
restricted to a maximum total excitation number.

Ordering convention: occupation vectors are listed in descending
lexicographic order, e.g. for d=3, N=2:
(2,0,0), (1,1,0), (1,0,1), (0,2,0), (0,1,1), (0,0,2).
Composite indices run emitter-major: index = emitter_index * cavity_dim
+ cavity_index.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "sector_dimension",
    "FockBasis",
    "CompositeBasis",
    "restrict_composite",
]

# Largest basis we will enumerate; beyond this, operator indices would
# not be representable / materializable anyway.
_MAX_BASIS_SIZE = 50_000_000


def sector_dimension(d: int, n_particles: int) -> int:
    """Number of ways to put n_particles bosons into d modes (stars and bars)."""
    return math.comb(n_particles + d - 1, n_particles)


def _compositions(n: int, k: int):
    """Yield all weak compositions of n into k parts, descending lexicographic."""
    if k == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


class FockBasis:
    """All occupation vectors of ``d`` modes with exactly ``n_particles`` quanta.

    Attributes
    ----------
    d : int
        Number of modes.
    n_particles : int
        Total particle number of the sector.
    states : np.ndarray, shape (size, d)
        Occupation vectors, row i is the state with rank i.
    """

    def __init__(self, d: int, n_particles: int):
        if d < 1:
            raise ValueError(f"need at least one mode, got d={d}")
        if n_particles < 0:
            raise ValueError(f"particle number must be >= 0, got {n_particles}")
        size = sector_dimension(d, n_particles)
        if size > _MAX_BASIS_SIZE:
            raise ValueError(
                f"basis size C({n_particles + d - 1},{n_particles}) = {size} "
                f"exceeds the supported maximum {_MAX_BASIS_SIZE}"
            )
        self.d = d
        self.n_particles = n_particles
        self.states = np.array(list(_compositions(n_particles, d)), dtype=np.int64)
        self.states.setflags(write=False)
        self._rank = {tuple(row): i for i, row in enumerate(self.states.tolist())}

    def __len__(self) -> int:
        return self.states.shape[0]

    def __iter__(self):
        for row in self.states.tolist():
            yield tuple(row)

    def __repr__(self) -> str:
        return f"FockBasis(d={self.d}, n_particles={self.n_particles}, size={len(self)})"

    @property
    def tag(self) -> str:
        """Identifier used to detect operator/basis mismatches."""
        return f"fock(d={self.d},N={self.n_particles})"

    def rank(self, occ) -> int:
        """Index of an occupation vector; raises if it is not in this sector."""
        key = tuple(int(n) for n in occ)
        if len(key) != self.d:
            raise ValueError(f"expected {self.d} modes, got {len(key)}")
        if any(n < 0 for n in key):
            raise ValueError(f"negative occupation in {key}")
        if sum(key) != self.n_particles:
            raise ValueError(
                f"occupation {key} has {sum(key)} particles, sector holds {self.n_particles}"
            )
        return self._rank[key]

    def unrank(self, index: int) -> tuple:
        """Occupation vector at a given index (inverse of rank)."""
        return tuple(self.states[index].tolist())


class CompositeBasis:
    """Product space of an emitter Fock sector and a truncated cavity mode.

    Composite index = emitter_index * cavity_dim + cavity_index (emitter
    slowest). If ``excitation_weights`` (one integer per emitter mode) and
    ``max_excitation`` are both given, only composite states with

        sum_alpha w_alpha * n_alpha + n_cav <= max_excitation

    are retained; ``retained`` maps restricted -> unrestricted indices and
    ``position`` gives the inverse (-1 for dropped states).
    """

    def __init__(
        self,
        emitter_basis: FockBasis,
        cavity_dim: int,
        excitation_weights=None,
        max_excitation: int | None = None,
    ):
        if cavity_dim < 1:
            raise ValueError(f"cavity dimension must be >= 1, got {cavity_dim}")
        self.emitter_basis = emitter_basis
        self.cavity_dim = int(cavity_dim)
        self.unrestricted_size = len(emitter_basis) * self.cavity_dim

        if excitation_weights is not None:
            excitation_weights = np.asarray(excitation_weights, dtype=np.int64)
            if excitation_weights.shape != (emitter_basis.d,):
                raise ValueError(
                    f"need one weight per emitter mode ({emitter_basis.d}), "
                    f"got shape {excitation_weights.shape}"
                )
            if np.any(excitation_weights < 0):
                raise ValueError("excitation weights must be non-negative")
        self.excitation_weights = excitation_weights
        self.max_excitation = max_excitation

        if excitation_weights is not None and max_excitation is not None:
            exc = self.excitations()
            self.retained = np.flatnonzero(exc <= max_excitation)
        else:
            self.retained = None

        if self.retained is None:
            self.size = self.unrestricted_size
            self.position = None
        else:
            self.size = int(self.retained.size)
            self.position = np.full(self.unrestricted_size, -1, dtype=np.int64)
            self.position[self.retained] = np.arange(self.size)

    def excitations(self) -> np.ndarray:
        """Total weighted excitation of every unrestricted composite state."""
        if self.excitation_weights is None:
            raise ValueError("no excitation weights set on this basis")
        emitter_exc = self.emitter_basis.states @ self.excitation_weights
        return (emitter_exc[:, None] + np.arange(self.cavity_dim)[None, :]).ravel()

    @property
    def restricted(self) -> bool:
        return self.retained is not None

    @property
    def tag(self) -> str:
        base = f"{self.emitter_basis.tag}*cav({self.cavity_dim})"
        if self.restricted:
            return f"{base}|exc<={self.max_excitation}"
        return base

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"CompositeBasis({self.tag}, size={self.size})"

    def index(self, occ, n_cav: int) -> int:
        """Composite index of (emitter occupation, cavity level)."""
        if not 0 <= n_cav < self.cavity_dim:
            raise ValueError(f"cavity level {n_cav} outside [0, {self.cavity_dim})")
        full = self.emitter_basis.rank(occ) * self.cavity_dim + n_cav
        if self.retained is None:
            return full
        pos = int(self.position[full])
        if pos < 0:
            raise ValueError(f"state ({tuple(occ)}, {n_cav}) was removed by the restriction")
        return pos


def restrict_composite(
    basis: CompositeBasis,
    excitation_weights=None,
    max_excitation: int | None = None,
) -> CompositeBasis:
    """Return the excitation-restricted version of a composite basis.

    Weights/limit default to the ones already attached to ``basis``; passing
    ``max_excitation=None`` with no stored limit returns an unrestricted copy.
    Restriction is idempotent and monotone in ``max_excitation``.
    """
    if excitation_weights is None:
        excitation_weights = basis.excitation_weights
    if max_excitation is None:
        max_excitation = basis.max_excitation
    if max_excitation is not None and excitation_weights is None:
        raise ValueError("excitation weights are required to restrict the basis")
    return CompositeBasis(
        basis.emitter_basis,
        basis.cavity_dim,
        excitation_weights=excitation_weights,
        max_excitation=max_excitation,
    )
