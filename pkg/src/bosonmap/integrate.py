"""ODE integrators used by the Lindblad engine.

Two drivers over flat complex state vectors:

* ``dopri5``: hand-rolled adaptive embedded Runge-Kutta 5(4)
  (Dormand-Prince pair) with quartic dense output at requested grid
  times and an optional post-acceptance hook (used to re-Hermitize the
  density matrix after each accepted step).
* ``adams``: high-order Adams via scipy's zvode, for large systems where
  the 5(4) pair's small oscillation-limited steps are too expensive.

Both integrate y' = f(t, y) with f time-independent in this package, but
the time argument is passed through for generality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import ode as _scipy_ode

from .errors import NumericalError

__all__ = ["StepStats", "dopri5", "adams", "integrate_vector"]

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# b5 - b4: coefficients of the embedded error estimate.
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# Quartic dense-output interpolant of the 5(4) pair:
# y(t0 + theta*h) = y0 + h * (K^T P) . [theta, theta^2, theta^3, theta^4]
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


@dataclass
class StepStats:
    """Bookkeeping of one integration run."""

    n_steps: int = 0
    n_rejected: int = 0
    n_rhs: int = 0
    method: str = ""
    extra: dict = field(default_factory=dict)


def _error_norm(err, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.sqrt(np.mean(np.abs(y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean(np.abs(f0 / scale) ** 2)))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = float(np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def dopri5(
    f,
    y0: np.ndarray,
    t_grid: np.ndarray,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    post_accept=None,
    on_sample=None,
    max_steps: int = 10_000_000,
):
    """Adaptive RK5(4) from t_grid[0] over the whole grid.

    The state at every grid time is produced by the quartic dense-output
    interpolant and streamed to ``on_sample(index, y)`` (states are not
    accumulated — they can be large). ``post_accept(y) -> y`` is applied
    to each accepted step endpoint. Returns the final state and stats.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    dtype = np.result_type(np.asarray(y0).dtype, np.float64)
    y = np.array(y0, dtype=dtype, copy=True)
    t = float(t_grid[0])
    t_end = float(t_grid[-1])
    stats = StepStats(method="dopri5")

    if on_sample is not None:
        on_sample(0, y)
    next_out = 1

    def rhs(tt, yy):
        stats.n_rhs += 1
        return f(tt, yy)

    # k[0] copies the RHS output: f may reuse its output buffer between calls
    k = np.empty((7, y.size), dtype=dtype)
    k[0] = rhs(t, y)
    h = _initial_step(rhs, t, y, k[0], rtol, atol)
    h = min(h, t_end - t) if t_end > t else h

    while t < t_end:
        if stats.n_steps + stats.n_rejected >= max_steps:
            raise NumericalError(
                f"integration exceeded {max_steps} steps before reaching t={t_end}"
            )
        h = min(h, t_end - t)
        if h <= abs(t) * 1e-15 + 1e-300:
            raise NumericalError(
                f"step size underflow at t={t} (h={h}); the problem is likely stiff "
                "for the RK5(4) pair — try method='adams'"
            )

        for i in range(1, 7):
            yi = y + h * (_A[i] @ k[:i])
            k[i] = rhs(t + _C[i] * h, yi)
        y_new = y + h * (_B5 @ k)
        err_vec = h * (_E @ k)
        if not np.all(np.isfinite(y_new)):
            raise NumericalError(f"non-finite state encountered at t={t + h}")
        err = _error_norm(err_vec, y, y_new, rtol, atol)

        if err <= 1.0:
            t_new = t + h
            # dense output for requested grid times inside (t, t_new]
            while next_out < len(t_grid) and t_grid[next_out] <= t_new + 1e-14 * max(1.0, abs(t_new)):
                if on_sample is not None:
                    theta = (t_grid[next_out] - t) / h
                    tp = np.array([theta, theta**2, theta**3, theta**4])
                    on_sample(next_out, y + h * ((_P @ tp) @ k))
                next_out += 1
            y = y_new
            t = t_new
            if post_accept is not None:
                y = post_accept(y)
            stats.n_steps += 1
            factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, _SAFETY * err**-0.2)
            h *= max(_MIN_FACTOR, factor)
            if t < t_end:
                k[0] = rhs(t, y)
        else:
            stats.n_rejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * err**-0.2)

    while next_out < len(t_grid):
        if on_sample is not None:
            on_sample(next_out, y)
        next_out += 1
    return y, stats


def adams(
    f,
    y0: np.ndarray,
    t_grid: np.ndarray,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    order: int = 12,
    post_accept=None,
    on_sample=None,
    max_steps: int = 10_000_000,
):
    """Variable-order Adams (vode/zvode, functional iteration) over the grid.

    Real states integrate with vode, complex ones with zvode. Samples come
    from the solver's own interpolation at the grid times and are streamed
    to ``on_sample``; ``post_accept`` is applied to the sampled copies
    only, since the multistep history cannot be adjusted mid-run.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    stats = StepStats(method="adams")

    def rhs(tt, yy):
        stats.n_rhs += 1
        return f(tt, yy)

    is_complex = np.iscomplexobj(np.asarray(y0))
    solver = _scipy_ode(rhs)
    solver.set_integrator(
        "zvode" if is_complex else "vode",
        method="adams",
        with_jacobian=False,
        order=order,
        rtol=rtol,
        atol=atol,
        nsteps=max_steps,
    )
    y_start = np.array(y0, dtype=np.complex128 if is_complex else np.float64, copy=True)
    solver.set_initial_value(y_start, float(t_grid[0]))

    if on_sample is not None:
        on_sample(0, y_start)
    yk = y_start
    for i, tk in enumerate(t_grid[1:], start=1):
        yk = solver.integrate(float(tk))
        if not solver.successful():
            raise NumericalError(f"zvode failed near t={tk}")
        if not np.all(np.isfinite(yk)):
            raise NumericalError(f"non-finite state encountered at t={tk}")
        if on_sample is not None:
            out = yk.copy()
            if post_accept is not None:
                out = post_accept(out)
            on_sample(i, out)
    return yk, stats


_METHODS = {"dopri5": dopri5, "adams": adams}


def integrate_vector(
    method: str, f, y0, t_grid, rtol, atol, post_accept=None, on_sample=None, **kwargs
):
    """Dispatch to one of the named integration drivers."""
    try:
        driver = _METHODS[method]
    except KeyError:
        raise ValueError(
            f"unknown integrator {method!r}; available: {sorted(_METHODS)}"
        ) from None
    return driver(
        f, y0, t_grid, rtol=rtol, atol=atol, post_accept=post_accept,
        on_sample=on_sample, **kwargs,
    )
