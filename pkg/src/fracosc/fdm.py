"""Grünwald-Letnikov finite-difference reference solver.

The fractional damping term is discretized with the GL weights
w0 = 1, wj = (1 - (beta+1)/j) w_{j-1}; the inertia term with the centered
second difference at level i; and the unknown x_{i+1} carries both the j=0
GL weight and the stiffness term, giving the update

  x_{i+1} [1 + 2 zeta (wn dt)^(2-beta)]
      = dt^2 h(t_i) + 2 x_i - x_{i-1} - (wn dt)^2 x_i
        - 2 zeta (wn dt)^(2-beta) * sum_{j=1}^{i+1} w_j x_{i+1-j}.

The stiffness term is taken at level i (the center of the second
difference); putting it at i+1 adds an O(dt) phase bias roughly ten times
larger on the benchmark cases. The scheme is validated against the
beta in {0, 1} closed forms and the stable series in tests. Full memory is
kept (no short-memory truncation): horizons here are at most ~1e4 steps, so
the O(n^2) sum is affordable and the solver stays approximation-free.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import OscillatorParams, TimeGrid, TimeSeries
from .specfun import DomainError


class FdmInstabilityError(RuntimeError):
    """The explicit march diverged (step size too large for the parameters)."""


@dataclass(frozen=True)
class GlWeights:
    """Grünwald-Letnikov weights (-1)^j C(beta, j) via the recurrence."""

    beta: float
    w: np.ndarray


def gl_weights(beta: float, n: int) -> GlWeights:
    if n < 1:
        raise DomainError("n must be >= 1")
    j = np.arange(1, n)
    factors = 1.0 - (beta + 1.0) / j
    w = np.empty(n)
    w[0] = 1.0
    if n > 1:
        w[1:] = np.cumprod(factors)
    return GlWeights(beta=beta, w=w)


def _march(
    p: OscillatorParams,
    h_vals: np.ndarray,
    grid: TimeGrid,
    x1: float,
    h_scale: float,
) -> np.ndarray:
    if grid.t0 != 0.0:
        raise DomainError("FDM march requires t0 = 0")
    dt = grid.dt
    if p.omega_n * dt >= 0.1:
        warnings.warn(
            f"omega_n*dt = {p.omega_n * dt:.3g} >= 0.1; FDM step too coarse",
            stacklevel=3,
        )
    n = grid.n
    w = gl_weights(p.beta, n).w
    damp = 2.0 * p.zeta * (p.omega_n * dt) ** (2.0 - p.beta)
    stiff = (p.omega_n * dt) ** 2
    denom = 1.0 + damp
    blow_limit = 1e6 * h_scale

    x = np.zeros(n)
    x[1] = x1
    # xrev mirrors x so the GL memory sum is a contiguous dot product:
    # sum_{j=1}^{i+1} w_j x_{i+1-j} = w[1:i+2] . xrev[n-1-i : n]
    xrev = np.zeros(n)
    xrev[n - 1] = x[0]
    xrev[n - 2] = x[1]
    for i in range(1, n - 1):
        mem = np.dot(w[1 : i + 2], xrev[n - 1 - i :])
        num = dt * dt * h_vals[i] + 2.0 * x[i] - x[i - 1] - stiff * x[i] - damp * mem
        xi1 = num / denom
        if abs(xi1) > blow_limit:
            raise FdmInstabilityError(
                f"|x| = {abs(xi1):.3e} exceeded {blow_limit:.3e} at t = {(i + 1) * dt:.4g}"
            )
        x[i + 1] = xi1
        xrev[n - 2 - i] = xi1
    return x


def fdm_solve(
    p: OscillatorParams, h: Callable[[np.ndarray], np.ndarray], grid: TimeGrid
) -> TimeSeries:
    """Forced response with zero initial conditions (x(0) = 0, x'(0) = 0)."""
    h_vals = np.asarray(h(grid.times()), dtype=float)
    if h_vals.shape != (grid.n,):
        raise DomainError("excitation must return one value per grid sample")
    h_max = float(np.max(np.abs(h_vals)))
    h_scale = max(h_max / p.omega_n ** 2, 1.0 / p.omega_n)
    x = _march(p, h_vals, grid, x1=0.0, h_scale=h_scale)
    return TimeSeries(grid=grid, values=x, unit="m")


def impulse_fdm(p: OscillatorParams, grid: TimeGrid) -> TimeSeries:
    """Impulse response estimate: homogeneous march with x(0) = 0 and unit
    initial velocity approximated by x(t_1) = dt."""
    h_vals = np.zeros(grid.n)
    x = _march(p, h_vals, grid, x1=grid.dt, h_scale=1.0 / p.omega_n)
    return TimeSeries(grid=grid, values=x, unit="s")
