"""Equivalent-parameter layer: closed-form equivalent frequency and damping,
the logarithmic-decrement estimator, and the nonlinear least-squares refits of
the power-law regression constants.

The baked-in constants (2.24, 0.63) and (0.95, 0.85) come from fitting
beta**(A0 - A1*beta) to the characteristic-root frequency transition and to
the decrement-recovered damping ratio over the calibration box
beta in (0,1), zeta in [0.001, 0.15], omega_n in [1, 10] rad/s; the refit
machinery below reproduces them.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from .core import OscillatorParams, TimeSeries
from .specfun import DomainError

# Fitted power-law constants of the closed forms.
OMEGA_FIT = (2.24, 0.63)
ZETA_FIT = (0.95, 0.85)

DEFAULT_SEED = 20240001

# Sampling box used for the regression refits.
BOX_BETA = (0.0, 1.0)       # open interval; draws avoid the endpoints
BOX_ZETA = (0.001, 0.15)
BOX_OMEGA = (1.0, 10.0)


@dataclass(frozen=True)
class RegressionFit:
    """Fitted (a0, a1) of y = beta**(a0 - a1*beta) with 95% confidence intervals."""

    a0: float
    a1: float
    ci95_a0: tuple[float, float]
    ci95_a1: tuple[float, float]
    n_samples: int
    rmse: float


@dataclass(frozen=True)
class PeakList:
    """Positive local maxima of a response signal, in time order."""

    times: np.ndarray
    amplitudes: np.ndarray

    @property
    def count(self) -> int:
        return len(self.times)


def y_beta_model(beta: float, a0: float, a1: float) -> float:
    """beta**(a0 - a1*beta) with the conventions 0**positive = 0 and 1**x = 1."""
    if not 0.0 <= beta <= 1.0:
        raise DomainError("beta must be in [0, 1]")
    if beta == 0.0:
        return 0.0
    expo = a0 - a1 * beta
    if beta < 1.0 and expo <= 0.0:
        raise DomainError(f"exponent a0 - a1*beta = {expo} must be positive on (0, 1)")
    return beta ** expo


def omega_d_eq(p: OscillatorParams) -> float:
    """Closed-form equivalent damped frequency (rad/s)."""
    a0, a1 = OMEGA_FIT
    radicand = 1.0 + 2.0 * p.zeta - p.zeta * (2.0 + p.zeta) * y_beta_model(p.beta, a0, a1)
    if radicand <= 0.0:
        raise DomainError(f"equivalent-frequency radicand {radicand} <= 0")
    return p.omega_n * math.sqrt(radicand)


def zeta_eq(p: OscillatorParams) -> float:
    """Closed-form equivalent viscous damping ratio."""
    a0, a1 = ZETA_FIT
    if p.beta == 0.0:
        return 0.0
    return p.zeta * p.beta ** (a0 - a1 * p.beta)


def find_positive_peaks(x: TimeSeries, j_max: int = 10) -> PeakList:
    """Positive local maxima, refined by 3-point parabolic interpolation.

    Requires dense sampling (>= ~40 samples per oscillation period); peaks
    touching invalid samples are skipped. Raises if fewer than 2 positive
    peaks are found.
    """
    if j_max < 2:
        raise DomainError("j_max must be >= 2")
    v = x.values
    t = x.times()
    ok = x.valid
    times: list[float] = []
    amps: list[float] = []
    for i in range(1, x.grid.n - 1):
        if not (ok[i - 1] and ok[i] and ok[i + 1]):
            continue
        if v[i] <= 0.0:
            continue
        if v[i] >= v[i - 1] and v[i] > v[i + 1]:
            a, b, c = v[i - 1], v[i], v[i + 1]
            denom = a - 2.0 * b + c
            # flat triple: fall back to the grid sample
            if denom == 0.0:
                delta = 0.0
            else:
                delta = 0.5 * (a - c) / denom
            times.append(float(t[i] + delta * x.grid.dt))
            amps.append(float(b - 0.25 * (a - c) * delta))
            if len(times) >= j_max:
                break
    if len(times) < 2:
        raise DomainError(
            f"need at least 2 positive peaks, found {len(times)} in [0, {x.grid.t_end}]"
        )
    return PeakList(times=np.array(times), amplitudes=np.array(amps))


def log_decrement_zeta(peaks: PeakList, j: int = 2) -> float:
    """Equivalent damping ratio delta/sqrt(delta^2 + 4 pi^2) with
    delta = ln(x1/xj)/(j-1). Warns (but still returns) when the signal does
    not decay (delta <= 0)."""
    if j < 2:
        raise DomainError("j must be >= 2")
    if peaks.count < j:
        raise DomainError(f"need {j} peaks, have {peaks.count}")
    delta = math.log(peaks.amplitudes[0] / peaks.amplitudes[j - 1]) / (j - 1)
    if delta < 0.0:
        warnings.warn(f"non-decaying peak sequence (delta={delta})", stacklevel=2)
    return delta / math.sqrt(delta * delta + 4.0 * math.pi ** 2)


def y_beta_from_root(p: OscillatorParams) -> float:
    """Frequency transition variable (M0 - Mb)/(M0 - M1) from the
    characteristic root, where Mb = (omega_d/omega_n)^2."""
    if p.zeta == 0.0:
        raise DomainError("y_beta_from_root undefined at zeta = 0")
    from .charroot import omega_d  # local import: charroot uses our closed forms

    m_beta = (omega_d(p) / p.omega_n) ** 2
    m0 = 1.0 + 2.0 * p.zeta
    m1 = 1.0 - p.zeta ** 2
    return (m0 - m_beta) / (m0 - m1)


def fit_power_law(
    samples: list[tuple[float, float]],
    init_a0: float = 1.0,
    init_a1: float = 1.0,
) -> RegressionFit:
    """Levenberg-Marquardt fit of y = beta**(a0 - a1*beta) with analytic
    Jacobian; 95% CIs from the linearized covariance at the optimum."""
    if len(samples) < 3:
        raise DomainError(f"need >= 3 samples for a 2-parameter fit, got {len(samples)}")
    if len(samples) < 100:
        warnings.warn(
            f"only {len(samples)} samples; confidence intervals will be wide",
            stacklevel=2,
        )
    beta = np.array([s[0] for s in samples])
    y = np.array([s[1] for s in samples])
    if np.any(beta <= 0.0) or np.any(beta >= 1.0):
        raise DomainError("beta samples must lie strictly inside (0, 1)")
    lb = np.log(beta)

    def model(a):
        return beta ** (a[0] - a[1] * beta)

    def resid(a):
        return model(a) - y

    def jac(a):
        ym = model(a)
        return np.column_stack([ym * lb, -ym * beta * lb])

    sol = optimize.least_squares(
        resid,
        x0=[init_a0, init_a1],
        jac=jac,
        method="lm",
        xtol=1e-10,
        max_nfev=500,
    )
    if not sol.success:
        raise RuntimeError(f"power-law fit did not converge: {sol.message}")
    a0, a1 = sol.x
    n = len(samples)
    dof = n - 2
    ssr = float(np.sum(sol.fun ** 2))
    s2 = ssr / dof
    jtj = sol.jac.T @ sol.jac
    try:
        cov = s2 * np.linalg.inv(jtj)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("singular normal equations in power-law fit") from exc
    tq = stats.t.ppf(0.975, dof)
    se = np.sqrt(np.diag(cov))
    return RegressionFit(
        a0=float(a0),
        a1=float(a1),
        ci95_a0=(float(a0 - tq * se[0]), float(a0 + tq * se[0])),
        ci95_a1=(float(a1 - tq * se[1]), float(a1 + tq * se[1])),
        n_samples=n,
        rmse=math.sqrt(ssr / n),
    )


def draw_box_samples(n: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Uniform independent draws of (beta, zeta, omega_n) from the calibration
    box; beta avoids the endpoints. Shape (n, 3)."""
    rng = np.random.default_rng(seed)
    beta = rng.uniform(1e-3, 1.0 - 1e-3, n)
    z = rng.uniform(*BOX_ZETA, n)
    wn = rng.uniform(*BOX_OMEGA, n)
    return np.column_stack([beta, z, wn])


def _y_beta_worker(row) -> tuple[float, float] | None:
    beta, z, wn = row
    try:
        return beta, y_beta_from_root(OscillatorParams(wn, z, beta))
    except Exception:
        return None


def estimate_zeta_ratio(
    p: OscillatorParams,
    j: int = 2,
    periods: float = 6.0,
    samples_per_period: int = 80,
) -> float:
    """Decrement-recovered damping over zeta for one parameter set.

    The signal is the stable series evaluation where valid, backfilled by the
    finite-difference solution beyond the series' valid window. The horizon is
    ``periods`` full periods of the equivalent damped frequency.
    """
    from . import fdm, ml_series
    from .core import linspace_grid

    wd = omega_d_eq(p)
    t_end = periods * 2.0 * math.pi / wd
    n = int(round(periods * samples_per_period)) + 1
    grid = linspace_grid(t_end, n)
    sig = ml_series.impulse_series_grid(p, grid)
    if not sig.valid.all():
        fd = fdm.impulse_fdm(p, grid)
        values = np.where(sig.valid, sig.values, fd.values)
        sig = TimeSeries(grid=grid, values=values, unit="s")
    peaks = find_positive_peaks(sig, j_max=max(j, 2))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        z_est = log_decrement_zeta(peaks, j=j)
    return z_est / p.zeta


def _zeta_ratio_worker(row) -> tuple[float, float] | None:
    beta, z, wn = row
    try:
        return beta, estimate_zeta_ratio(OscillatorParams(wn, z, beta))
    except Exception:
        return None


def sample_y_beta(
    n: int, seed: int = DEFAULT_SEED, jobs: int = 1
) -> tuple[list[tuple[float, float]], int]:
    """(beta, Y_beta) scatter from the characteristic root over the calibration
    box. Returns (samples, n_failed)."""
    return _run_sampler(_y_beta_worker, n, seed, jobs)


def sample_zeta_ratio(
    n: int, seed: int = DEFAULT_SEED, jobs: int = 1
) -> tuple[list[tuple[float, float]], int]:
    """(beta, zeta_est/zeta) scatter from the logarithmic decrement."""
    return _run_sampler(_zeta_ratio_worker, n, seed, jobs)


def _run_sampler(worker, n: int, seed: int, jobs: int):
    rows = draw_box_samples(n, seed)
    if jobs > 1:
        import multiprocessing as mp

        with mp.Pool(jobs) as pool:
            results = pool.map(worker, rows, chunksize=max(1, n // (8 * jobs)))
    else:
        results = [worker(row) for row in rows]
    samples = [r for r in results if r is not None]
    return samples, n - len(samples)
