"""Shared domain types: oscillator parameters, uniform time grids, signals."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

# The regression constants baked into the equivalent-parameter formulas were
# calibrated on this box; outside it they are extrapolations.
CALIBRATED_ZETA_RANGE = (0.001, 0.15)
CALIBRATED_OMEGA_RANGE = (1.0, 10.0)


class ParameterError(ValueError):
    """A domain parameter violates its admissible range."""


@dataclass(frozen=True)
class OscillatorParams:
    """Natural frequency (rad/s), damping ratio, and fractional damping order.

    The damping coefficient in the equation of motion is 2*zeta*omega_n**(2-beta);
    it is always derived on the fly, never stored.
    """

    omega_n: float
    zeta: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.omega_n) and self.omega_n > 0):
            raise ParameterError("omega_n must be > 0 and finite")
        if not (math.isfinite(self.zeta) and 0.0 <= self.zeta <= 1.0):
            raise ParameterError("zeta must be in [0, 1] and finite")
        if not (math.isfinite(self.beta) and 0.0 <= self.beta <= 1.0):
            raise ParameterError("beta must be in [0, 1] and finite")

    @property
    def extended_range(self) -> bool:
        """True when zeta lies outside the calibration range of the fitted constants."""
        lo, hi = CALIBRATED_ZETA_RANGE
        return not (lo <= self.zeta <= hi)


def validate_params(p: OscillatorParams) -> OscillatorParams:
    """Check all invariants of ``p`` and return it unchanged.

    Raises ParameterError naming the offending field. Warns (without failing)
    when zeta is outside the calibrated range, because the fitted
    equivalent-parameter constants are only calibrated there.
    """
    # Construction re-runs the hard checks; this also makes the call idempotent.
    OscillatorParams(p.omega_n, p.zeta, p.beta)
    if p.extended_range:
        warnings.warn(
            f"zeta={p.zeta} is outside the calibrated range "
            f"{CALIBRATED_ZETA_RANGE}; equivalent-parameter fits are extrapolated",
            stacklevel=2,
        )
    return p


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid. Sample times are always t0 + i*dt (multiplied, never
    accumulated), so there is no summation drift."""

    t0: float
    dt: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ParameterError("dt must be > 0 and finite")
        if self.n < 2:
            raise ParameterError("n must be >= 2")

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.n - 1)


def linspace_grid(t_end: float, n: int) -> TimeGrid:
    """Grid on [0, t_end] with n samples; dt = t_end/(n-1)."""
    if not (math.isfinite(t_end) and t_end > 0):
        raise ParameterError("t_end must be > 0 and finite")
    if n < 2:
        raise ParameterError("n must be >= 2")
    return TimeGrid(t0=0.0, dt=t_end / (n - 1), n=n)


@dataclass
class TimeSeries:
    """Sampled signal on a uniform grid with a per-sample validity mask.

    Samples where the evaluation was declared unstable carry valid=False and
    are excluded from norms.
    """

    grid: TimeGrid
    values: np.ndarray
    unit: str = "m"
    valid: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ParameterError(
                f"values length {self.values.shape} != grid.n {self.grid.n}"
            )
        if self.valid is None:
            self.valid = np.ones(self.grid.n, dtype=bool)
        else:
            self.valid = np.asarray(self.valid, dtype=bool)
            if self.valid.shape != (self.grid.n,):
                raise ParameterError("valid mask length != grid.n")

    def times(self) -> np.ndarray:
        return self.grid.times()

    def max_abs(self) -> float:
        """Max |value| over valid samples (0 if none are valid)."""
        if not self.valid.any():
            return 0.0
        return float(np.max(np.abs(self.values[self.valid])))

    def valid_until(self) -> float:
        """Time of the last sample before the first invalid one (t_end if all valid)."""
        idx = np.flatnonzero(~self.valid)
        if idx.size == 0:
            return self.grid.t_end
        first = int(idx[0])
        return self.grid.t0 if first == 0 else float(self.times()[first - 1])
