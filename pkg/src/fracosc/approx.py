"""Closed-form approximate impulse response and frequency-response functions.

The FRFs are written in the nondimensional frequency g = omega/omega_n and
return omega_n^2 * H(i omega), so both are O(1) near resonance:

  exact:  h(g) = 1 / (1 - g^2 + 2 zeta (ig)^beta)
  approx: ht(g) = 1 / ((omega_d_eq/omega_n)^2 + (zeta_eq + ig)^2)

(ig)^beta is taken on the principal branch, g^beta exp(i beta pi/2) for
g > 0. At g = 0 the exact FRF is discontinuous in beta: (i0)^beta is 0 for
beta > 0 but 1 for beta = 0, so the two static values 1 and 1/(1+2 zeta)
are handled as explicit cases rather than limits.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import OscillatorParams
from .equiv import omega_d_eq, zeta_eq
from .specfun import DomainError

# An FRF denominator can only vanish for undamped configurations (zeta = 0,
# or beta = 0 in the equivalent form). Rounding keeps it from hitting zero
# exactly at the pole frequency, so near-zeros below this relative tolerance
# are treated as poles. Damped denominators near resonance are many orders
# of magnitude larger.
_POLE_TOL = 1e-12


@dataclass(frozen=True)
class FrfCurve:
    """Magnitude/phase samples of a frequency-response function on a uniform
    nondimensional frequency grid. Pole samples (infinite magnitude, only
    possible for undamped configurations) are masked out."""

    g: np.ndarray
    mag: np.ndarray
    phase: np.ndarray
    masked: np.ndarray

    def __post_init__(self):
        if not np.all(np.diff(self.g) > 0):
            raise DomainError("g grid must be strictly increasing")


def impulse_approx(p: OscillatorParams, t: float) -> float:
    """Equivalent-oscillator impulse response
    exp(-zeta_eq omega_n t) sin(omega_d_eq t) / omega_d_eq."""
    if t < 0:
        raise DomainError("t must be >= 0")
    wd = omega_d_eq(p)
    return math.exp(-zeta_eq(p) * p.omega_n * t) * math.sin(wd * t) / wd


def impulse_approx_grid(p: OscillatorParams, t: np.ndarray) -> np.ndarray:
    """Vectorized impulse_approx over an array of nonnegative times."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be >= 0")
    wd = omega_d_eq(p)
    return np.exp(-zeta_eq(p) * p.omega_n * t) * np.sin(wd * t) / wd


def frf_exact(p: OscillatorParams, g: float) -> complex:
    """Exact nondimensional FRF 1/(1 - g^2 + 2 zeta (ig)^beta).

    Returns complex infinity at the undamped pole (zeta = 0, g = 1).
    """
    if g < 0:
        raise DomainError("g must be >= 0")
    if g == 0.0:
        if p.beta == 0.0:
            return 1.0 / (1.0 + 2.0 * p.zeta) + 0.0j
        return 1.0 + 0.0j
    igb = g ** p.beta * cmath.exp(1j * p.beta * math.pi / 2.0)
    denom = 1.0 - g * g + 2.0 * p.zeta * igb
    if abs(denom) <= _POLE_TOL * (1.0 + g * g):
        return complex(math.inf, math.inf)
    return 1.0 / denom


def frf_approx(p: OscillatorParams, g: float) -> complex:
    """Equivalent-oscillator FRF 1/((omega_d_eq/omega_n)^2 + (zeta_eq + ig)^2).

    Returns complex infinity at the pole, which only occurs for beta = 0 at
    g = sqrt(1 + 2 zeta).
    """
    if g < 0:
        raise DomainError("g must be >= 0")
    wd_ratio = omega_d_eq(p) / p.omega_n
    denom = wd_ratio * wd_ratio + (zeta_eq(p) + 1j * g) ** 2
    if abs(denom) <= _POLE_TOL * (1.0 + g * g):
        return complex(math.inf, math.inf)
    return 1.0 / denom


def frf_curve(p: OscillatorParams, which: str, g_max: float, n: int) -> FrfCurve:
    """Sample |h| and arg h on a uniform g grid in [0, g_max].

    which is "exact" or "approx". Pole samples are masked (mag and phase set
    to nan with masked=True).
    """
    if which not in ("exact", "approx"):
        raise DomainError(f"which must be 'exact' or 'approx', got {which!r}")
    if g_max <= 0:
        raise DomainError("g_max must be > 0")
    if n < 2:
        raise DomainError("n must be >= 2")
    fn = frf_exact if which == "exact" else frf_approx
    g = np.linspace(0.0, g_max, n)
    mag = np.empty(n)
    phase = np.empty(n)
    masked = np.zeros(n, dtype=bool)
    for i, gi in enumerate(g):
        h = fn(p, float(gi))
        if not (math.isfinite(h.real) and math.isfinite(h.imag)):
            mag[i] = math.nan
            phase[i] = math.nan
            masked[i] = True
        else:
            mag[i] = abs(h)
            phase[i] = cmath.phase(h)
    return FrfCurve(g=g, mag=mag, phase=phase, masked=masked)
