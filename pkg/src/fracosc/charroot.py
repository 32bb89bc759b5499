"""Upper-half-plane root of the fractional characteristic equation
s^2 + 2 zeta omega_n^(2-beta) s^beta + omega_n^2 = 0.

s^beta uses the principal branch, which is continuous off the negative real
axis and reproduces both limiting roots (beta = 0 and beta = 1). The damped
frequency of the fractional oscillator is |Im s|.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .core import OscillatorParams
from .equiv import omega_d_eq, zeta_eq
from .specfun import DomainError

MAX_ITER = 200
MAX_HALVINGS = 30
RESIDUAL_TOL = 1e-10  # relative to omega_n^2


class RootSolveError(RuntimeError):
    """Newton iteration failed to converge; carries the last iterate."""

    def __init__(self, message: str, last: complex, residual: float):
        super().__init__(message)
        self.last = last
        self.residual = residual


@dataclass(frozen=True)
class CharRoot:
    """Upper-half-plane characteristic root with solver diagnostics."""

    re: float
    im: float
    residual: float
    iterations: int

    @property
    def s(self) -> complex:
        return complex(self.re, self.im)


def char_residual(p: OscillatorParams, s: complex) -> complex:
    """Value of the characteristic function at s (principal branch of s^beta)."""
    if s == 0 and 0.0 < p.beta < 1.0:
        raise DomainError("characteristic function has a branch point at s = 0")
    wn = p.omega_n
    return s * s + 2.0 * p.zeta * wn ** (2.0 - p.beta) * _principal_pow(s, p.beta) + wn * wn


def _principal_pow(s: complex, beta: float) -> complex:
    if beta == 0.0:
        return 1.0 + 0.0j
    if beta == 1.0:
        return s
    return cmath.exp(beta * cmath.log(s))


def _dchar(p: OscillatorParams, s: complex) -> complex:
    # d/ds of the characteristic function: 2s + 2 zeta beta wn^(2-beta) s^(beta-1)
    return 2.0 * s + 2.0 * p.zeta * p.beta * p.omega_n ** (2.0 - p.beta) * _principal_pow(
        s, p.beta - 1.0
    )


def solve_char_root(p: OscillatorParams) -> CharRoot:
    """Damped Newton from the closed-form equivalent-parameter initial guess.

    For beta in {0, 1} the classical root is returned directly. Converges to
    |residual| <= 1e-10 * omega_n^2 or raises RootSolveError.
    """
    if p.zeta >= 1.0:
        raise DomainError("root solver calibrated for zeta < 1")
    wn = p.omega_n
    if p.beta == 1.0:
        s = complex(-p.zeta * wn, wn * math.sqrt(1.0 - p.zeta ** 2))
        return CharRoot(s.real, s.imag, abs(char_residual(p, s)), 0)
    if p.beta == 0.0:
        s = complex(0.0, wn * math.sqrt(1.0 + 2.0 * p.zeta))
        return CharRoot(s.real, s.imag, abs(char_residual(p, s)), 0)

    tol = RESIDUAL_TOL * wn * wn
    s = complex(-zeta_eq(p) * wn, omega_d_eq(p))
    f = char_residual(p, s)
    for it in range(1, MAX_ITER + 1):
        if abs(f) <= tol:
            if s.imag < 0:
                s = s.conjugate()
            return CharRoot(s.real, s.imag, abs(f), it - 1)
        step = -f / _dchar(p, s)
        # step halving until |f| decreases (the guess is close, so this is
        # nearly always the full step)
        for _ in range(MAX_HALVINGS):
            s_new = s + step
            if s_new.imag <= 0.0:  # stay in the upper half plane
                step *= 0.5
                continue
            f_new = char_residual(p, s_new)
            if abs(f_new) < abs(f):
                s, f = s_new, f_new
                break
            step *= 0.5
        else:
            raise RootSolveError(
                f"Newton stalled at s={s} after {it} iterations", s, abs(f)
            )
    raise RootSolveError(
        f"no convergence after {MAX_ITER} iterations (|f|={abs(f):.3e})", s, abs(f)
    )


def omega_d(p: OscillatorParams) -> float:
    """Damped frequency |Im s| of the upper-half-plane characteristic root."""
    return abs(solve_char_root(p).im)
