"""Log-domain building blocks for evaluating series whose raw term magnitudes
overflow double precision (individual terms reach ~1e198 while the sum is O(1)).

Everything here works on (log|x|, sign) pairs and reports how many decimal
digits were lost to cancellation, so downstream code can decide whether a
result is still trustworthy.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Iterable, NamedTuple

LN10 = math.log(10.0)

#: Terms with log-magnitude above this would overflow even after modest
#: intermediate arithmetic; results involving them are flagged invalid.
OVERFLOW_LOG = math.log(sys.float_info.max) - 10.0

#: Decimal digits of cancellation beyond which a double-precision sum retains
#: no significant figures.
CANCELLATION_LIMIT = 14.0


class DomainError(ValueError):
    """Argument outside the mathematical domain of a special function."""


@dataclass(frozen=True)
class LogMagnitude:
    """A real number stored as natural log of its magnitude plus a sign.

    sign is 0 iff the value is exactly zero (log_abs = -inf).
    """

    log_abs: float
    sign: int

    @staticmethod
    def from_value(x: float) -> "LogMagnitude":
        if x == 0.0:
            return LogMagnitude(-math.inf, 0)
        return LogMagnitude(math.log(abs(x)), 1 if x > 0 else -1)

    def compose(self, other: "LogMagnitude") -> "LogMagnitude":
        """Product of the two represented values."""
        sign = self.sign * other.sign
        if sign == 0:
            return LogMagnitude(-math.inf, 0)
        return LogMagnitude(self.log_abs + other.log_abs, sign)

    def value(self) -> float:
        return self.sign * math.exp(self.log_abs)


def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def log_binomial(n: int, k: int) -> float:
    """Natural log of the binomial coefficient C(n, k)."""
    if k < 0 or k > n:
        raise DomainError(f"log_binomial requires 0 <= k <= n, got n={n}, k={k}")
    # subtract in a canonical order so C(n,k) == C(n,n-k) bit for bit
    a, b = sorted((k, n - k))
    return log_gamma(n + 1) - log_gamma(a + 1) - log_gamma(b + 1)


class SignedSum(NamedTuple):
    value: float
    max_term_log: float
    cancellation: float  # decimal digits lost; +inf if the sum is exactly 0


def accumulate_signed(terms: Iterable[LogMagnitude]) -> SignedSum:
    """Sum sign-tracked log-domain terms by rescaling against the running max.

    With M the largest log magnitude seen, the sum is exp(M) * sum of
    sign_i * exp(log_abs_i - M), so no intermediate overflows as long as M
    itself is representable. Cancellation is reported as decimal digits,
    log10(exp(M) / |sum|).
    """
    M = -math.inf
    s = 0.0
    for t in terms:
        if t.sign == 0:
            continue
        if t.log_abs > M:
            if M > -math.inf:
                s *= math.exp(M - t.log_abs)
            M = t.log_abs
            s += t.sign
        else:
            s += t.sign * math.exp(t.log_abs - M)
    if M == -math.inf:
        return SignedSum(0.0, -math.inf, 0.0)
    if s == 0.0:
        return SignedSum(0.0, M, math.inf)
    log_value = M + math.log(abs(s))
    value = math.copysign(math.exp(log_value), s) if log_value < OVERFLOW_LOG + 10 else math.copysign(math.inf, s)
    return SignedSum(value, M, max(0.0, -math.log(abs(s)) / LN10))
