"""Forced response by convolution with the impulse kernel, plus the canned
comparison cases (four impulse benchmarks and the Yuan forced response).

x(t) = integral_0^t h(t - s) I(s) ds, evaluated with trapezoidal weights on
the uniform grid. The kernel samples are computed once per grid and the
discrete convolution runs through scipy's FFT path, with the trapezoid
endpoint correction applied afterwards (the kernel vanishes at s = 0, so
only the h(0) end needs the half weight).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal

from . import approx, fdm, ml_series
from .core import OscillatorParams, TimeGrid, TimeSeries, linspace_grid
from .specfun import DomainError

# Impulse benchmark cases: (omega_n, zeta, beta).
CASES = {
    "1": (1.0, 0.01, 0.1),
    "2": (10.0, 0.15, 0.9),
    "3": (1.0, 0.15, 0.5),
    "4": (5.0, 0.05, 0.5),
}

YUAN_PARAMS = OscillatorParams(omega_n=math.sqrt(2.0), zeta=0.1214, beta=0.56)
YUAN_AMPLITUDE = 30.0
YUAN_FREQUENCY = 6.0


class KernelInvalidError(RuntimeError):
    """The series kernel loses validity before the end of the horizon."""

    def __init__(self, message: str, valid_until: float):
        super().__init__(message)
        self.valid_until = valid_until


@dataclass(frozen=True)
class Excitation:
    """Forcing term h(t): cosine, sine, constant, or tabulated samples."""

    kind: str
    amplitude: float = 0.0
    frequency: float = 0.0
    table: TimeSeries | None = None

    def __post_init__(self):
        if self.kind not in ("cosine", "sine", "constant", "tabulated"):
            raise DomainError(f"unknown excitation kind {self.kind!r}")
        if not math.isfinite(self.amplitude):
            raise DomainError("amplitude must be finite")
        if self.kind == "tabulated" and self.table is None:
            raise DomainError("tabulated excitation requires a table")

    def sample(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "cosine":
            return self.amplitude * np.cos(self.frequency * t)
        if self.kind == "sine":
            return self.amplitude * np.sin(self.frequency * t)
        if self.kind == "constant":
            return np.full_like(t, self.amplitude)
        tab_t = self.table.times()
        if t.min() < tab_t[0] - 1e-12 or t.max() > tab_t[-1] + 1e-12:
            raise DomainError("tabulated excitation does not cover the horizon")
        return np.interp(t, tab_t, self.table.values)


@dataclass(frozen=True)
class ComparisonReport:
    """Side-by-side series / approx (/ FDM) responses with residual metrics
    computed on the mutually valid window."""

    case_id: str
    series: TimeSeries
    approx: TimeSeries
    fdm: TimeSeries | None
    residual_max: float
    residual_rel: float
    valid_until: float


def _kernel_values(
    p: OscillatorParams, kernel, grid: TimeGrid, allow_partial: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Kernel samples and validity mask on the grid."""
    if isinstance(kernel, str):
        if kernel == "series":
            ts = ml_series.impulse_series_grid(p, grid)
            if not ts.valid.all():
                vu = ts.valid_until()
                if not allow_partial:
                    raise KernelInvalidError(
                        f"series kernel valid only until t = {vu:.4g} s "
                        f"(horizon {grid.t_end:.4g} s)",
                        valid_until=vu,
                    )
            return ts.values, ts.valid
        if kernel == "approx":
            vals = approx.impulse_approx_grid(p, grid.times())
            return vals, np.ones(grid.n, dtype=bool)
        raise DomainError(f"unknown kernel {kernel!r}")
    if isinstance(kernel, TimeSeries):
        if kernel.grid != grid:
            raise DomainError("tabulated kernel must share the solve grid")
        return kernel.values, kernel.valid
    raise DomainError("kernel must be 'series', 'approx', or a TimeSeries")


def convolve(
    p: OscillatorParams,
    h: Excitation,
    kernel,
    grid: TimeGrid,
    allow_partial: bool = False,
) -> TimeSeries:
    """Trapezoidal convolution of the excitation with the impulse kernel.

    kernel is "series", "approx", or a TimeSeries tabulated on the same grid.
    With allow_partial=True a series kernel that loses validity mid-horizon
    yields a masked result instead of raising KernelInvalidError.
    """
    if grid.t0 != 0.0:
        raise DomainError("convolution requires t0 = 0")
    t = grid.times()
    k_vals, k_valid = _kernel_values(p, kernel, grid, allow_partial)
    h_vals = h.sample(t)
    k_safe = np.where(k_valid, k_vals, 0.0)
    full = signal.fftconvolve(h_vals, k_safe)[: grid.n]
    # trapezoid endpoint weights: the kernel end K(0) = 0 drops out, the
    # excitation end keeps half of h(0) K(t_i)
    x = grid.dt * (full - 0.5 * (h_vals * k_safe[0] + h_vals[0] * k_safe))
    x[0] = 0.0
    # x(t_i) uses kernel samples up to s = t_i, so validity is cumulative
    valid = np.cumprod(k_valid).astype(bool)
    return TimeSeries(grid=grid, values=x, unit="m", valid=valid)


def residual_series_minus_approx(p: OscillatorParams, grid: TimeGrid) -> TimeSeries:
    """Pointwise series minus closed-form impulse response, masked where the
    series evaluation is invalid."""
    ser = ml_series.impulse_series_grid(p, grid)
    app = approx.impulse_approx_grid(p, grid.times())
    res = np.where(ser.valid, ser.values - app, np.nan)
    return TimeSeries(grid=grid, values=res, unit="s", valid=ser.valid.copy())


def _residual_metrics(
    reference: TimeSeries, other: TimeSeries
) -> tuple[float, float]:
    both = reference.valid & other.valid
    if not both.any():
        return math.nan, math.nan
    res = np.abs(reference.values[both] - other.values[both])
    rmax = float(res.max())
    ref_max = float(np.abs(reference.values[both]).max())
    return rmax, rmax / ref_max if ref_max > 0 else math.inf


def run_case(case_id: str, t_end: float | None = None, n: int | None = None) -> ComparisonReport:
    """Run one canned comparison.

    Cases "1".."4" compare the stable-series and closed-form impulse
    responses (default horizon 20/omega_n, 2001 samples). Case "yuan" runs
    the forced response 30 cos(6t) with series-kernel and approx-kernel
    convolutions plus the finite-difference solution (default horizon 40 s
    at dt = 0.005).
    """
    if case_id == "yuan":
        p = YUAN_PARAMS
        if t_end is None:
            t_end = 40.0
        if n is None:
            n = int(round(t_end / 0.005)) + 1
        grid = linspace_grid(t_end, n)
        h = Excitation(kind="cosine", amplitude=YUAN_AMPLITUDE, frequency=YUAN_FREQUENCY)
        return run_scenario(p, h, grid, case_id=case_id)
    if case_id not in CASES:
        raise DomainError(f"unknown case {case_id!r} (expected 1..4 or yuan)")
    wn, z, b = CASES[case_id]
    p = OscillatorParams(omega_n=wn, zeta=z, beta=b)
    if t_end is None:
        t_end = 20.0 / wn
    if n is None:
        n = 2001
    grid = linspace_grid(t_end, n)
    ser = ml_series.impulse_series_grid(p, grid)
    app = TimeSeries(
        grid=grid, values=approx.impulse_approx_grid(p, grid.times()), unit="s"
    )
    rmax, rrel = _residual_metrics(ser, app)
    return ComparisonReport(
        case_id=case_id,
        series=ser,
        approx=app,
        fdm=None,
        residual_max=rmax,
        residual_rel=rrel,
        valid_until=ser.valid_until(),
    )


def run_scenario(
    p: OscillatorParams, h: Excitation, grid: TimeGrid, case_id: str = "scenario"
) -> ComparisonReport:
    """Forced-response comparison for an arbitrary excitation: series-kernel
    convolution (masked past the kernel's valid window), approx-kernel
    convolution, and the finite-difference solution."""
    ser = convolve(p, h, "series", grid, allow_partial=True)
    app = convolve(p, h, "approx", grid)
    fd = fdm.fdm_solve(p, h.sample, grid)
    rmax, rrel = _residual_metrics(ser, app)
    return ComparisonReport(
        case_id=case_id,
        series=ser,
        approx=app,
        fdm=fd,
        residual_max=rmax,
        residual_rel=rrel,
        valid_until=ser.valid_until(),
    )


def parse_scenario(path: str | Path) -> tuple[OscillatorParams, Excitation, TimeGrid]:
    """Read a plain-text key=value scenario file.

    Keys: omega_n, zeta, beta, t_end, n, excitation.kind,
    excitation.amplitude, excitation.frequency. Blank lines and lines
    starting with # are ignored.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"scenario file not found: {path}")
    raw: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        raw[key.strip()] = value.strip()
    required = {"omega_n", "zeta", "beta", "t_end", "n", "excitation.kind"}
    missing = required - raw.keys()
    if missing:
        raise DomainError(f"{path}: missing keys: {sorted(missing)}")
    try:
        p = OscillatorParams(
            omega_n=float(raw["omega_n"]),
            zeta=float(raw["zeta"]),
            beta=float(raw["beta"]),
        )
        grid = linspace_grid(float(raw["t_end"]), int(raw["n"]))
        h = Excitation(
            kind=raw["excitation.kind"],
            amplitude=float(raw.get("excitation.amplitude", 0.0)),
            frequency=float(raw.get("excitation.frequency", 0.0)),
        )
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from exc
    return p, h, grid
