"""Fractionally damped oscillator: series, closed-form, finite-difference and
frequency-domain response computations."""

from .core import (
    OscillatorParams,
    ParameterError,
    TimeGrid,
    TimeSeries,
    linspace_grid,
    validate_params,
)
from .ml_series import (
    SeriesEval,
    biv_mittag_leffler,
    blow_up_time,
    impulse_beta0,
    impulse_beta1,
    impulse_series,
    impulse_series_grid,
)

__all__ = [
    "OscillatorParams",
    "ParameterError",
    "TimeGrid",
    "TimeSeries",
    "linspace_grid",
    "validate_params",
    "SeriesEval",
    "biv_mittag_leffler",
    "blow_up_time",
    "impulse_beta0",
    "impulse_beta1",
    "impulse_series",
    "impulse_series_grid",
]

__version__ = "0.1.0"
