"""Closed-form impulse approximation and frequency-response functions."""
from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from fracosc.approx import (
    frf_approx,
    frf_curve,
    frf_exact,
    impulse_approx,
    impulse_approx_grid,
)
from fracosc.core import OscillatorParams
from fracosc.equiv import omega_d_eq, zeta_eq
from fracosc.ml_series import impulse_beta0, impulse_beta1
from fracosc.specfun import DomainError


class TestImpulseApprox:
    def test_beta0_coincides_with_closed_form(self):
        p = OscillatorParams(2.0, 0.1, 0.0)
        for t in [0.0, 0.7, 3.1, 9.4]:
            assert impulse_approx(p, t) == pytest.approx(
                impulse_beta0(p, t), rel=1e-12, abs=1e-15
            )

    def test_beta1_coincides_with_closed_form(self):
        p = OscillatorParams(2.0, 0.1, 1.0)
        for t in [0.0, 0.7, 3.1, 9.4]:
            assert impulse_approx(p, t) == pytest.approx(
                impulse_beta1(p, t), rel=1e-12, abs=1e-15
            )

    def test_chained_closed_form_value(self):
        p = OscillatorParams(5.0, 0.05, 0.5)
        wd = omega_d_eq(p)
        expected = math.exp(-5.0 * zeta_eq(p)) * math.sin(wd) / wd
        assert impulse_approx(p, 1.0) == pytest.approx(expected, rel=1e-14)

    def test_envelope_bound(self):
        p = OscillatorParams(3.0, 0.08, 0.6)
        t = np.linspace(0.0, 20.0, 2000)
        vals = impulse_approx_grid(p, t)
        env = np.exp(-zeta_eq(p) * p.omega_n * t) / omega_d_eq(p)
        assert np.all(np.abs(vals) <= env + 1e-15)

    def test_negative_time_rejected(self):
        with pytest.raises(DomainError):
            impulse_approx(OscillatorParams(1.0, 0.05, 0.5), -0.1)


class TestFrfExact:
    def test_static_value_discontinuous_in_beta(self):
        assert frf_exact(OscillatorParams(1.0, 0.3, 0.56), 0.0) == 1.0
        assert frf_exact(OscillatorParams(1.0, 0.15, 0.0), 0.0) == pytest.approx(
            1.0 / 1.3, rel=1e-14
        )

    def test_classical_resonance_magnitude(self):
        h = frf_exact(OscillatorParams(1.0, 0.05, 1.0), 1.0)
        assert abs(h) == pytest.approx(10.0, rel=1e-12)

    def test_undamped_pole_flagged(self):
        h = frf_exact(OscillatorParams(1.0, 0.0, 0.5), 1.0)
        assert not math.isfinite(abs(h))

    def test_beta0_pole_flagged(self):
        h = frf_exact(OscillatorParams(1.0, 0.15, 0.0), math.sqrt(1.3))
        assert not math.isfinite(abs(h))


class TestFrfApprox:
    def test_beta1_equals_exact_everywhere(self):
        p = OscillatorParams(1.0, 0.05, 1.0)
        for g in np.linspace(0.0, 3.0, 61):
            e = frf_exact(p, float(g))
            a = frf_approx(p, float(g))
            assert abs(e - a) <= 1e-10

    def test_static_gap_against_exact(self):
        # the approximate FRF intentionally differs from 1 at g=0
        p = OscillatorParams(1.0, 0.1214, 0.56)
        expected = 1.0 / ((omega_d_eq(p) / p.omega_n) ** 2 + zeta_eq(p) ** 2)
        a = frf_approx(p, 0.0)
        assert a.real == pytest.approx(expected, rel=1e-12)
        assert a != frf_exact(p, 0.0)

    def test_g0_beta1_unity(self):
        assert frf_approx(OscillatorParams(1.0, 0.05, 1.0), 0.0) == pytest.approx(
            1.0 + 0.0j, rel=1e-12
        )

    @pytest.mark.parametrize("g", [0.5, 1.0, 2.0])
    def test_fourier_transform_of_impulse_approx(self, g):
        # numerically integrating the impulse approximation against e^(-i w t)
        # must reproduce the approximate FRF (times omega_n^2)
        p = OscillatorParams(2.0, 0.08, 0.6)
        decay = zeta_eq(p) * p.omega_n
        t_end = 10.0 / decay
        t = np.linspace(0.0, t_end, 200_001)
        kernel = impulse_approx_grid(p, t)
        w = g * p.omega_n
        integrand = kernel * np.exp(-1j * w * t)
        h = np.trapezoid(integrand, t) * p.omega_n ** 2
        expected = frf_approx(p, g)
        assert abs(h - expected) / abs(expected) < 1e-3


class TestFrfCurve:
    def test_classical_resonance_peak(self):
        p = OscillatorParams(1.0, 0.05, 1.0)
        c = frf_curve(p, "exact", 3.0, 6001)
        i = int(np.nanargmax(c.mag))
        zeta = 0.05
        assert c.g[i] == pytest.approx(math.sqrt(1 - 2 * zeta ** 2), abs=1e-3)
        peak_expected = 1.0 / (2 * zeta * math.sqrt(1 - zeta ** 2))
        assert c.mag[i] == pytest.approx(peak_expected, rel=1e-4)

    def test_pole_masked_on_grid(self):
        p = OscillatorParams(1.0, 0.15, 0.0)
        c = frf_curve(p, "exact", 2.0 * math.sqrt(1.3), 3)
        assert c.masked[1]
        assert np.isnan(c.mag[1])
        assert not c.masked[0] and not c.masked[2]

    def test_resonance_location_bracket(self):
        for beta in [0.2, 0.5, 0.8]:
            p = OscillatorParams(1.0, 0.1, beta)
            c = frf_curve(p, "approx", 2.0, 4001)
            g_peak = c.g[int(np.nanargmax(c.mag))]
            lo = math.sqrt(1 - 0.1 ** 2) * 0.98
            hi = math.sqrt(1.2) * 1.02
            assert lo <= g_peak <= hi

    def test_benchmark_cases_magnitude_gap(self):
        cases = [(1.0, 0.01, 0.1), (10.0, 0.15, 0.9), (1.0, 0.15, 0.5), (5.0, 0.05, 0.5)]
        for wn, zeta, beta in cases:
            p = OscillatorParams(wn, zeta, beta)
            ce = frf_curve(p, "exact", 3.0, 601)
            ca = frf_curve(p, "approx", 3.0, 601)
            ok = ~(ce.masked | ca.masked)
            gap = np.max(np.abs(ce.mag[ok] - ca.mag[ok])) / np.max(ce.mag[ok])
            assert gap < 0.15

    def test_bad_args_rejected(self):
        p = OscillatorParams(1.0, 0.05, 0.5)
        with pytest.raises(DomainError):
            frf_curve(p, "other", 3.0, 10)
        with pytest.raises(DomainError):
            frf_curve(p, "exact", -1.0, 10)
        with pytest.raises(DomainError):
            frf_curve(p, "exact", 3.0, 1)
