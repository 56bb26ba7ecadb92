from __future__ import annotations

import numpy as np
import pytest
from scipy import integrate

from jcsim.correlators import (
    CorrelatorSeries,
    SpectrumSeries,
    anomalous_corr,
    first_order_corr,
    g2,
    h_theta_unconditional,
    quadrature_correlation,
    squeezing_spectrum,
    transmission_spectrum,
    waiting_time,
    waiting_time_cdf,
    waiting_time_moments,
)
from jcsim.errors import VanishingIntensity
from jcsim.hilbert import SystemParams, expectation, jc_operators
from jcsim.liouvillian import build_liouvillian, no_emission_liouvillian, propagate_series, steady_state_of


def test_series_validation():
    with pytest.raises(ValueError):
        CorrelatorSeries([0.0, 0.0], [1.0, 1.0], "x")
    with pytest.raises(ValueError):
        SpectrumSeries([0.0, 1.0], [1.0], "x")


def test_g2_matches_stepwise_propagation(small_params):
    p = small_params
    ops = jc_operators(p.trunc)
    rho = steady_state_of(p)
    n = expectation(ops.n, rho).real
    tau = np.linspace(0, 2, 41)
    ref = propagate_series(build_liouvillian(p), ops.a @ rho @ ops.ad, tau)
    ref = np.einsum("ij,tji->t", ops.n, ref).real / n**2
    got = g2(p, tau).values.real
    assert np.max(np.abs(got - ref)) < 1e-9
    assert g2(p, [60.0]).values.real[0] == pytest.approx(1.0, abs=1e-9)


def test_waiting_time_normalised_and_cdf(small_params):
    p = small_params
    tau = np.linspace(0, 6, 6001)
    w = waiting_time(p, tau).values.real
    mom = waiting_time_moments(p)
    assert mom["total"] == pytest.approx(1.0, abs=1e-9)
    assert mom["mean"] > 0
    cdf = waiting_time_cdf(p, tau)
    num = integrate.cumulative_trapezoid(w, tau, initial=0.0)
    assert np.max(np.abs(cdf - num)) < 1e-5
    assert np.all(w >= -1e-12)


def test_waiting_time_stepwise_oracle(small_params):
    p = small_params
    ops = jc_operators(p.trunc)
    rho = steady_state_of(p)
    n = expectation(ops.n, rho).real
    tau = np.linspace(0, 1, 11)
    ref = propagate_series(no_emission_liouvillian(p), ops.a @ rho @ ops.ad / n, tau)
    ref = 2 * p.kappa * np.einsum("ij,tji->t", ops.n, ref).real
    assert np.max(np.abs(waiting_time(p, tau).values.real - ref)) < 1e-9


def test_zero_delay_values(small_params):
    p = small_params
    ops = jc_operators(p.trunc)
    rho = steady_state_of(p)
    assert first_order_corr(p, [0.0]).values[0] == pytest.approx(expectation(ops.n, rho), abs=1e-10)
    assert anomalous_corr(p, [0.0]).values[0] == pytest.approx(expectation(ops.a @ ops.a, rho), abs=1e-10)
    alpha = expectation(ops.a, rho)
    long = first_order_corr(p, [80.0]).values[0]
    assert long == pytest.approx(abs(alpha) ** 2, abs=1e-9)


def test_squeezing_modal_equals_quadrature(small_params):
    omega = np.linspace(-60, 60, 61)
    a = squeezing_spectrum(small_params, np.pi / 4, omega).values
    b = squeezing_spectrum(small_params, np.pi / 4, omega, method="quadrature").values
    assert np.max(np.abs(a - b)) < 2e-4 * max(1.0, np.max(np.abs(a)))


def test_squeezing_integral_is_zero_delay_correlation(small_params):
    # int S dw / (2 pi) = 4 kappa R(0) / 2 for a real even transform
    omega = np.linspace(-4000, 4000, 400001)
    s = squeezing_spectrum(small_params, 0.3, omega).values
    r0 = quadrature_correlation(small_params, 0.3, [0.0]).values.real[0]
    assert np.trapezoid(s, omega) / (2 * np.pi) == pytest.approx(2 * small_params.kappa * r0, rel=2e-3, abs=1e-7)


def test_squeezing_frames_are_shifted(small_params):
    p = small_params
    w = np.linspace(-40, 40, 81)
    lo = squeezing_spectrum(p, 0.0, w, frame="lo").values
    res = squeezing_spectrum(p, 0.0, w + p.delta_omega_d, frame="resonance").values
    assert np.allclose(lo, res)
    with pytest.raises(ValueError):
        squeezing_spectrum(p, 0.0, w, frame="lab")


def test_transmission_area_plus_coherent_fraction(small_params):
    p = small_params
    omega = np.linspace(-3000, 3000, 600001)
    t = transmission_spectrum(p, omega)
    area = np.trapezoid(t.values, omega)
    assert area + t.meta["coherent_fraction"] == pytest.approx(1.0, abs=1e-3)
    assert np.all(t.values > -1e-10)


def test_vanishing_intensity():
    p = SystemParams.from_ratios(10.0, 0.0, 0.0, 0.0, n_max=3)
    with pytest.raises(VanishingIntensity):
        g2(p, [0.0])


def test_h_theta_long_delay_limits(small_params):
    p = small_params
    theta = 0.4
    ops = jc_operators(p.trunc)
    a_ss = expectation(ops.quadrature(theta), steady_state_of(p)).real
    h = h_theta_unconditional(p, theta, [-80.0, 80.0])
    assert np.allclose(h.values.real, a_ss, atol=1e-9)
    assert h.meta["a_theta_ss"] == pytest.approx(a_ss)


def test_h_theta_branches_continuous_at_zero(small_params):
    # both orderings reduce to <a^dag A a>/n at zero delay
    h = h_theta_unconditional(small_params, 0.4, [-1e-9, 0.0]).values.real
    assert h[0] == pytest.approx(h[1], abs=1e-6)


def test_h_theta_bandwidth_filter_is_detector_convolution(small_params):
    p = small_params
    theta, b = 0.4, 10.0
    s = np.linspace(0, 4.0, 40001)
    kern = b * np.exp(-b * s)
    for tau in (-0.3, 0.0, 0.2, 0.7):
        raw = h_theta_unconditional(p, theta, np.sort(tau - s)).values.real[::-1]
        ref = np.trapezoid(kern * raw, s)
        got = h_theta_unconditional(p, theta, [tau], bandwidth=b).values.real[0]
        assert got == pytest.approx(ref, abs=1e-5)
