from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg as sla

from jcsim.errors import DimensionError, TruncationLeak
from jcsim.hilbert import annihilation, coherent_cavity, jc_operators, partial_trace_atom
from jcsim.liouvillian import steady_state_of
from jcsim.wigner import (
    displacement_element,
    quadrature_distribution,
    rotate_state,
    wigner_transform,
    wigner_values,
)


def _fock(n, d=8):
    rho = np.zeros((d, d), dtype=complex)
    rho[n, n] = 1.0
    return rho


def test_vacuum_and_fock_values():
    assert wigner_values(_fock(0), 0.0) == pytest.approx(2 / np.pi)
    assert wigner_values(_fock(1), 0.0) == pytest.approx(-2 / np.pi)
    # vacuum is a Gaussian exp(-2|alpha|^2)
    a = np.array([0.3 + 0.4j, 1.0])
    assert np.allclose(wigner_values(_fock(0), a), 2 / np.pi * np.exp(-2 * np.abs(a) ** 2))


def test_coherent_state_is_displaced_gaussian():
    alpha0 = 1.0 + 0.5j
    c = coherent_cavity(alpha0, 30)
    rho = np.outer(c, c.conj())
    pts = np.array([alpha0, alpha0 + 0.2, 0.0])
    ref = 2 / np.pi * np.exp(-2 * np.abs(pts - alpha0) ** 2)
    assert np.allclose(wigner_values(rho, pts), ref, atol=1e-10)


@pytest.mark.parametrize("state", ["vacuum", "fock2", "cat"])
def test_normalisation_and_marginals(state):
    d = 20
    if state == "vacuum":
        rho = _fock(0, d)
    elif state == "fock2":
        rho = _fock(2, d)
    else:
        c = coherent_cavity(1.5, d - 1) + coherent_cavity(-1.5, d - 1)
        c /= np.linalg.norm(c)
        rho = np.outer(c, c.conj())
    g = wigner_transform(rho, n_points=161)
    assert g.boundary_max() < 1e-6
    assert g.integral() == pytest.approx(1.0, abs=1e-3)
    assert np.allclose(g.marginal_x(), quadrature_distribution(rho, g.x_grid, 0.0), atol=1e-3)
    assert np.allclose(g.marginal_p(), quadrature_distribution(rho, g.p_grid, np.pi / 2), atol=1e-3)
    if state == "vacuum":
        assert g.negative_volume() == pytest.approx(0.0, abs=1e-12)
    else:
        assert g.negative_volume() > 1e-3


def test_rotation_covariance():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    phi = 0.7
    pts = rng.normal(size=10) + 1j * rng.normal(size=10)
    assert np.allclose(wigner_values(rotate_state(rho, phi), pts), wigner_values(rho, pts * np.exp(-1j * phi)))


def test_truncation_leak_is_reported():
    c = coherent_cavity(4.0, 40)
    rho = np.outer(c, c.conj())
    with pytest.raises(TruncationLeak):
        wigner_transform(rho, extent=2.0, max_extent=3.0)
    with pytest.raises(TruncationLeak):
        wigner_transform(rho, extent=2.0, auto_extend=False)
    g = wigner_transform(rho, extent=2.0, n_points=81)
    assert g.meta["extent"] > 4.0


def test_displacement_elements_match_large_truncation():
    d = 60
    a = annihilation(d - 1)
    beta = 0.8 - 0.6j
    big = sla.expm(beta * a.conj().T - np.conj(beta) * a)
    for m in range(6):
        for n in range(6):
            assert displacement_element(m, n, beta) == pytest.approx(big[m, n], abs=1e-12)


def test_projected_weight_and_input_checks():
    rho = 0.25 * _fock(0)
    g = wigner_transform(rho, n_points=61)
    assert g.meta["weight"] == pytest.approx(0.25)
    assert g.integral() == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(DimensionError):
        wigner_values(np.zeros((2, 3)), 0.0)
    with pytest.raises(ValueError):
        wigner_transform(np.zeros((3, 3)))


def test_steady_state_wigner_field_mean(blockade_params):
    rho = partial_trace_atom(steady_state_of(blockade_params))
    g = wigner_transform(rho, n_points=121)
    xx, pp = np.meshgrid(g.x_grid, g.p_grid)
    w = g.values
    mean = np.trapezoid(np.trapezoid(w * (xx + 1j * pp), g.x_grid, axis=1), g.p_grid)
    a = jc_operators(blockade_params.trunc).a
    ref = np.trace(steady_state_of(blockade_params) @ a)
    assert mean == pytest.approx(ref, abs=1e-4)
