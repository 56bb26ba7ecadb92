from __future__ import annotations

import numpy as np
import pytest

from jcsim.errors import DegenerateSteadyState, DimensionError
from jcsim.hilbert import SystemParams, basis_state, jc_operators
from jcsim.liouvillian import (
    Superoperator,
    build_hamiltonian,
    build_liouvillian,
    cavity_jump_superoperator,
    modal_decomposition,
    no_emission_liouvillian,
    propagate,
    propagate_series,
    spost,
    spre,
    steady_state,
    steady_state_of,
    unvec,
    vec,
)

from conftest import random_density


def test_vec_conventions():
    rng = np.random.default_rng(0)
    x, y, r = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(3))
    assert np.allclose(unvec(vec(r), 3), r)
    assert np.allclose(spre(x) @ vec(r), vec(x @ r))
    assert np.allclose(spost(y) @ vec(r), vec(r @ y))


def test_hamiltonian_hermitian(small_params):
    h = build_hamiltonian(small_params)
    assert np.allclose(h, h.conj().T)


def test_generator_is_trace_preserving(small_params):
    L = build_liouvillian(small_params)
    assert L.trace_defect() < 1e-12
    # the jump part carries exactly the trace lost under no-emission evolution
    lhs = (no_emission_liouvillian(small_params) + cavity_jump_superoperator(small_params)).matrix
    assert np.allclose(lhs, L.matrix)


def test_superoperator_shape_check():
    with pytest.raises(DimensionError):
        Superoperator(np.zeros((4, 4), dtype=complex), 3)


def test_steady_state_residual(small_params):
    L = build_liouvillian(small_params)
    rho = steady_state_of(small_params)
    assert np.max(np.abs(L.apply(rho))) < 1e-10
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(rho, rho.conj().T)
    assert np.linalg.eigvalsh(rho).min() > -1e-10


def test_undamped_generator_is_degenerate():
    p = SystemParams.from_ratios(5.0, 0.0, 0.0, 0.0, n_max=3)
    h = build_hamiltonian(p)
    L = Superoperator(-1j * (spre(h) - spost(h)), p.dim)
    with pytest.raises(DegenerateSteadyState):
        steady_state(L)


def _rk4_oracle(m, v, t, n):
    h = t / n
    for _ in range(n):
        k1 = m @ v
        k2 = m @ (v + 0.5 * h * k1)
        k3 = m @ (v + 0.5 * h * k2)
        k4 = m @ (v + h * k3)
        v = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def test_propagate_matches_independent_rk4(small_params):
    L = build_liouvillian(small_params)
    rho0 = np.outer(basis_state(small_params.trunc, 1, "-"), basis_state(small_params.trunc, 1, "-").conj())
    t = 0.3
    ref = unvec(_rk4_oracle(L.matrix, vec(rho0), t, 6000), L.dim)
    assert np.max(np.abs(propagate(L, rho0, t) - ref)) < 1e-9


def test_propagate_rk_agrees_with_expm(small_params):
    L = build_liouvillian(small_params)
    rho0 = random_density(small_params.dim, np.random.default_rng(3))
    a = propagate(L, rho0, 0.5, method="expm")
    b = propagate(L, rho0, 0.5, method="rk")
    assert np.max(np.abs(a - b)) < 1e-8
    with pytest.raises(ValueError):
        propagate(L, rho0, -1.0)
    with pytest.raises(ValueError):
        propagate(L, rho0, 1.0, method="euler")


def test_long_time_propagation_reaches_steady_state(small_params):
    L = build_liouvillian(small_params)
    rho0 = random_density(small_params.dim, np.random.default_rng(4))
    series = propagate_series(L, rho0, np.array([0.0, 10.0, 40.0]))
    assert np.allclose(series[0], rho0)
    assert np.max(np.abs(series[-1] - steady_state_of(small_params))) < 1e-9
    assert np.allclose(np.trace(series, axis1=1, axis2=2), 1.0)


def test_modal_decomposition_reconstructs_generator(small_params):
    L = build_liouvillian(small_params)
    dec = modal_decomposition(L)
    recon = dec.right @ np.diag(dec.eigvals) @ dec.left
    assert np.max(np.abs(recon - L.matrix)) < 1e-8 * np.max(np.abs(L.matrix))
    assert abs(dec.eigvals[dec.zero_mode]) < 1e-9
    assert np.all(np.delete(dec.eigvals, dec.zero_mode).real < 0)


def test_pure_cavity_decay_rate():
    # With g -> small and no drive, <n> decays at 2 kappa.
    p = SystemParams.from_ratios(1e-6, 0.0, 0.0, 0.0, n_max=4)
    ops = jc_operators(p.trunc)
    psi = basis_state(p.trunc, 3, "-")
    rho = propagate(build_liouvillian(p), np.outer(psi, psi.conj()), 0.7)
    assert np.trace(ops.n @ rho).real == pytest.approx(3 * np.exp(-1.4), rel=1e-8)
