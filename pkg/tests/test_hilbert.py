from __future__ import annotations

import numpy as np
import pytest

from jcsim.errors import DimensionError
from jcsim.hilbert import (
    FockTruncation,
    SystemParams,
    annihilation,
    atom_block,
    basis_state,
    check_density,
    coherent_state,
    expectation,
    jc_operators,
    parse_state_spec,
    partial_trace_atom,
    sigma_minus,
    tensor,
)

from conftest import random_density


def test_truncation_dimensions():
    t = FockTruncation(5)
    assert t.cavity_dim == 6 and t.dim == 12
    with pytest.raises(ValueError):
        FockTruncation(0)


def test_annihilation_commutator_away_from_cutoff():
    a = annihilation(6)
    comm = a @ a.conj().T - a.conj().T @ a
    assert np.allclose(np.diag(comm)[:-1], 1.0)


def test_sigma_minus_lowers():
    sm = sigma_minus()
    plus = np.array([0, 1], dtype=complex)
    assert np.allclose(sm @ plus, [1, 0])
    assert np.allclose(sm @ sm, 0)


def test_tensor_rejects_bad_shapes_and_limits():
    with pytest.raises(DimensionError):
        tensor(np.zeros((2, 3)), np.eye(2))
    with pytest.raises(DimensionError):
        tensor(np.eye(10), np.eye(10), max_dim=50)


def test_composite_operators_commute_across_factors():
    ops = jc_operators(5)
    assert np.allclose(ops.a @ ops.sm, ops.sm @ ops.a)
    assert ops.dim == 12
    with pytest.raises(ValueError):
        ops.a[0, 0] = 1.0


def test_basis_ordering_and_parsing():
    trunc = FockTruncation(4)
    psi = parse_state_spec("3,+", trunc)
    assert psi[2 * 3 + 1] == 1.0
    ops = jc_operators(trunc)
    assert expectation(ops.n, psi).real == pytest.approx(3.0)
    assert expectation(ops.sp_sm, psi).real == pytest.approx(1.0)
    assert np.allclose(parse_state_spec("0,-", trunc), basis_state(trunc, 0, "-"))
    for bad in ("3", "x,-", "2,?", "9,-"):
        with pytest.raises(ValueError):
            parse_state_spec(bad, trunc)


def test_expectation_dimension_checks():
    ops = jc_operators(3)
    with pytest.raises(DimensionError):
        expectation(ops.n, np.ones(5))
    with pytest.raises(DimensionError):
        expectation(ops.n, np.eye(5))


def test_partial_trace_of_product_state():
    rng = np.random.default_rng(1)
    cav = random_density(4, rng)
    atom = random_density(2, rng)
    rho = np.kron(cav, atom)
    assert np.allclose(partial_trace_atom(rho), cav)
    assert np.allclose(atom_block(rho, 1), cav * atom[1, 1])


def test_coherent_state_mean_field():
    psi = coherent_state(20, 0.8 + 0.3j)
    ops = jc_operators(20)
    assert expectation(ops.a, psi) == pytest.approx(0.8 + 0.3j, abs=1e-10)


def test_check_density():
    rng = np.random.default_rng(2)
    rho = random_density(6, rng)
    check_density(rho)
    with pytest.raises(ValueError):
        check_density(2 * rho)
    with pytest.raises(ValueError):
        check_density(np.diag([1.5, -0.5]).astype(complex))


def test_params_validation_and_ratios():
    p = SystemParams.from_ratios(200, 0.03, -0.7114, 2.0, n_max=10)
    assert p.g == 200 and p.eps_d == pytest.approx(6.0) and p.delta_omega_d == pytest.approx(-142.28)
    assert p.eps_over_g == pytest.approx(0.03) and p.dim == 22
    for bad in ({"g": -1.0}, {"g": 1.0, "gamma": -1.0}, {"g": float("nan")}):
        with pytest.raises(ValueError):
            SystemParams(**bad)
    assert p.as_dict()["units"] == "kappa"
