from __future__ import annotations

import numpy as np
import pytest

from jcsim.hilbert import SystemParams


@pytest.fixture
def small_params() -> SystemParams:
    """Weakly driven, detuned point with a small truncation (fast)."""
    return SystemParams.from_ratios(20.0, 0.05, -0.7, 0.5, n_max=6)


@pytest.fixture
def blockade_params() -> SystemParams:
    """Two-photon operating point used by the squeezing and trigger tests."""
    return SystemParams.from_ratios(200.0, 0.03, -0.7114, 0.0, n_max=8)


def random_density(d: int, rng: np.random.Generator) -> np.ndarray:
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real
