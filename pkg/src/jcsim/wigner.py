"""Wigner quasiprobability of cavity-field density operators.

Convention ("2/pi"): ``W(alpha) = (2/pi) tr[rho D(alpha) P D(alpha)^dag]`` with
``P`` the photon-number parity, so that ``W`` integrates to one over
``d^2 alpha = dx dp`` (``alpha = x + i p``) and the vacuum has
``W(0) = 2/pi``.  Since ``D(alpha) P D(alpha)^dag = D(2 alpha) P``, the
transform only needs Fock matrix elements of a displacement, which are
evaluated in closed form (generalised Laguerre polynomials) rather than by
exponentiating a truncated ``a``, so no truncation error enters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import DimensionError, TruncationLeak

CONVENTION = "2/pi"
BOUNDARY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """``values[i, j] = W(x_grid[j] + i p_grid[i])``."""

    x_grid: np.ndarray
    p_grid: np.ndarray
    values: np.ndarray
    convention: str = CONVENTION
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (len(self.p_grid), len(self.x_grid)):
            raise DimensionError(
                f"values shape {self.values.shape} != ({len(self.p_grid)}, {len(self.x_grid)})"
            )
        if np.iscomplexobj(self.values):
            raise TypeError("Wigner values must be real")

    @property
    def dx(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])

    @property
    def dp(self) -> float:
        return float(self.p_grid[1] - self.p_grid[0])

    def integral(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.values, self.x_grid, axis=1), self.p_grid))

    def marginal_x(self) -> np.ndarray:
        """``int W dp`` as a function of ``x``."""
        return np.trapezoid(self.values, self.p_grid, axis=0)

    def marginal_p(self) -> np.ndarray:
        return np.trapezoid(self.values, self.x_grid, axis=1)

    def boundary_max(self) -> float:
        v = np.abs(self.values)
        return float(max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max()))

    def negative_volume(self) -> float:
        """Volume of the negative part of ``W`` (zero for classical states)."""
        neg = np.where(self.values < 0, -self.values, 0.0)
        return float(np.trapezoid(np.trapezoid(neg, self.x_grid, axis=1), self.p_grid))


def displacement_element(m: int, n: int, beta: np.ndarray) -> np.ndarray:
    """``<m|D(beta)|n>`` for the untruncated oscillator, elementwise in ``beta``."""
    beta = np.asarray(beta, dtype=complex)
    r2 = np.abs(beta) ** 2
    if m >= n:
        k = m - n
        pref = np.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)))
        return pref * beta**k * np.exp(-0.5 * r2) * eval_genlaguerre(n, k, r2)
    k = n - m
    pref = np.exp(0.5 * (gammaln(m + 1) - gammaln(n + 1)))
    return pref * (-beta.conj()) ** k * np.exp(-0.5 * r2) * eval_genlaguerre(m, k, r2)


def wigner_values(rho_cav: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """``W(alpha)`` at arbitrary complex points (any array shape)."""
    rho = np.asarray(rho_cav, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"cavity density operator must be square, got {rho.shape}")
    beta = 2.0 * np.asarray(alpha, dtype=complex)
    d = rho.shape[0]
    w = np.zeros(beta.shape, dtype=complex)
    # tr[rho D(beta) P] = sum_{m,n} rho_nm (-1)^n <m|D(beta)|n>
    for n in range(d):
        sign = -1.0 if n % 2 else 1.0
        for m in range(d):
            if rho[n, m] != 0:
                w += sign * rho[n, m] * displacement_element(m, n, beta)
    return (2.0 / np.pi) * w.real


def wigner_transform(
    rho_cav: np.ndarray,
    extent: float | None = None,
    n_points: int = 121,
    max_extent: float = 12.0,
    tol: float = BOUNDARY_TOL,
    auto_extend: bool = True,
) -> WignerGrid:
    """Wigner function of a cavity state on a square grid ``[-L, L]^2``.

    The half-width ``L`` starts at ``extent`` (default from the mean photon
    number) and grows by 25% until ``|W| < tol`` on the boundary; if that
    never happens below ``max_extent``, :class:`TruncationLeak` is raised.
    Non-normalised inputs (e.g. projected atom blocks) are rescaled to unit
    trace, with the original trace stored in ``meta["weight"]``.
    """
    rho = np.asarray(rho_cav, dtype=complex)
    weight = float(np.trace(rho).real)
    if weight <= 0:
        raise ValueError("cavity state has non-positive trace")
    rho = rho / weight
    d = rho.shape[0]
    if extent is None:
        nbar = float(np.real(np.trace(rho @ np.diag(np.arange(d)))))
        extent = max(2.5, np.sqrt(nbar) + 2.5)
    half = float(extent)
    while True:
        x = np.linspace(-half, half, n_points)
        xx, pp = np.meshgrid(x, x)
        vals = wigner_values(rho, xx + 1j * pp)
        grid = WignerGrid(x, x.copy(), vals, CONVENTION, {"extent": half, "weight": weight, "dim": d})
        if grid.boundary_max() < tol:
            return grid
        if not auto_extend:
            raise TruncationLeak(f"|W| = {grid.boundary_max():.2e} on the boundary of [-{half}, {half}]^2")
        if half >= max_extent:
            raise TruncationLeak(
                f"|W| = {grid.boundary_max():.2e} on the boundary at maximum extent {max_extent}"
            )
        half = min(1.25 * half, max_extent)


def hermite_functions(n_max: int, x: np.ndarray) -> np.ndarray:
    """Eigenfunctions of ``X = (a + a^dag)/2`` in the Fock basis, shape (n_max+1, len(x)).

    ``psi_n(x) = (2/pi)^{1/4} H_n(sqrt2 x) exp(-x^2) / sqrt(2^n n!)`` built by
    the stable three-term recurrence.
    """
    x = np.asarray(x, dtype=float)
    y = np.sqrt(2.0) * x
    out = np.empty((n_max + 1, x.size))
    out[0] = (2.0 / np.pi) ** 0.25 * np.exp(-x * x)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * y * out[0]
    for n in range(2, n_max + 1):
        out[n] = np.sqrt(2.0 / n) * y * out[n - 1] - np.sqrt((n - 1) / n) * out[n - 2]
    return out


def quadrature_distribution(rho_cav: np.ndarray, x: np.ndarray, theta: float = 0.0) -> np.ndarray:
    """Probability density of ``(a e^{-i theta} + a^dag e^{i theta})/2`` at ``x``."""
    rho = np.asarray(rho_cav, dtype=complex)
    d = rho.shape[0]
    rot = np.exp(-1j * theta * np.arange(d))
    rho = rot[:, None] * rho * rot.conj()[None, :]
    psi = hermite_functions(d - 1, x)
    return np.einsum("mx,mn,nx->x", psi, rho, psi).real


def rotate_state(rho_cav: np.ndarray, phi: float) -> np.ndarray:
    """``e^{i phi a^dag a} rho e^{-i phi a^dag a}``; the new ``W(alpha)`` equals the old ``W(alpha e^{-i phi})``."""
    d = rho_cav.shape[0]
    u = np.exp(1j * phi * np.arange(d))
    return u[:, None] * rho_cav * u.conj()[None, :]


__all__ = [
    "WignerGrid",
    "CONVENTION",
    "displacement_element",
    "wigner_values",
    "wigner_transform",
    "hermite_functions",
    "quadrature_distribution",
    "rotate_state",
]
