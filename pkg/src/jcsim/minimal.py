"""Four-state secular model of the two-photon JC resonance.

States are ordered ``(xi_0, xi_1, xi_2, xi_3)``: the ground state, the lower
and upper members of the one-photon doublet, and the lower member of the
two-photon doublet.  All energies are kept relative to the bare resonance
(``E_k - k omega_0``) and the model is solved in the frame of the drive.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .correlators import CorrelatorSeries, SpectrumSeries
from .hilbert import SystemParams
from .liouvillian import dissipator, spost, spre, unvec, vec

SQ2 = np.sqrt(2.0)
# Dressed matrix elements of ``a``: <xi_0|a|xi_1>, <xi_0|a|xi_2>, <xi_1|a|xi_3>, <xi_2|a|xi_3>
A01 = 1.0 / SQ2
A02 = 1.0 / SQ2
A13 = (SQ2 + 1.0) / 2.0
A23 = (SQ2 - 1.0) / 2.0
# Coefficients of the drive-induced shifts of the one-photon doublet, in eps^2/g
SHIFT1 = -(20.0 + 19.0 * SQ2) / 7.0
SHIFT2 = (20.0 - 19.0 * SQ2) / 7.0
PHOTONS = np.array([0, 1, 1, 2])


def resonant_detuning(g: float, eps_d: float) -> float:
    """Drive detuning that puts two drive photons on the ``xi_0 -> xi_3`` transition."""
    return -g / SQ2 - SQ2 * eps_d**2 / g


def dressed_annihilation() -> np.ndarray:
    a = np.zeros((4, 4), dtype=complex)
    a[0, 1], a[0, 2], a[1, 3], a[2, 3] = A01, A02, A13, A23
    return a


@dataclass(frozen=True)
class MinimalModelParams:
    """Derived rates, frequencies and energies of the four-state model (units of kappa)."""

    Omega: float
    Gamma31: float
    Gamma32: float
    Gamma: float
    nu: float
    E_tilde: tuple
    delta_shifts: tuple
    delta_omega_d: float
    kappa: float = 1.0
    gamma: float = 0.0
    g: float = 0.0
    eps_d: float = 0.0

    @property
    def Gamma3(self) -> float:
        return self.Gamma31 + self.Gamma32

    @property
    def resonant_detuning(self) -> float:
        return resonant_detuning(self.g, self.eps_d)

    @property
    def frame_energies(self) -> np.ndarray:
        """Energies in the drive frame, ``E_k - k omega_0 - k delta_omega_d``."""
        return np.asarray(self.E_tilde) - PHOTONS * self.delta_omega_d

    @property
    def two_photon_detuning(self) -> float:
        e = self.frame_energies
        return float(e[3] - e[0])

    def transition_frequencies(self) -> dict:
        """Emission frequencies ``(E_i - E_j) - omega_0`` of the four cascade transitions."""
        e = np.asarray(self.E_tilde)
        return {"32": e[3] - e[2], "10": e[1] - e[0], "31": e[3] - e[1], "20": e[2] - e[0]}

    def as_dict(self) -> dict:
        return {
            "Omega": self.Omega, "Gamma31": self.Gamma31, "Gamma32": self.Gamma32,
            "Gamma": self.Gamma, "nu": self.nu, "E_tilde": list(self.E_tilde),
            "delta_shifts": list(self.delta_shifts), "delta_omega_d": self.delta_omega_d,
            "kappa": self.kappa, "gamma": self.gamma, "g": self.g, "eps_d": self.eps_d,
        }


def derive_params(p: SystemParams, intermediate_shifts: bool = True) -> MinimalModelParams:
    """Four-state quantities for the operating point ``p``.

    ``intermediate_shifts`` keeps the O(eps^2/g) drive shifts of the
    one-photon doublet, so that ``nu = 2g + (40/7) eps^2/g``; switching it off
    gives ``nu = 2g`` exactly.
    """
    g, eps, k, gam = p.g, p.eps_d, p.kappa, p.gamma
    if eps / g > 0.1:
        warnings.warn(f"eps_d/g = {eps / g:.3f} > 0.1; the four-state model is a weak-drive expansion")
    x = eps**2 / g
    d1, d2 = (SHIFT1 * x, SHIFT2 * x) if intermediate_shifts else (0.0, 0.0)
    shifts = (SQ2 * x, d1, d2, -SQ2 * x)
    e_tilde = (shifts[0], -g + d1, g + d2, -SQ2 * g + shifts[3])
    return MinimalModelParams(
        Omega=2.0 * SQ2 * x,
        Gamma31=gam / 4.0 + (SQ2 + 1.0) ** 2 * k / 2.0,
        Gamma32=gam / 4.0 + (SQ2 - 1.0) ** 2 * k / 2.0,
        Gamma=gam / 2.0 + k,
        nu=e_tilde[2] - e_tilde[1],
        E_tilde=e_tilde,
        delta_shifts=shifts,
        delta_omega_d=p.delta_omega_d,
        kappa=k,
        gamma=gam,
        g=g,
        eps_d=eps,
    )


def effective_hamiltonian(mm: MinimalModelParams) -> np.ndarray:
    h = np.diag(mm.frame_energies).astype(complex)
    h[0, 3] = h[3, 0] = mm.Omega
    return h


def effective_liouvillian(mm: MinimalModelParams) -> np.ndarray:
    """16x16 generator of the four-state master equation (column stacking)."""
    h = effective_hamiltonian(mm)
    m = -1j * (spre(h) - spost(h))
    for rate, (i, j) in ((mm.Gamma32, (2, 3)), (mm.Gamma31, (1, 3)), (mm.Gamma, (0, 1)), (mm.Gamma, (0, 2))):
        op = np.zeros((4, 4), dtype=complex)
        op[i, j] = 1.0
        m += rate * dissipator(op)
    return m


def effective_propagate(mm: MinimalModelParams, rho0: np.ndarray, t: float) -> np.ndarray:
    """``exp(L t) rho0`` for the four-state master equation."""
    if t < 0:
        raise ValueError("t must be non-negative")
    rho = unvec(sla.expm(effective_liouvillian(mm) * t) @ vec(np.asarray(rho0, dtype=complex)), 4)
    return 0.5 * (rho + rho.conj().T)


@dataclass(frozen=True)
class CascadeSteadyState:
    p0: float
    p1: float
    p2: float
    p3: float
    rho03_ss: complex

    def density(self) -> np.ndarray:
        rho = np.diag([self.p0, self.p1, self.p2, self.p3]).astype(complex)
        rho[0, 3] = self.rho03_ss
        rho[3, 0] = np.conj(self.rho03_ss)
        return rho


def cascade_steady_state(mm: MinimalModelParams) -> CascadeSteadyState:
    """Closed-form steady state, including the two-photon detuning."""
    half = mm.Gamma3 / 2.0
    d2 = mm.two_photon_detuning
    om2 = mm.Omega**2
    if om2 == 0.0:
        return CascadeSteadyState(1.0, 0.0, 0.0, 0.0, 0j)
    r0 = 1.0 + (half**2 + d2**2) / om2
    r1 = mm.Gamma31 / mm.Gamma
    r2 = mm.Gamma32 / mm.Gamma
    p3 = 1.0 / (r0 + r1 + r2 + 1.0)
    p0 = r0 * p3
    rho03 = 1j * mm.Omega * (p0 - p3) / (half - 1j * d2)
    return CascadeSteadyState(p0, r1 * p3, r2 * p3, p3, complex(rho03))


# ---------------------------------------------------------------- waiting time

def waiting_time_matrix(mm: MinimalModelParams) -> np.ndarray:
    """Generator of ``(rho_00, rho_33, Im rho_03)`` under no-emission evolution (gamma = 0)."""
    k, om = mm.kappa, mm.Omega
    return np.array([[0.0, 0.0, -2 * om], [0.0, -3 * k, 2 * om], [om, -om, -1.5 * k]])


def _sinh2_over(d: float | complex, tau: np.ndarray) -> np.ndarray:
    """``sinh^2(tau sqrt(d)/4) / d`` continued analytically through ``d = 0``."""
    x = d * tau**2 / 16.0
    out = np.empty_like(tau, dtype=float)
    small = np.abs(x) < 1e-6
    out[small] = (tau[small] ** 2 / 16.0) * (1 + x[small] / 3.0 + 2.0 * x[small] ** 2 / 45.0)
    xs = x[~small]
    if np.isrealobj(xs) or np.all(np.imag(xs) == 0):
        xs = np.real(xs)
        pos = xs > 0
        val = np.empty_like(xs)
        val[pos] = np.sinh(np.sqrt(xs[pos])) ** 2 / xs[pos]
        val[~pos] = np.sin(np.sqrt(-xs[~pos])) ** 2 / (-xs[~pos])
    else:
        val = np.real(np.sinh(np.sqrt(xs)) ** 2 / xs)
    out[~small] = (tau[~small] ** 2 / 16.0) * val
    return out


def waiting_time_analytic(mm: MinimalModelParams, tau, form: str = "derived") -> CorrelatorSeries:
    """Closed-form waiting-time density of the secular model at gamma = 0.

    ``form`` selects the Rabi-term expression:

    * ``"derived"``: ``rho33 = 8 Omega^2/(9k^2 - 16 Omega^2) e^{-3k tau/2} sinh^2(tau sqrt(9k^2 - 16 Omega^2)/4)``,
      the exact solution of :func:`waiting_time_matrix` from ``x(0) = (1/2, 0, 0)``;
    * ``"printed_prefactor"``: the same argument with prefactor ``2 Omega^2``;
    * ``"printed"``: prefactor ``2 Omega^2`` and argument ``sqrt(9k^2 - 9 Omega^2)``.
    """
    if mm.gamma != 0.0:
        raise ValueError("the closed-form waiting time holds for gamma = 0 only")
    tau = np.asarray(tau, dtype=float)
    k, om, nu = mm.kappa, mm.Omega, mm.nu
    dcrit = 9 * k**2 - 16 * om**2
    beat = 0.5 * (0.5 * np.exp(-k * tau) + np.exp(-k * tau) * np.cos(nu * tau) / 6.0)
    env = np.exp(-1.5 * k * tau)
    if form == "derived":
        rho33 = 8 * om**2 * env * _sinh2_over(dcrit, tau)
    elif form == "printed_prefactor":
        rho33 = 2 * om**2 * env * _sinh2_over(dcrit, tau)
    elif form == "printed":
        darg = 9 * k**2 - 9 * om**2
        # sinh^2(tau sqrt(darg)/4) / dcrit
        rho33 = 2 * om**2 * env * _sinh2_over(darg, tau) * darg / dcrit
    else:
        raise ValueError(f"unknown form {form!r}")
    vals = 2 * k * (beat + 1.5 * rho33)
    meta = {"method": "analytic", "form": form, "minimal": mm.as_dict()}
    return CorrelatorSeries(tau, vals, "waiting_time", meta=meta)


def lower_asymptote(mm: MinimalModelParams, tau) -> np.ndarray:
    """Envelope ``(kappa/3) e^{-kappa tau}`` through the beat minima."""
    return mm.kappa / 3.0 * np.exp(-mm.kappa * np.asarray(tau, dtype=float))


# ---------------------------------------------------------------- correlators

@dataclass(frozen=True)
class CoherencePair:
    """Two coupled coherences ``x' = M x`` with closed-form solution."""

    labels: tuple
    matrix: np.ndarray
    x0: np.ndarray

    @property
    def decay(self) -> complex:
        return -0.5 * np.trace(self.matrix)

    @property
    def freq(self) -> complex:
        m = self.matrix
        return np.sqrt(-(0.25 * (m[0, 0] - m[1, 1]) ** 2 + m[0, 1] * m[1, 0]) + 0j)

    def sin_coefficients(self) -> np.ndarray:
        """``K`` in ``x(tau) = e^{-a tau}[x0 cos(b tau) + (K/b) sin(b tau)]``."""
        t = -self.decay
        return (self.matrix - t * np.eye(2)) @ self.x0

    def evaluate(self, tau: np.ndarray) -> np.ndarray:
        a, b = self.decay, self.freq
        k = self.sin_coefficients()
        tau = np.asarray(tau, dtype=float)
        env = np.exp(-a * tau)
        return env[None, :] * (np.outer(self.x0, np.cos(b * tau)) + np.outer(k, _sinc_t(b, tau)))

    def laplace(self, omega: np.ndarray) -> np.ndarray:
        """``int_0^inf e^{i omega tau} x(tau) d tau`` through the general integral."""
        a, b = self.decay, self.freq
        k = self.sin_coefficients()
        omega = np.asarray(omega, dtype=float)
        i0 = general_integral(omega, a, b, 0.0)
        sin_part = _sin_laplace(omega, a, b)
        return np.outer(self.x0, i0) + np.outer(k, sin_part)


def _sinc_t(b: complex, tau: np.ndarray) -> np.ndarray:
    """``sin(b tau)/b`` with the ``b -> 0`` limit ``tau``."""
    if abs(b) < 1e-9:
        return tau.astype(complex)
    return np.sin(b * tau) / b


def _sin_laplace(omega, a, b):
    """``int_0^inf e^{(i omega - a) tau} sin(b tau)/b``, via ``I`` with ``lam = 1``."""
    if abs(b) < 1e-7 * max(1.0, abs(a)):
        return 1.0 / (a - 1j * omega) ** 2
    return (2.0 / a) * (general_integral(omega, a, b, 1.0) - general_integral(omega, a, b, 0.0))


def general_integral(omega, a1, b1, lam):
    """``I = int_0^inf e^{i omega tau} e^{-a1 tau}[cos(b1 tau) + (lam a1/(2 b1)) sin(b1 tau)] d tau``.

    Real ``b1`` uses the oscillatory closed form, purely imaginary
    ``b1 = i beta`` the hyperbolic one, ``b1 -> 0`` the confluent limit, and
    any other complex ``b1`` the oscillatory form continued analytically.
    """
    omega = np.asarray(omega, dtype=float)
    a1 = complex(a1)
    b1 = complex(b1)
    if abs(b1) < 1e-7 * max(1.0, abs(a1)):
        z = a1 - 1j * omega
        return 1.0 / z + lam * (a1 / 2.0) / z**2
    if b1.real == 0.0:
        beta = b1.imag
        cp = lam * a1 / (2.0 * beta)
        return 0.5 * (1 + cp) / (a1 - beta - 1j * omega) + 0.5 * (1 - cp) / (a1 + beta - 1j * omega)
    c = lam * a1 / (2.0 * b1)
    return 0.5 * (1 - 1j * c) / (a1 - 1j * (omega + b1)) + 0.5 * (1 + 1j * c) / (a1 - 1j * (omega - b1))


def coherence_pairs(mm: MinimalModelParams, kind: str = "first_order") -> dict:
    """The four autonomous coherence pairs feeding ``tr[a X(tau)]``.

    ``kind="first_order"`` propagates ``X(0) = rho_ss a^dag``; ``"anomalous"``
    propagates ``X(0) = a rho_ss``.  Pair ``(j0, j3)`` carries the lower
    transition from ``xi_j`` and pair ``(3j, 0j)`` the upper one.
    """
    ss = cascade_steady_state(mm)
    rho = ss.density()
    a = dressed_annihilation()
    x = rho @ a.conj().T if kind == "first_order" else a @ rho if kind == "anomalous" else None
    if x is None:
        raise ValueError(f"kind must be 'first_order' or 'anomalous', got {kind!r}")
    e = mm.frame_energies
    om, g3 = mm.Omega, mm.Gamma3
    pairs = {}
    for j in (1, 2):
        gj = mm.Gamma
        m_low = np.array([
            [-1j * (e[j] - e[0]) - gj / 2, 1j * om],
            [1j * om, -1j * (e[j] - e[3]) - (gj + g3) / 2],
        ])
        pairs[f"{j}0"] = CoherencePair((f"{j}0", f"{j}3"), m_low, np.array([x[j, 0], x[j, 3]]))
        m_up = np.array([
            [-1j * (e[3] - e[j]) - (gj + g3) / 2, -1j * om],
            [-1j * om, -1j * (e[0] - e[j]) - gj / 2],
        ])
        pairs[f"3{j}"] = CoherencePair((f"3{j}", f"0{j}"), m_up, np.array([x[3, j], x[0, j]]))
    return pairs


_WEIGHTS = {"10": A01, "20": A02, "31": A13, "32": A23}


def correlator_elements(mm: MinimalModelParams, tau, kind: str = "first_order") -> dict:
    """Closed-form matrix elements ``X_ij(tau)`` of the regressed operator."""
    tau = np.asarray(tau, dtype=float)
    out = {}
    for pair in coherence_pairs(mm, kind).values():
        vals = pair.evaluate(tau)
        out[pair.labels[0]] = vals[0]
        out[pair.labels[1]] = vals[1]
    return out


def _assemble(mm, tau, kind):
    el = correlator_elements(mm, tau, kind)
    return sum(w * el[key] for key, w in _WEIGHTS.items())


def first_order_analytic(mm: MinimalModelParams, tau) -> CorrelatorSeries:
    """``<a^dag(0) a(tau)>`` of the four-state model."""
    return CorrelatorSeries(tau, _assemble(mm, tau, "first_order"), "first_order",
                            meta={"method": "analytic", "minimal": mm.as_dict()})


def anomalous_analytic(mm: MinimalModelParams, tau) -> CorrelatorSeries:
    """``<a(tau) a(0)>`` of the four-state model."""
    return CorrelatorSeries(tau, _assemble(mm, tau, "anomalous"), "anomalous",
                            meta={"method": "analytic", "minimal": mm.as_dict()})


def _laplace_corr(mm, omega, kind):
    out = np.zeros(np.shape(omega), dtype=complex)
    for key, pair in coherence_pairs(mm, kind).items():
        out += _WEIGHTS[key] * pair.laplace(omega)[0]
    return out


def squeezing_spectrum_analytic(mm: MinimalModelParams, theta: float, omega) -> SpectrumSeries:
    """Spectrum of squeezing of the four-state model, LO-frame frequency axis."""
    omega = np.asarray(omega, dtype=float)
    ph = np.exp(-2j * theta)

    def f(w):
        return ph * _laplace_corr(mm, w, "anomalous") + _laplace_corr(mm, w, "first_order")

    vals = 4.0 * mm.kappa * np.real(0.5 * (f(omega) + np.conj(f(-omega)))) * 0.5
    meta = {"method": "analytic", "frame": "lo", "minimal": mm.as_dict()}
    return SpectrumSeries(omega, vals, "squeezing", theta=float(theta), meta=meta)


def photon_number(mm: MinimalModelParams) -> float:
    ss = cascade_steady_state(mm)
    return 0.5 * (ss.p1 + ss.p2) + (A13**2 + A23**2) * ss.p3


def transmission_spectrum_analytic(mm: MinimalModelParams, omega, normalize: bool = True) -> SpectrumSeries:
    """Transmission spectrum of the four-state model on the axis ``omega - omega_0``."""
    omega = np.asarray(omega, dtype=float)
    w = omega - mm.delta_omega_d
    vals = np.real(_laplace_corr(mm, w, "first_order")) / np.pi
    n = photon_number(mm)
    if normalize:
        vals = vals / n
    meta = {"method": "analytic", "frame": "resonance", "normalized": normalize, "n_ss": n,
            "minimal": mm.as_dict()}
    return SpectrumSeries(omega, vals, "transmission", meta=meta)


def h_theta_forward(mm: MinimalModelParams, theta: float, tau) -> CorrelatorSeries:
    """Forward branch ``tr[A_theta e^{L tau}(a rho a^dag)]/n`` of the four-state model."""
    tau = np.asarray(tau, dtype=float)
    rho = cascade_steady_state(mm).density()
    a = dressed_annihilation()
    q = a * np.exp(-1j * theta)
    a_th = 0.5 * (q + q.conj().T)
    x0 = vec(a @ rho @ a.conj().T) / photon_number(mm)
    lam, v = np.linalg.eig(effective_liouvillian(mm))
    c = (vec(a_th.T) @ v) * np.linalg.solve(v, x0)
    vals = np.exp(np.outer(tau, lam)) @ c
    return CorrelatorSeries(tau, vals.real, "h_theta", theta=float(theta),
                            meta={"method": "analytic", "branch": "forward"})


__all__ = [
    "MinimalModelParams",
    "CascadeSteadyState",
    "CoherencePair",
    "derive_params",
    "resonant_detuning",
    "dressed_annihilation",
    "effective_hamiltonian",
    "effective_liouvillian",
    "effective_propagate",
    "cascade_steady_state",
    "waiting_time_matrix",
    "waiting_time_analytic",
    "lower_asymptote",
    "general_integral",
    "coherence_pairs",
    "correlator_elements",
    "first_order_analytic",
    "anomalous_analytic",
    "squeezing_spectrum_analytic",
    "photon_number",
    "transmission_spectrum_analytic",
    "h_theta_forward",
]
