"""Two-time averages of the full master equation via the quantum regression formula.

Every correlator here has the form ``tr[O exp(L tau) X]``.  One eigen-
decomposition of the generator turns it into a finite sum of complex
exponentials, so delay series are evaluated exactly on any grid and their
one-sided Laplace transforms are closed-form partial fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnconvergedTail, VanishingIntensity
from .hilbert import SystemParams, expectation, jc_operators
from .liouvillian import (
    ModalDecomposition,
    build_liouvillian,
    modal_decomposition_of,
    no_emission_liouvillian,
    propagate_series,
    steady_state_of,
)

INTENSITY_FLOOR = 1e-12
TAIL_TOL = 1e-8


@dataclass
class CorrelatorSeries:
    """Uniformly sampled function of the delay (units of 1/kappa)."""

    tau: np.ndarray
    values: np.ndarray
    kind: str
    theta: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.tau.ndim != 1 or self.tau.shape != self.values.shape:
            raise ValueError("tau and values must be 1-D arrays of equal length")
        if len(self.tau) > 1 and np.any(np.diff(self.tau) <= 0):
            raise ValueError("tau grid must be strictly increasing")

    @property
    def abscissa(self) -> np.ndarray:
        return self.tau


@dataclass
class SpectrumSeries:
    """Real function of frequency (units of kappa) with its frame recorded in ``meta``."""

    omega: np.ndarray
    values: np.ndarray
    kind: str
    theta: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.omega.ndim != 1 or self.omega.shape != self.values.shape:
            raise ValueError("omega and values must be 1-D arrays of equal length")
        if len(self.omega) > 1 and np.any(np.diff(self.omega) <= 0):
            raise ValueError("omega grid must be strictly increasing")

    @property
    def abscissa(self) -> np.ndarray:
        return self.omega


def _meta(p: SystemParams, method: str, **extra) -> dict:
    out = {"params": p.as_dict(), "method": method}
    out.update(extra)
    return out


def _photon_number(p: SystemParams, rho: np.ndarray) -> float:
    n = expectation(jc_operators(p.trunc).n, rho).real
    if n < INTENSITY_FLOOR:
        raise VanishingIntensity(f"<a^dag a>_ss = {n:.3e} below {INTENSITY_FLOOR:.0e}")
    return n


def modal_series(dec: ModalDecomposition, observable, x, tau, drop_zero: bool = False) -> np.ndarray:
    """``tr[O exp(L tau) X]`` on ``tau`` from the modal expansion."""
    c = dec.amplitudes(observable, x)
    if drop_zero:
        c = c.copy()
        c[dec.zero_mode] = 0.0
    return _sum_modes(dec.eigvals, c, np.asarray(tau, dtype=float))


def _sum_modes(lam: np.ndarray, c: np.ndarray, tau: np.ndarray, chunk: int = 2048) -> np.ndarray:
    out = np.empty(tau.shape, dtype=complex)
    flat = tau.ravel()
    res = out.ravel()
    for s in range(0, flat.size, chunk):
        res[s : s + chunk] = np.exp(np.outer(flat[s : s + chunk], lam)) @ c
    return out


def _regression(p: SystemParams, observable, x, tau, conditioned: bool = False) -> np.ndarray:
    """Modal evaluation with an exponential-stepping fallback for ill-conditioned bases."""
    dec = modal_decomposition_of(p, conditioned)
    if dec.well_conditioned:
        return modal_series(dec, observable, x, tau)
    L = no_emission_liouvillian(p) if conditioned else build_liouvillian(p)
    tau = np.asarray(tau, dtype=float)
    order = np.argsort(tau)
    rhos = propagate_series(L, x, tau[order])
    vals = np.einsum("ij,tji->t", observable, rhos)
    out = np.empty_like(vals)
    out[order] = vals
    return out


def laplace_modes(lam: np.ndarray, c: np.ndarray, omega: np.ndarray, chunk: int = 1024) -> np.ndarray:
    """``int_0^inf exp(i omega tau) sum_k c_k exp(lam_k tau) d tau`` (requires Re lam < 0)."""
    omega = np.asarray(omega, dtype=float)
    out = np.empty(omega.shape, dtype=complex)
    for s in range(0, omega.size, chunk):
        w = omega[s : s + chunk]
        out[s : s + chunk] = (-1.0 / (lam[None, :] + 1j * w[:, None])) @ c
    return out


def g2(p: SystemParams, tau) -> CorrelatorSeries:
    """Normalised intensity correlation ``tr[a^dag a e^{L tau} rho_cond] / <a^dag a>``."""
    ops = jc_operators(p.trunc)
    rho = steady_state_of(p)
    n = _photon_number(p, rho)
    rho_cond = ops.a @ rho @ ops.ad / n
    vals = _regression(p, ops.n, rho_cond, tau) / n
    return CorrelatorSeries(tau, vals.real, "g2", meta=_meta(p, "numeric", n_ss=n))


def waiting_time(p: SystemParams, tau) -> CorrelatorSeries:
    """Exclusive density of the delay to the next cavity emission after one at 0."""
    ops = jc_operators(p.trunc)
    rho = steady_state_of(p)
    n = _photon_number(p, rho)
    x = ops.a @ rho @ ops.ad / n
    vals = 2.0 * p.kappa * _regression(p, ops.n, x, tau, conditioned=True)
    return CorrelatorSeries(tau, vals.real, "waiting_time", meta=_meta(p, "numeric", n_ss=n))


def waiting_time_moments(p: SystemParams) -> dict:
    """Total probability and mean of the waiting-time density from the resolvent."""
    ops = jc_operators(p.trunc)
    rho = steady_state_of(p)
    n = _photon_number(p, rho)
    dec = modal_decomposition_of(p, True)
    c = 2.0 * p.kappa * dec.amplitudes(ops.n, ops.a @ rho @ ops.ad / n)
    lam = dec.eigvals
    return {"total": float(np.real(-np.sum(c / lam))), "mean": float(np.real(np.sum(c / lam**2)))}


def waiting_time_cdf(p: SystemParams, tau) -> np.ndarray:
    """Cumulative probability ``int_0^tau w``, in closed form from the modes."""
    ops = jc_operators(p.trunc)
    rho = steady_state_of(p)
    n = _photon_number(p, rho)
    dec = modal_decomposition_of(p, True)
    c = 2.0 * p.kappa * dec.amplitudes(ops.n, ops.a @ rho @ ops.ad / n)
    lam = dec.eigvals
    tau = np.asarray(tau, dtype=float)
    return np.real(_sum_modes(lam, c / lam, tau) - np.sum(c / lam))


def first_order_corr(p: SystemParams, tau) -> CorrelatorSeries:
    """``<a^dag(0) a(tau)>_ss = tr[a e^{L tau}(rho_ss a^dag)]``."""
    ops = jc_operators(p.trunc)
    rho = steady_state_of(p)
    vals = _regression(p, ops.a, rho @ ops.ad, tau)
    return CorrelatorSeries(tau, vals, "first_order", meta=_meta(p, "numeric"))


def anomalous_corr(p: SystemParams, tau) -> CorrelatorSeries:
    """``<a(tau) a(0)>_ss = tr[a e^{L tau}(a rho_ss)]``."""
    ops = jc_operators(p.trunc)
    rho = steady_state_of(p)
    vals = _regression(p, ops.a, ops.a @ rho, tau)
    return CorrelatorSeries(tau, vals, "anomalous", meta=_meta(p, "numeric"))


def _fluctuation_amplitudes(p: SystemParams):
    """Modal weights of the mean-subtracted first-order and anomalous correlators."""
    ops = jc_operators(p.trunc)
    rho = steady_state_of(p)
    dec = modal_decomposition_of(p)
    c1 = dec.amplitudes(ops.a, rho @ ops.ad)
    c2 = dec.amplitudes(ops.a, ops.a @ rho)
    z = dec.zero_mode
    c1[z] = 0.0
    c2[z] = 0.0
    return dec.eigvals, c1, c2


def _frame_shift(p: SystemParams, frame: str) -> float:
    """Offset added to the LO/drive-frame frequency to obtain the plotted axis."""
    if frame == "lo":
        return 0.0
    if frame == "resonance":
        return p.delta_omega_d
    raise ValueError(f"frame must be 'lo' or 'resonance', got {frame!r}")


def squeezing_spectrum(
    p: SystemParams,
    theta: float,
    omega,
    method: str = "modal",
    frame: str = "lo",
    tau_max: float = 30.0,
) -> SpectrumSeries:
    """Spectrum of squeezing ``4 kappa Re int_0^inf e^{i w tau} R_theta(tau)``.

    ``R_theta`` is the normally and time ordered quadrature fluctuation
    correlation.  ``omega`` is measured from the local-oscillator (drive)
    frequency when ``frame="lo"`` and from the bare resonance when
    ``frame="resonance"``.
    """
    omega = np.asarray(omega, dtype=float)
    w = omega - _frame_shift(p, frame)
    lam, c1, c2 = _fluctuation_amplitudes(p)
    ph = np.exp(-2j * theta)
    if method == "modal":
        # Re[z] and Re[conj z] transforms: Re int e^{iwt} Re[f] = (F(w) + conj F(-w)) / 2
        f = ph * c2 + c1
        fw = laplace_modes(lam, f, w)
        fmw = laplace_modes(lam, f, -w)
        vals = 4.0 * p.kappa * np.real(0.5 * (fw + np.conj(fmw))) * 0.5
    elif method == "quadrature":
        vals = _squeeze_quadrature(p, lam, ph * c2 + c1, w, tau_max)
    else:
        raise ValueError(f"unknown method {method!r}")
    meta = _meta(p, "numeric", integration=method, frame=frame)
    return SpectrumSeries(omega, vals, "squeezing", theta=float(theta), meta=meta)


def _squeeze_quadrature(p, lam, f, w, tau_max):
    dtau = min(np.pi / (20.0 * p.g), 1e-2)
    tau = np.arange(0.0, tau_max + dtau / 2, dtau)
    r = 0.5 * np.real(_sum_modes(lam, f, tau))
    if abs(r[-1]) > TAIL_TOL:
        raise UnconvergedTail(f"|R(tau_max={tau_max})| = {abs(r[-1]):.2e} exceeds {TAIL_TOL:.0e}")
    out = np.empty(w.shape)
    for k, wk in enumerate(w):
        out[k] = np.trapezoid(np.cos(wk * tau) * r, tau)
    return 4.0 * p.kappa * out


def quadrature_correlation(p: SystemParams, theta: float, tau) -> CorrelatorSeries:
    """``R_theta(tau)``, the normally ordered quadrature fluctuation correlation."""
    lam, c1, c2 = _fluctuation_amplitudes(p)
    vals = 0.5 * np.real(_sum_modes(lam, np.exp(-2j * theta) * c2 + c1, np.asarray(tau, float)))
    return CorrelatorSeries(tau, vals, "quadrature", theta=float(theta), meta=_meta(p, "numeric"))


def transmission_spectrum(p: SystemParams, omega, normalize: bool = True) -> SpectrumSeries:
    """Incoherent transmission spectrum on the axis ``omega - omega_0``.

    The coherent component ``|<a>|^2`` is a delta function at the drive
    frequency; it is excluded from the sampled values and its weight is
    reported as ``meta["coherent_fraction"]`` so that the grid integral plus
    that fraction is one.
    """
    omega = np.asarray(omega, dtype=float)
    ops = jc_operators(p.trunc)
    rho = steady_state_of(p)
    n = expectation(ops.n, rho).real
    lam, c1, _ = _fluctuation_amplitudes(p)
    w = omega - p.delta_omega_d
    vals = np.real(laplace_modes(lam, c1, w)) / np.pi
    alpha = expectation(ops.a, rho)
    coherent = abs(alpha) ** 2
    if normalize:
        if n < INTENSITY_FLOOR:
            raise VanishingIntensity(f"<a^dag a>_ss = {n:.3e}; cannot normalise")
        vals = vals / n
        coherent = coherent / n
    meta = _meta(
        p, "numeric", frame="resonance", normalized=normalize, coherent_fraction=coherent,
        drive_offset=p.delta_omega_d, n_ss=n,
    )
    return SpectrumSeries(omega, vals, "transmission", meta=meta)


def h_theta_modes(p: SystemParams, theta: float):
    """Modal weights of the forward (``tau >= 0``) and backward branches of h_theta."""
    ops = jc_operators(p.trunc)
    rho = steady_state_of(p)
    n = _photon_number(p, rho)
    dec = modal_decomposition_of(p)
    a_th = ops.quadrature(theta)
    fwd = dec.amplitudes(a_th, ops.a @ rho @ ops.ad) / n
    x_back = 0.5 * (np.exp(-1j * theta) * ops.a @ rho + np.exp(1j * theta) * rho @ ops.ad)
    bwd = dec.amplitudes(ops.n, x_back) / n
    return dec.eigvals, fwd, bwd, n, expectation(a_th, rho).real


def h_theta_unconditional(
    p: SystemParams,
    theta: float,
    tau,
    bandwidth: float | None = None,
    normalize: bool = False,
) -> CorrelatorSeries:
    """Counter-triggered mean quadrature ``<A_theta>`` versus delay from the trigger.

    For ``tau >= 0`` this is ``tr[A_theta e^{L tau}(a rho a^dag)]/n``; for
    ``tau < 0`` the quadrature precedes the count and the average is
    ``tr[a^dag a e^{L|tau|}((e^{-i theta} a rho + e^{i theta} rho a^dag)/2)]/n``.
    With ``bandwidth`` set, the series is convolved with the single-pole
    detector response ``B e^{-B s}`` to model the filtered photocurrent.
    """
    tau = np.asarray(tau, dtype=float)
    lam, fwd, bwd, n, a_ss = h_theta_modes(p, theta)
    pos = tau >= 0
    vals = np.empty(tau.shape, dtype=complex)
    if bandwidth is None:
        vals[pos] = _sum_modes(lam, fwd, tau[pos])
        vals[~pos] = _sum_modes(lam, bwd, -tau[~pos])
    else:
        b = float(bandwidth)
        tp = tau[pos]
        decay = np.exp(-b * tp)
        vals[pos] = (
            _sum_modes(lam, fwd * b / (lam + b), tp)
            - decay * np.sum(fwd * b / (lam + b))
            + decay * np.sum(bwd * b / (b - lam))
        )
        vals[~pos] = _sum_modes(lam, bwd * b / (b - lam), -tau[~pos])
    meta = _meta(p, "numeric", a_theta_ss=a_ss, n_ss=n, bandwidth=bandwidth, normalized=False)
    if normalize:
        if abs(a_ss) < 1e-9:
            raise VanishingIntensity("steady-state quadrature vanishes; cannot normalise to long delays")
        vals = vals / a_ss
        meta["normalized"] = True
    return CorrelatorSeries(tau, vals.real, "h_theta", theta=float(theta), meta=meta)


__all__ = [
    "CorrelatorSeries",
    "SpectrumSeries",
    "modal_series",
    "laplace_modes",
    "g2",
    "waiting_time",
    "waiting_time_moments",
    "waiting_time_cdf",
    "first_order_corr",
    "anomalous_corr",
    "squeezing_spectrum",
    "quadrature_correlation",
    "transmission_spectrum",
    "h_theta_modes",
    "h_theta_unconditional",
]
