"""Stochastic unravelings: direct photodetection and the wave-particle correlator.

A fraction ``r`` of the output goes to a photon counter, whose clicks
collapse the state with ``a``; the rest feeds a balanced homodyne detector
with LO phase ``theta``, whose record drives the diffusive part of the
linear stochastic Schroedinger equation

    d psi = [-i H' dt + c (s dt + dW)] psi,   c = sqrt(2 kappa (1 - r)) e^{-i theta} a,

with ``s = <c + c^dag>`` evaluated on the normalised state (held at its
start-of-step value within a step) and
``H' = H - i kappa a^dag a - i (gamma/2) sigma_+ sigma_-``.  The detector
current obeys ``di = -B (i - s) dt + B dW`` with the same ``dW``.

The default scheme is a Strang splitting: exact half steps of ``H'`` wrap an
explicit weak order-2.0 step of the measurement part.  ``scheme="kp"``
applies the weak order-2.0 step to the whole equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .errors import NormUnderflow, StepTooLarge
from .hilbert import SystemParams, parse_state_spec
from .liouvillian import non_hermitian_hamiltonian, steady_state_of
from .rng import INIT, JUMPS, NOISE, BatchDraws, stream

NORM_FLOOR = 1e-12
MAX_JUMP_PROB = 0.1
CAVITY, SPONTANEOUS = "cavity_APD", "spontaneous"


@dataclass(frozen=True)
class UnravelingConfig:
    """Measurement scheme and integration settings of one unraveling.

    ``dt`` defaults to ``1/(40 g)``; larger values are rejected.  Output is
    recorded every ``record_stride`` steps.
    """

    r: float = 1.0
    theta: float = 0.0
    bandwidth: float = 10.0
    dt: float | None = None
    seed: int = 0
    t_max: float = 10.0
    record_stride: int = 4
    initial_state: str = "1,-"
    scheme: str = "strang"

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r}")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.scheme not in ("strang", "kp"):
            raise ValueError(f"scheme must be 'strang' or 'kp', got {self.scheme!r}")

    def step(self, p: SystemParams) -> float:
        limit = 1.0 / (40.0 * p.g)
        dt = limit if self.dt is None else float(self.dt)
        if dt <= 0 or dt > limit * (1 + 1e-12):
            raise ValueError(f"dt = {dt:.3e} exceeds the resolution limit 1/(40 g) = {limit:.3e}")
        return dt

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        if not isinstance(out["initial_state"], str):
            out["initial_state"] = "custom"
        return out


@dataclass
class TrajectoryRecord:
    """Sampled output of one trajectory."""

    times: np.ndarray
    cond_photon_number: np.ndarray
    cond_quadrature: np.ndarray
    photocurrent: np.ndarray | None
    jumps: list
    seed: int
    index: int
    final_state: np.ndarray
    mean_density: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def jump_times(self) -> np.ndarray:
        return np.array([t for t, _ in self.jumps])

    def jump_times_of(self, channel: str) -> np.ndarray:
        return np.array([t for t, ch in self.jumps if ch == channel])


def kp_weak2_step(y, drift, diffusion, dt: float, dw):
    """Explicit weak order-2.0 step for a scalar-noise SDE ``dy = a(y) dt + b(y) dW``.

    ``y`` may hold a batch of states along its first axis; ``dw`` is then a
    vector of increments, one per row.
    """
    dw = np.asarray(dw, dtype=float)
    if dw.ndim:
        dw = dw.reshape((-1,) + (1,) * (np.ndim(y) - 1))
    sq = np.sqrt(dt)
    a0 = drift(y)
    b0 = diffusion(y)
    ybar = y + a0 * dt + b0 * dw
    yp = y + a0 * dt + b0 * sq
    ym = y + a0 * dt - b0 * sq
    bp = diffusion(yp)
    bm = diffusion(ym)
    return (
        y
        + 0.5 * (drift(ybar) + a0) * dt
        + 0.25 * (bp + bm + 2.0 * b0) * dw
        + 0.25 * (bp - bm) * (dw * dw - dt) / sq
    )


def photocurrent_step(i, s, dw, bandwidth: float, dt: float):
    """Euler step of ``di = -B (i dt - s dt - dW)``."""
    return i - bandwidth * (i - s) * dt + bandwidth * dw


class _Engine:
    """Precomputed operators for batched integration at fixed (p, r, theta, dt)."""

    def __init__(self, p: SystemParams, r: float, theta: float, dt: float):
        self.p, self.r, self.theta, self.dt = p, r, theta, dt
        self.d = p.dim
        idx = np.arange(self.d)
        self.nvals = (idx // 2).astype(float)
        self.excited = (idx % 2).astype(float)
        self.sqrt_shift = np.sqrt(idx[2:] // 2).astype(float)
        hp = non_hermitian_hamiltonian(p)
        self.hp_t = np.ascontiguousarray(hp.T)
        self.u_half_t = np.ascontiguousarray(sla.expm(-0.5j * dt * hp).T)
        self.u_full_t = np.ascontiguousarray(sla.expm(-1j * dt * hp).T)
        self.c_amp = np.sqrt(2.0 * p.kappa * (1.0 - r)) * np.exp(-1j * theta)
        self.s_scale = np.sqrt(8.0 * p.kappa * (1.0 - r))
        self.c_shift = self.c_amp * self.sqrt_shift
        self.nvals_ri = np.repeat(self.nvals, 2)

    def fused_measurement(self, phi, dw, buf1, buf2):
        """In-place Strang measurement substep plus renormalisation.

        ``buf1``/``buf2`` are scratch arrays whose last two columns stay zero.
        Returns ``(s, n)``: the frozen signal and the post-step photon number.
        """
        np.multiply(phi[:, 2:], self.c_shift, out=buf1[:, :-2])
        np.multiply(buf1[:, 2:], self.c_shift, out=buf2[:, :-2])
        vr = phi.view(np.float64)
        n2 = np.einsum("ij,ij->i", vr, vr)
        s = 2.0 * np.einsum("ij,ij->i", vr, buf1.view(np.float64)) / n2
        e = s * self.dt + dw
        buf1 *= e[:, None]
        buf2 *= (0.5 * (e * e - self.dt))[:, None]
        phi += buf1
        phi += buf2
        n2 = np.einsum("ij,ij->i", vr, vr)
        if n2.min() < NORM_FLOOR**2:
            raise NormUnderflow(f"state norm {np.sqrt(n2.min()):.2e} below {NORM_FLOOR:.0e}")
        phi *= (1.0 / np.sqrt(n2))[:, None]
        return s, (vr * vr) @ self.nvals_ri

    # batched operator actions on rows
    def apply_a(self, y):
        out = np.zeros_like(y)
        out[:, :-2] = y[:, 2:] * self.sqrt_shift
        return out

    def apply_sm(self, y):
        out = np.zeros_like(y)
        out[:, 0::2] = y[:, 1::2]
        return out

    def norms2(self, y):
        return np.einsum("ij,ij->i", y.conj(), y).real

    def photon_number(self, y):
        return (np.abs(y) ** 2) @ self.nvals / self.norms2(y)

    def excited_pop(self, y):
        return (np.abs(y) ** 2) @ self.excited / self.norms2(y)

    def quadrature(self, y):
        ay = self.apply_a(y)
        return np.real(np.exp(-1j * self.theta) * np.einsum("ij,ij->i", y.conj(), ay)) / self.norms2(y)

    def signal(self, y):
        """``s = <c + c^dag>`` on the normalised rows."""
        return self.s_scale * self.quadrature(y)

    def meas_diffusion(self, y):
        return self.c_amp * self.apply_a(y)

    def measurement_step(self, y, s, dw):
        """Weak order-2.0 step of ``dy = c y (s dt + dW)`` with ``s`` frozen per row.

        For a linear diffusion with frozen drift coefficient the explicit
        scheme collapses to ``y + E c y + (E^2 - dt) c^2 y / 2`` with
        ``E = s dt + dW``; :func:`kp_weak2_step` gives the same result.
        """
        e = (s * self.dt + dw)[:, None]
        cy = self.meas_diffusion(y)
        ccy = self.meas_diffusion(cy)
        return y + e * cy + 0.5 * (e * e - self.dt) * ccy

    def full_step(self, y, s, dw):
        """Weak order-2.0 step of the whole equation, ``s`` frozen per row."""
        sc = s[:, None]

        def drift(x):
            return -1j * (x @ self.hp_t) + sc * self.meas_diffusion(x)

        return kp_weak2_step(y, drift, self.meas_diffusion, self.dt, dw)


@lru_cache(maxsize=8)
def _engine(p: SystemParams, r: float, theta: float, dt: float) -> _Engine:
    return _Engine(p, r, theta, dt)


def _normalize(y):
    nrm = np.sqrt(np.einsum("ij,ij->i", y.conj(), y).real)
    if np.any(nrm < NORM_FLOOR):
        raise NormUnderflow(f"state norm {nrm.min():.2e} below {NORM_FLOOR:.0e}")
    return y / nrm[:, None]


def initial_states(p: SystemParams, spec, base_seed: int, indices) -> np.ndarray:
    """Rows of initial pure states; ``"steady"`` samples the steady-state eigenbasis."""
    m = len(indices)
    if isinstance(spec, np.ndarray):
        psi = np.asarray(spec, dtype=complex)
        if psi.shape != (p.dim,):
            raise ValueError(f"initial state must have dimension {p.dim}")
        return np.tile(psi / np.linalg.norm(psi), (m, 1))
    if spec == "steady":
        w, v = np.linalg.eigh(steady_state_of(p))
        w = np.clip(w, 0.0, None)
        cdf = np.cumsum(w) / w.sum()
        out = np.empty((m, p.dim), dtype=complex)
        for k, idx in enumerate(indices):
            u = stream(base_seed, idx, INIT).random()
            out[k] = v[:, min(np.searchsorted(cdf, u), p.dim - 1)]
        return out
    return np.tile(parse_state_spec(spec, p.trunc), (m, 1))


def run_batch(
    p: SystemParams,
    cfg: UnravelingConfig,
    indices,
    base_seed: int | None = None,
    density_from: float | None = None,
) -> list[TrajectoryRecord]:
    """Integrate the trajectories ``indices`` together, vectorised over the batch.

    Each trajectory uses its own streams keyed by ``(base_seed, index)``, so
    its record does not depend on which batch it runs in.  With
    ``density_from`` set, the time average of ``|psi><psi|`` over record
    instants at or after that time is accumulated per trajectory.
    """
    indices = [int(i) for i in indices]
    seed = cfg.seed if base_seed is None else int(base_seed)
    dt = cfg.step(p)
    eng = _engine(p, float(cfg.r), float(cfg.theta), dt)
    m = len(indices)
    n_steps = int(round(cfg.t_max / dt))
    stride = cfg.record_stride
    rec_steps = np.arange(0, n_steps + 1, stride)
    if rec_steps[-1] != n_steps:
        rec_steps = np.append(rec_steps, n_steps)
    nrec = len(rec_steps)
    times = rec_steps * dt
    n_rec = np.empty((m, nrec))
    q_rec = np.empty((m, nrec))
    diffusive = cfg.r < 1.0
    i_rec = np.zeros((m, nrec)) if diffusive else None
    jumps: list[list] = [[] for _ in range(m)]
    dens = np.zeros((m, p.dim, p.dim), dtype=complex) if density_from is not None else None
    dens_count = 0

    noise = BatchDraws(seed, indices, NOISE, "normal") if diffusive else None
    draws = BatchDraws(seed, indices, JUMPS, "uniform")
    psi0 = initial_states(p, cfg.initial_state, seed, indices)
    current = np.zeros(m)
    sqdt = np.sqrt(dt)
    p_cav_scale = 2.0 * p.kappa * cfg.r * dt
    p_sp_scale = p.gamma * dt
    strang = cfg.scheme == "strang"

    def record(k, psi):
        nonlocal dens_count, dens
        n_rec[:, k] = eng.photon_number(psi)
        q_rec[:, k] = eng.quadrature(psi)
        if diffusive:
            i_rec[:, k] = current
        if dens is not None and times[k] >= density_from - 1e-12:
            dens += np.einsum("ki,kj->kij", psi, psi.conj())
            dens_count += 1

    record(0, psi0)
    phi = _normalize(psi0 @ eng.u_half_t) if strang else psi0.copy()
    buf1 = np.zeros_like(phi)
    buf2 = np.zeros_like(phi)
    k_rec = 1
    psi = psi0
    for step in range(n_steps):
        nphot = None
        if diffusive:
            dw = sqdt * noise.next()
            if strang:
                s, nphot = eng.fused_measurement(phi, dw, buf1, buf2)
            else:
                s = eng.signal(phi)
                phi = _normalize(eng.full_step(phi, s, dw))
            current = photocurrent_step(current, s, dw, cfg.bandwidth, dt)
        else:
            if not strang:
                phi = eng.full_step(phi, np.zeros(m), np.zeros(m))
            phi = _normalize(phi)

        u = draws.next()
        if cfg.r > 0:
            p_cav = p_cav_scale * (eng.photon_number(phi) if nphot is None else nphot)
        else:
            p_cav = np.zeros(m)
        p_sp = p_sp_scale * eng.excited_pop(phi) if p.gamma > 0 else np.zeros(m)
        p_tot = p_cav + p_sp
        if np.any(p_tot > MAX_JUMP_PROB):
            raise StepTooLarge(f"jump probability {p_tot.max():.3f} per step exceeds {MAX_JUMP_PROB}")
        hit = u < p_tot
        if np.any(hit):
            t_jump = (step + 0.5) * dt if strang else (step + 1) * dt
            cav = np.nonzero(u < p_cav)[0]
            spo = np.nonzero(hit & (u >= p_cav))[0]
            if cav.size:
                phi[cav] = _normalize(eng.apply_a(phi[cav]))
                for k in cav:
                    jumps[k].append((t_jump, CAVITY))
            if spo.size:
                phi[spo] = _normalize(eng.apply_sm(phi[spo]))
                for k in spo:
                    jumps[k].append((t_jump, SPONTANEOUS))

        last = step == n_steps - 1
        if k_rec < nrec and rec_steps[k_rec] == step + 1:
            psi = _normalize(phi @ eng.u_half_t) if strang else phi
            record(k_rec, psi)
            k_rec += 1
        if strang and not last:
            phi = phi @ eng.u_full_t
    final = psi if n_steps > 0 else psi0

    out = []
    meta = {"params": p.as_dict(), "config": cfg.as_dict(), "dt": dt, "base_seed": seed}
    for k, idx in enumerate(indices):
        md = dens[k] / dens_count if dens is not None and dens_count else None
        out.append(TrajectoryRecord(
            times=times.copy(),
            cond_photon_number=n_rec[k].copy(),
            cond_quadrature=q_rec[k].copy(),
            photocurrent=None if i_rec is None else i_rec[k].copy(),
            jumps=jumps[k],
            seed=seed,
            index=idx,
            final_state=final[k].copy(),
            mean_density=md,
            meta=dict(meta, index=idx),
        ))
    return out


def run_direct_photodetection(p: SystemParams, cfg: UnravelingConfig, index: int = 0) -> TrajectoryRecord:
    """Quantum-jump trajectory with every cavity photon counted (``r = 1``)."""
    if cfg.r != 1.0:
        raise ValueError("direct photodetection requires r = 1")
    return run_batch(p, cfg, [index])[0]


def run_wave_particle(
    p: SystemParams, cfg: UnravelingConfig, index: int = 0, density_from: float | None = None
) -> TrajectoryRecord:
    """Wave-particle correlator trajectory: counter jumps plus homodyne diffusion."""
    return run_batch(p, cfg, [index], density_from=density_from)[0]


def wave_particle_step(
    state: np.ndarray,
    i_current: float,
    p: SystemParams,
    cfg: UnravelingConfig,
    noise: float,
    uniform: float | None = None,
):
    """Advance one state by one step ``dt`` with Wiener increment ``noise``.

    Returns ``(state', i', jump)`` where ``jump`` is ``None`` or the channel
    name.  ``uniform`` is the jump draw in [0, 1); ``None`` disables jumps.
    """
    dt = cfg.step(p)
    eng = _engine(p, float(cfg.r), float(cfg.theta), dt)
    y = np.asarray(state, dtype=complex)[None, :]
    if abs(np.linalg.norm(y) - 1.0) > 1e-9:
        raise ValueError("input state must be normalised")
    dw = np.array([noise], dtype=float)
    if cfg.scheme == "strang":
        y = y @ eng.u_half_t
        s = eng.signal(y)
        y = eng.measurement_step(y, s, dw)
    else:
        s = eng.signal(y)
        y = eng.full_step(y, s, dw)
    s = s[0]
    y = _normalize(y)
    jump = None
    if uniform is not None:
        p_cav = 2.0 * p.kappa * cfg.r * dt * eng.photon_number(y)[0]
        p_sp = p.gamma * dt * eng.excited_pop(y)[0]
        if p_cav + p_sp > MAX_JUMP_PROB:
            raise StepTooLarge(f"jump probability {p_cav + p_sp:.3f} exceeds {MAX_JUMP_PROB}")
        if uniform < p_cav:
            y, jump = _normalize(eng.apply_a(y)), CAVITY
        elif uniform < p_cav + p_sp:
            y, jump = _normalize(eng.apply_sm(y)), SPONTANEOUS
    if cfg.scheme == "strang":
        y = _normalize(y @ eng.u_half_t)
    i_new = photocurrent_step(i_current, s, noise, cfg.bandwidth, dt)
    return y[0], float(i_new), jump


def conditioned_state(record: TrajectoryRecord) -> np.ndarray:
    """Density operator of the record's final conditioned state."""
    psi = record.final_state
    return np.outer(psi, psi.conj())


def conditioned_wigner_snapshot(
    p: SystemParams,
    cfg: UnravelingConfig,
    t_snap: float,
    projection: str | None = None,
    **grid,
):
    """Wigner function of the cavity conditioned state at ``t_snap``.

    The trajectory is rerun to ``t_snap`` with the same seed, which yields
    exactly the prefix of the longer run.  ``projection`` selects the atomic
    block ``<-|rho|->`` or ``<+|rho|+>`` instead of the full partial trace.
    """
    from .hilbert import atom_block, partial_trace_atom
    from .wigner import wigner_transform

    if t_snap <= 0:
        psi = initial_states(p, cfg.initial_state, cfg.seed, [0])[0]
    else:
        psi = run_batch(p, replace(cfg, t_max=t_snap), [0])[0].final_state
    rho = np.outer(psi, psi.conj())
    if projection is None:
        cav = partial_trace_atom(rho)
    else:
        cav = atom_block(rho, 0 if projection == "-" else 1)
        w = np.trace(cav).real
        if w < 1e-12:
            raise ValueError(f"projection {projection!r} has vanishing weight")
        cav = cav / w
    return wigner_transform(cav, **grid)


def segment_beat_frequencies(record: TrajectoryRecord, min_samples: int = 64, pad: int = 16) -> list:
    """Dominant oscillation frequency of ``<a^dag a>`` between successive jumps.

    Each segment is mean-subtracted, Hann windowed, zero-padded and the
    spectral peak refined by parabolic interpolation of log magnitude.
    Returns a list of ``(t_start, t_end, omega)`` with omega in rad per 1/kappa.
    """
    t = record.times
    edges = [t[0]] + list(record.jump_times) + [t[-1]]
    dt = t[1] - t[0]
    out = []
    for t0, t1 in zip(edges[:-1], edges[1:]):
        sel = (t > t0 + 2 * dt) & (t < t1 - 2 * dt)
        x = record.cond_photon_number[sel]
        if x.size < min_samples:
            continue
        x = (x - x.mean()) * np.hanning(x.size)
        nfft = int(2 ** np.ceil(np.log2(x.size * pad)))
        mag = np.abs(np.fft.rfft(x, nfft))
        k = int(np.argmax(mag[1:-1])) + 1
        lm = np.log(mag[k - 1 : k + 2] + 1e-300)
        denom = lm[0] - 2 * lm[1] + lm[2]
        shift = 0.5 * (lm[0] - lm[2]) / denom if denom != 0 else 0.0
        omega = 2 * np.pi * (k + shift) / (nfft * dt)
        out.append((float(t0), float(t1), float(omega)))
    return out


__all__ = [
    "UnravelingConfig",
    "TrajectoryRecord",
    "kp_weak2_step",
    "photocurrent_step",
    "initial_states",
    "run_batch",
    "run_direct_photodetection",
    "run_wave_particle",
    "wave_particle_step",
    "conditioned_state",
    "conditioned_wigner_snapshot",
    "segment_beat_frequencies",
    "CAVITY",
    "SPONTANEOUS",
]
