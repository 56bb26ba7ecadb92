"""Seeded trajectory ensembles, trigger-averaged photocurrents and ergodic averages."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import JCSimError, NoTriggers, TrajectoryFailure
from .hilbert import SystemParams
from .trajectories import CAVITY, TrajectoryRecord, UnravelingConfig, run_batch


@dataclass(frozen=True)
class EnsembleSpec:
    """``n_traj`` trajectories with indices ``0..n_traj-1`` keyed by ``base_seed``."""

    n_traj: int = 1
    base_seed: int = 0
    cfg: UnravelingConfig = field(default_factory=UnravelingConfig)
    warmup: float = 0.0

    def __post_init__(self):
        if int(self.n_traj) < 1:
            raise ValueError("n_traj must be >= 1")
        if self.warmup < 0:
            raise ValueError("warmup must be non-negative")
        if not 0 <= int(self.base_seed) < 2**64:
            raise ValueError("base_seed must be a 64-bit unsigned integer")

    def as_dict(self) -> dict:
        return {
            "n_traj": int(self.n_traj),
            "base_seed": int(self.base_seed),
            "warmup": float(self.warmup),
            "cfg": self.cfg.as_dict(),
        }


def _run_chunk(args):
    p, cfg, indices, seed, density_from = args
    try:
        return run_batch(p, cfg, indices, base_seed=seed, density_from=density_from)
    except JCSimError as exc:
        # locate the first failing member so the error names a trajectory
        for i in indices:
            try:
                run_batch(p, cfg, [i], base_seed=seed)
            except JCSimError as inner:
                raise TrajectoryFailure(i, inner) from inner
        raise TrajectoryFailure(indices[0], exc) from exc


def run_ensemble(
    p: SystemParams,
    spec: EnsembleSpec,
    batch_size: int = 256,
    workers: int = 1,
    density_from: float | None = None,
) -> list[TrajectoryRecord]:
    """Run all trajectories of ``spec``, vectorised in batches.

    Records come back ordered by index whatever the completion order.  Each
    trajectory draws from its own streams, so results depend only on
    ``(base_seed, index)``; bitwise identity additionally requires the same
    ``batch_size`` because BLAS may round differently for other batch shapes.
    """
    n = int(spec.n_traj)
    chunks = [list(range(s, min(n, s + batch_size))) for s in range(0, n, batch_size)]
    jobs = [(p, spec.cfg, c, int(spec.base_seed), density_from) for c in chunks]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    return [r for part in parts for r in part]


@dataclass(frozen=True, eq=False)
class TriggeredAverage:
    """Photocurrent averaged over counter triggers, ``H(tau) = <i(t_j + tau)>_j``."""

    tau: np.ndarray
    H_values: np.ndarray
    n_triggers: int
    stderr: np.ndarray
    h_normalized: np.ndarray | None
    covariance: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_triggers <= 0:
            raise NoTriggers("a triggered average needs at least one trigger")

    def asymmetry(self) -> dict:
        """Test ``H(tau) = H(-tau)`` over all mirror pairs of the grid.

        Returns the pair differences, their standard errors, the largest
        single-pair z-score and a chi-square statistic built with the
        bootstrap covariance (``p_value`` below 0.0027 is the 3-sigma level).
        """
        tau = self.tau
        pos = np.nonzero(tau > 1e-12)[0]
        pairs = []
        for k in pos:
            j = np.nonzero(np.abs(tau + tau[k]) < 1e-9 * max(1.0, abs(tau[k])))[0]
            if j.size:
                pairs.append((k, j[0]))
        if not pairs:
            raise ValueError("grid has no mirror pairs")
        kp = np.array([a for a, _ in pairs])
        km = np.array([b for _, b in pairs])
        diff = self.H_values[kp] - self.H_values[km]
        cov = (
            self.covariance[np.ix_(kp, kp)]
            + self.covariance[np.ix_(km, km)]
            - self.covariance[np.ix_(kp, km)]
            - self.covariance[np.ix_(km, kp)]
        )
        err = np.sqrt(np.clip(np.diag(cov), 0, None))
        chi2, dof = _chi_square(diff, cov)
        return {
            "tau": tau[kp],
            "difference": diff,
            "stderr": err,
            "max_z": float(np.max(np.abs(diff) / err)),
            "chi2": chi2,
            "dof": dof,
            "p_value": float(stats.chi2.sf(chi2, dof)),
        }

    def compare(self, model: np.ndarray) -> dict:
        """Chi-square consistency of ``H`` with a model series on the same grid."""
        resid = self.H_values - np.asarray(model)
        chi2, dof = _chi_square(resid, self.covariance)
        return {
            "max_z": float(np.max(np.abs(resid) / self.stderr)),
            "chi2": chi2,
            "dof": dof,
            "p_value": float(stats.chi2.sf(chi2, dof)),
        }


def _chi_square(x: np.ndarray, cov: np.ndarray, rcond: float = 1e-10) -> tuple[float, int]:
    """``x^T C^+ x`` with a pseudo-inverse; dof is the numerical rank of ``C``."""
    w, v = np.linalg.eigh(0.5 * (cov + cov.T))
    keep = w > rcond * w.max()
    proj = v[:, keep].T @ x
    return float(np.sum(proj**2 / w[keep])), int(keep.sum())


def triggered_average(
    records,
    tau_grid,
    warmup: float = 0.0,
    channel: str = CAVITY,
    block: float | None = None,
    n_boot: int = 1000,
    boot_seed: int = 0,
) -> TriggeredAverage:
    """Average the homodyne current around every counter click.

    Triggers earlier than ``warmup - min(tau)`` or later than
    ``t_end - max(tau)`` are discarded; overlapping windows all count.  The
    photocurrent is linearly interpolated at ``t_j + tau``.  Errors come from
    a block bootstrap: triggers are grouped by trajectory into consecutive
    time blocks of length ``block`` (default ``4 max|tau|``), which carries
    the correlation between overlapping windows into the error bars.
    """
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or tau.size < 1 or np.any(np.diff(tau) <= 0):
        raise ValueError("tau_grid must be a strictly increasing 1-d array")
    span = float(np.max(np.abs(tau)))
    block = block if block is not None else max(4.0 * span, 1.0)
    sums, counts, all_samples = [], [], []
    unc_sum, unc_n = 0.0, 0
    bandwidth = None
    for rec in records:
        if rec.photocurrent is None:
            raise ValueError(f"record {rec.index} has no photocurrent (r = 1 run?)")
        t, cur = rec.times, rec.photocurrent
        if bandwidth is None:
            bandwidth = rec.meta.get("config", {}).get("bandwidth")
        steady = t >= warmup
        unc_sum += float(cur[steady].sum())
        unc_n += int(steady.sum())
        tj = rec.jump_times_of(channel)
        ok = (tj + tau[0] >= warmup) & (tj + tau[-1] <= t[-1])
        tj = tj[ok]
        if tj.size == 0:
            continue
        samples = np.interp(tj[:, None] + tau[None, :], t, cur)
        all_samples.append(samples)
        blk = np.floor((tj - warmup) / block).astype(int)
        for b in np.unique(blk):
            sel = blk == b
            sums.append(samples[sel].sum(axis=0))
            counts.append(int(sel.sum()))
    if not all_samples:
        raise NoTriggers("no counter triggers survive the warmup and edge cuts")
    samples = np.concatenate(all_samples)
    n_trig = samples.shape[0]
    H = samples.mean(axis=0)
    S = np.array(sums)
    C = np.array(counts, dtype=float)
    rng = np.random.default_rng(boot_seed)
    nb = len(C)
    reps = np.empty((n_boot, tau.size))
    for k in range(n_boot):
        w = np.bincount(rng.integers(nb, size=nb), minlength=nb).astype(float)
        reps[k] = (w @ S) / (w @ C)
    cov = np.cov(reps, rowvar=False).reshape(tau.size, tau.size)
    stderr = np.sqrt(np.diag(cov))
    unc_mean = unc_sum / unc_n if unc_n else np.nan
    h_norm = None
    if unc_n and np.isfinite(unc_mean) and abs(unc_mean) > 1e-12:
        h_norm = H / unc_mean
    meta = {
        "n_blocks": nb,
        "block": block,
        "warmup": warmup,
        "unconditional_mean": unc_mean,
        "n_boot": n_boot,
        "channel": channel,
    }
    if bandwidth:
        meta["bandwidth"] = bandwidth
        meta["shot_noise_floor"] = float(np.sqrt(bandwidth / (2.0 * n_trig)))
    return TriggeredAverage(tau, H, n_trig, stderr, h_norm, cov, meta)


def ensemble_mean_series(records) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fixed-time ensemble mean of the conditioned photon number with its standard error."""
    n = np.array([r.cond_photon_number for r in records])
    se = n.std(axis=0, ddof=1) / np.sqrt(len(records)) if len(records) > 1 else np.zeros(n.shape[1])
    return records[0].times.copy(), n.mean(axis=0), se


def time_averaged_photon_number(records, warmup: float = 0.0) -> tuple[float, float]:
    """Time-and-ensemble average of ``<a^dag a>`` after ``warmup``.

    Per-trajectory time averages are treated as independent samples, which
    gives an honest standard error without modelling the autocorrelation.
    """
    per = []
    for r in records:
        sel = r.times >= warmup
        if not np.any(sel):
            raise ValueError("warmup leaves no samples")
        per.append(r.cond_photon_number[sel].mean())
    per = np.array(per)
    se = per.std(ddof=1) / np.sqrt(per.size) if per.size > 1 else np.nan
    return float(per.mean()), float(se)


def single_trajectory_average(record: TrajectoryRecord, warmup: float = 0.0, n_blocks: int = 20) -> tuple[float, float]:
    """Long-time average of ``<a^dag a>`` along one trajectory with a batch-means error."""
    x = record.cond_photon_number[record.times >= warmup]
    if x.size < n_blocks:
        raise ValueError("too few samples for the requested number of blocks")
    blocks = np.array([b.mean() for b in np.array_split(x, n_blocks)])
    return float(x.mean()), float(blocks.std(ddof=1) / np.sqrt(n_blocks))


def split_half_rms(records, tau_grid, warmup: float = 0.0, **kw) -> float:
    """RMS difference between ``H`` from the even- and odd-indexed halves."""
    even = triggered_average([r for r in records if r.index % 2 == 0], tau_grid, warmup, **kw)
    odd = triggered_average([r for r in records if r.index % 2 == 1], tau_grid, warmup, **kw)
    return float(np.sqrt(np.mean((even.H_values - odd.H_values) ** 2)))


__all__ = [
    "EnsembleSpec",
    "TriggeredAverage",
    "run_ensemble",
    "triggered_average",
    "ensemble_mean_series",
    "time_averaged_photon_number",
    "single_trajectory_average",
    "split_half_rms",
]
