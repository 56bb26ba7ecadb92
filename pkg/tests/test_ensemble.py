from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from jcsim.ensemble import (
    EnsembleSpec,
    TriggeredAverage,
    ensemble_mean_series,
    run_ensemble,
    single_trajectory_average,
    split_half_rms,
    time_averaged_photon_number,
    triggered_average,
)
from jcsim.errors import NoTriggers
from jcsim.hilbert import SystemParams, expectation, jc_operators
from jcsim.liouvillian import steady_state_of
from jcsim.trajectories import CAVITY, TrajectoryRecord, UnravelingConfig, run_wave_particle

P = SystemParams.from_ratios(20.0, 0.1, -0.7, 0.0, n_max=6)
CFG = UnravelingConfig(r=0.5, theta=np.pi / 4, t_max=2.0, seed=0)


def _synthetic(n_rec=20, t_max=200.0, dt=0.01, bandwidth=10.0, rate=0.5, seed=0):
    """Records with filtered white noise and independent Poisson triggers."""
    rng = np.random.default_rng(seed)
    t = np.arange(0, t_max + dt / 2, dt)
    out = []
    for k in range(n_rec):
        dw = rng.normal(size=t.size - 1) * np.sqrt(dt)
        cur = np.empty(t.size)
        cur[0] = rng.normal() * np.sqrt(bandwidth / 2)
        decay = 1 - bandwidth * dt
        for j in range(t.size - 1):
            cur[j + 1] = cur[j] * decay + bandwidth * dw[j]
        jt = np.sort(rng.uniform(0, t_max, rng.poisson(rate * t_max)))
        out.append(TrajectoryRecord(
            times=t, cond_photon_number=np.zeros(t.size), cond_quadrature=np.zeros(t.size),
            photocurrent=cur, jumps=[(x, CAVITY) for x in jt], seed=0, index=k,
            final_state=np.zeros(2), meta={"config": {"bandwidth": bandwidth}},
        ))
    return out


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(n_traj=0)
    with pytest.raises(ValueError):
        EnsembleSpec(warmup=-1.0)
    assert EnsembleSpec(n_traj=3).as_dict()["n_traj"] == 3


def test_single_member_ensemble_equals_single_trajectory():
    rec = run_ensemble(P, EnsembleSpec(n_traj=1, base_seed=CFG.seed, cfg=CFG))[0]
    ref = run_wave_particle(P, CFG)
    assert np.array_equal(rec.photocurrent, ref.photocurrent)
    assert rec.jumps == ref.jumps


def test_ensemble_reruns_bitwise_and_ordered():
    spec = EnsembleSpec(n_traj=5, base_seed=3, cfg=CFG)
    a = run_ensemble(P, spec, batch_size=2)
    b = run_ensemble(P, spec, batch_size=2)
    assert [r.index for r in a] == list(range(5))
    for x, y in zip(a, b):
        assert np.array_equal(x.photocurrent, y.photocurrent)
        assert x.jumps == y.jumps
    c = run_ensemble(P, spec, batch_size=5)
    for x, y in zip(a, c):
        assert np.allclose(x.photocurrent, y.photocurrent, atol=1e-10)


def test_white_noise_trigger_average_is_flat_at_shot_noise():
    recs = _synthetic()
    tau = np.linspace(-0.5, 0.5, 11)
    ta = triggered_average(recs, tau)
    floor = ta.meta["shot_noise_floor"]
    assert floor == pytest.approx(np.sqrt(10.0 / (2 * ta.n_triggers)))
    assert np.max(np.abs(ta.H_values) / ta.stderr) < 4.5
    assert np.median(ta.stderr) == pytest.approx(floor, rel=0.2)
    asym = ta.asymmetry()
    assert asym["dof"] == 5 and asym["p_value"] > 0.001
    assert ta.compare(np.zeros(tau.size))["p_value"] > 0.001


def test_no_triggers():
    recs = _synthetic(n_rec=2, rate=0.0)
    with pytest.raises(NoTriggers):
        triggered_average(recs, np.array([-0.1, 0.0, 0.1]))
    with pytest.raises(NoTriggers):
        TriggeredAverage(np.zeros(1), np.zeros(1), 0, np.zeros(1), None, np.zeros((1, 1)))


def test_tau_grid_validation():
    with pytest.raises(ValueError):
        triggered_average(_synthetic(n_rec=1), np.array([0.1, 0.0]))


def test_trigger_error_halves_with_four_times_data():
    tau = np.linspace(-0.3, 0.3, 7)
    small = triggered_average(_synthetic(n_rec=10, seed=1), tau)
    big = triggered_average(_synthetic(n_rec=40, seed=2), tau)
    ratio = np.median(small.stderr) / np.median(big.stderr)
    assert ratio == pytest.approx(2.0, rel=0.15)


def test_split_half_rms_scales_like_inverse_sqrt():
    tau = np.linspace(-0.3, 0.3, 7)
    a = split_half_rms(_synthetic(n_rec=8, seed=3), tau)
    b = split_half_rms(_synthetic(n_rec=32, seed=4), tau)
    assert a / b == pytest.approx(2.0, rel=0.5)


def test_time_average_matches_steady_state():
    cfg = replace(CFG, t_max=20.0, record_stride=8, seed=5)
    recs = run_ensemble(P, EnsembleSpec(n_traj=24, base_seed=5, cfg=cfg, warmup=2.0))
    mean, se = time_averaged_photon_number(recs, warmup=2.0)
    n_ss = expectation(jc_operators(P.trunc).n, steady_state_of(P)).real
    assert abs(mean - n_ss) < 3 * se
    m1, se1 = single_trajectory_average(recs[0], warmup=2.0)
    assert se1 > 0 and np.isfinite(m1)
    t, m, s = ensemble_mean_series(recs)
    assert t.shape == m.shape == s.shape


def test_photocurrent_required():
    rec = _synthetic(n_rec=1)[0]
    rec.photocurrent = None
    with pytest.raises(ValueError):
        triggered_average([rec], np.array([0.0]))
