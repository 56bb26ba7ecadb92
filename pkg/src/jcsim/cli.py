"""Command-line entry point: ``jcsim <subcommand> [options]``.

Exit codes: 0 success, 2 acceptance failure (``validate``), 1 any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import PRESETS, SUBCOMMANDS, ConfigError, RunConfig, parse_config
from .errors import JCSimError
from .io import provenance, write_csv, write_json, write_matrix_csv


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jcsim", description="Driven JC source: master equation, correlators, trajectories.")
    ap.add_argument("--version", action="version", version=f"jcsim {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key=value configuration file")
        sp.add_argument("--preset", choices=sorted(PRESETS), help="named operating point")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--seed", type=int, help="base seed for trajectories")
        sp.add_argument("--n-max", type=int, dest="n_max", help="photon-number cutoff")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
        if name == "validate":
            sp.add_argument("--only", help="comma-separated criterion numbers")
            sp.add_argument("--override", action="append", default=[], metavar="N.NAME=VALUE",
                            help="override a criterion keyword, e.g. 2.target=3.0")
    return ap


def _overrides(args) -> dict:
    out = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    if args.seed is not None:
        out["unraveling.seed"] = str(args.seed)
        if args.subcommand == "ensemble":
            out["ensemble.base_seed"] = str(args.seed)
    if args.n_max is not None:
        out["system.n_max"] = str(args.n_max)
    return out


def _emit(rc: RunConfig, stem: str, columns: dict, method: str, **extra) -> Path:
    head = provenance(rc.echo(), seed=rc.unraveling.seed if rc.unraveling else None, method=method, **extra)
    if rc.format == "json":
        return write_json(rc.output_dir / f"{stem}.json", columns, head)
    return write_csv(rc.output_dir / f"{stem}.csv", columns, head)


def _axis(grid: dict, lo_key: str, hi_key: str, n_key: str, lo: float, hi: float, n: int) -> np.ndarray:
    return np.linspace(grid.get(lo_key, lo), grid.get(hi_key, hi), int(grid.get(n_key, n)))


def cmd_steady(rc: RunConfig) -> list[Path]:
    from .correlators import g2
    from .hilbert import expectation, jc_operators, partial_trace_atom
    from .liouvillian import steady_state_of

    p = rc.params
    rho = steady_state_of(p)
    ops = jc_operators(p.trunc)
    alpha = expectation(ops.a, rho)
    scalars = {
        "photon_number": float(expectation(ops.n, rho).real),
        "excited_population": float(expectation(ops.sp_sm, rho).real),
        "field_re": float(alpha.real),
        "field_im": float(alpha.imag),
        "g2_0": float(np.real(g2(p, [0.0]).values[0])),
        "purity": float(np.real(np.trace(rho @ rho))),
    }
    dist = np.real(np.diag(partial_trace_atom(rho)))
    path = _emit(rc, "steady", {"n": np.arange(dist.size), "probability": dist}, "steady-state", scalars=scalars)
    print(json.dumps(scalars, indent=1))
    return [path]


def cmd_g2(rc: RunConfig) -> list[Path]:
    from .correlators import g2

    tau = _axis(rc.grid, "tau_min", "tau_max", "n_tau", 0.0, rc.grid.get("tau_max", 3.0), 3001)
    s = g2(rc.params, tau)
    return [_emit(rc, "g2", {"tau": tau, "g2": np.real(s.values)}, "regression-modal", n_ss=s.meta.get("n_ss"))]


def cmd_waiting_time(rc: RunConfig) -> list[Path]:
    from .correlators import waiting_time
    from .minimal import derive_params, waiting_time_analytic

    p = rc.params
    tau = _axis(rc.grid, "tau_min", "tau_max", "n_tau", 0.0, rc.grid.get("tau_max", 4.0), 20001)
    cols = {"tau": tau, "w_numeric": np.real(waiting_time(p, tau).values)}
    extra = {}
    if p.gamma == 0.0:
        form = rc.grid.get("form", "derived")
        mm = derive_params(p)
        cols["w_minimal"] = np.real(waiting_time_analytic(mm, tau, form).values)
        extra = {"minimal_form": form, "minimal": mm.as_dict()}
    return [_emit(rc, "waiting_time", cols, "regression-modal", **extra)]


def cmd_spectra(rc: RunConfig) -> list[Path]:
    from .correlators import squeezing_spectrum, transmission_spectrum
    from .minimal import derive_params, squeezing_spectrum_analytic, transmission_spectrum_analytic

    p = rc.params
    theta = rc.grid.get("theta", rc.unraveling.theta if rc.unraveling else np.pi / 4)
    omega = _axis(rc.grid, "omega_min", "omega_max", "n_omega", -3 * p.g, 3 * p.g, 12001)
    frame = rc.grid.get("frame", "resonance")
    sq = squeezing_spectrum(p, theta, omega, frame=frame)
    tr = transmission_spectrum(p, omega)
    cols = {"omega": omega, "squeezing": np.real(sq.values), "transmission": np.real(tr.values)}
    mm = derive_params(p)
    w_lo = omega - p.delta_omega_d if frame == "resonance" else omega
    cols["squeezing_minimal"] = np.real(squeezing_spectrum_analytic(mm, theta, w_lo).values)
    cols["transmission_minimal"] = np.real(transmission_spectrum_analytic(mm, omega).values)
    return [_emit(rc, "spectra", cols, "regression-laplace", theta=theta, frame=frame,
                  coherent_fraction=tr.meta.get("coherent_fraction"))]


def cmd_trajectory(rc: RunConfig) -> list[Path]:
    from .trajectories import run_batch

    rec = run_batch(rc.params, rc.unraveling, [0])[0]
    cols = {"t": rec.times, "photon_number": rec.cond_photon_number, "quadrature": rec.cond_quadrature}
    if rec.photocurrent is not None:
        cols["photocurrent"] = rec.photocurrent
    paths = [_emit(rc, "trajectory", cols, f"trajectory-{rc.unraveling.scheme}", dt=rec.meta["dt"])]
    jt = np.array([t for t, _ in rec.jumps])
    ch = np.array([0.0 if c == "cavity_APD" else 1.0 for _, c in rec.jumps])
    paths.append(_emit(rc, "jumps", {"t": jt, "channel": ch}, "trajectory-jumps",
                       channels={"0": "cavity_APD", "1": "spontaneous"}))
    return paths


def cmd_ensemble(rc: RunConfig) -> list[Path]:
    from .ensemble import ensemble_mean_series, run_ensemble, triggered_average

    spec = rc.ensemble
    recs = run_ensemble(rc.params, spec, batch_size=rc.batch_size)
    t, mean, se = ensemble_mean_series(recs)
    paths = [_emit(rc, "ensemble_mean", {"t": t, "photon_number": mean, "stderr": se}, "ensemble-mean")]
    if 0.0 < rc.unraveling.r < 1.0:
        w = rc.grid.get("tau_window", 1.5)
        step = rc.grid.get("d_tau", 0.05)
        tau = np.round(np.arange(-w, w + step / 2, step), 12)
        ta = triggered_average(recs, tau, warmup=spec.warmup)
        cols = {"tau": tau, "H": ta.H_values, "stderr": ta.stderr}
        if ta.h_normalized is not None:
            cols["H_normalized"] = ta.h_normalized
        paths.append(_emit(rc, "triggered_average", cols, "triggered-average",
                           n_triggers=ta.n_triggers, meta=ta.meta))
    manifest = {
        "spec": spec.as_dict(),
        "trajectories": [{"index": r.index, "seed": r.seed, "n_jumps": len(r.jumps)} for r in recs],
        "files": [str(pth) for pth in paths],
    }
    paths.append(write_json(rc.output_dir / "manifest.json", manifest, provenance(rc.echo(), spec.base_seed, "manifest")))
    return paths


def cmd_wigner(rc: RunConfig) -> list[Path]:
    from .hilbert import atom_block, partial_trace_atom
    from .liouvillian import steady_state_of
    from .trajectories import conditioned_wigner_snapshot
    from .wigner import wigner_transform

    grid_kw = {k: rc.grid[k] for k in ("extent", "n_points") if k in rc.grid}
    proj = rc.grid.get("projection")
    if "t_snap" in rc.grid:
        wg = conditioned_wigner_snapshot(rc.params, rc.unraveling, rc.grid["t_snap"], projection=proj, **grid_kw)
        method = "wigner-conditioned"
    else:
        rho = steady_state_of(rc.params)
        cav = partial_trace_atom(rho) if proj is None else atom_block(rho, 0 if proj == "-" else 1)
        wg = wigner_transform(cav, **grid_kw)
        method = "wigner-steady"
    head = provenance(rc.echo(), rc.unraveling.seed if rc.unraveling else None, method,
                      convention=wg.convention, x_grid=wg.x_grid, p_grid=wg.p_grid, meta=wg.meta)
    if rc.format == "json":
        return [write_json(rc.output_dir / "wigner.json", {"x": wg.x_grid, "p": wg.p_grid, "W": wg.values}, head)]
    return [
        write_matrix_csv(rc.output_dir / "wigner.csv", wg.values, head),
        write_json(rc.output_dir / "wigner_axes.json", {"x": wg.x_grid, "p": wg.p_grid,
                                                         "convention": wg.convention}, head),
    ]


def cmd_validate(rc: RunConfig, only=None, overrides=None) -> tuple[list[Path], bool]:
    from .acceptance import run_acceptance

    results = run_acceptance(only=only, overrides=overrides, stream=sys.stdout)
    report = [r.as_dict() for r in results]
    path = write_json(rc.output_dir / "validation.json", {"criteria": report}, provenance(None, None, "acceptance"))
    return [path], all(r.passed for r in results)


def _parse_validate(args) -> tuple[list[int] | None, dict]:
    only = [int(x) for x in args.only.split(",")] if args.only else None
    ov: dict[int, dict] = {}
    for item in args.override:
        key, _, val = item.partition("=")
        num, _, name = key.partition(".")
        if not (num.isdigit() and name and val):
            raise ConfigError(f"--override expects N.NAME=VALUE, got {item!r}")
        ov.setdefault(int(num), {})[name] = float(val)
    return only, ov


HANDLERS = {
    "steady": cmd_steady, "g2": cmd_g2, "waiting-time": cmd_waiting_time, "spectra": cmd_spectra,
    "trajectory": cmd_trajectory, "ensemble": cmd_ensemble, "wigner": cmd_wigner,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        rc = parse_config(args.subcommand, args.config, args.preset, _overrides(args), args.out, args.format)
        if args.subcommand == "validate":
            only, ov = _parse_validate(args)
            paths, ok = cmd_validate(rc, only, ov)
            for pth in paths:
                print(pth)
            return 0 if ok else 2
        for pth in HANDLERS[args.subcommand](rc):
            print(pth)
        return 0
    except (ConfigError, JCSimError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
