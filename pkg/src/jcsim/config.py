"""Flat ``key=value`` run configuration and the named operating-point presets.

Keys carry a section prefix: ``system.`` (operating point), ``unraveling.``
(measurement and integration), ``ensemble.`` (trajectory counts) and
``grid.`` (output axes).  Numeric values may be arithmetic expressions in
``pi`` and ``sqrt`` (e.g. ``theta = 3*pi/4``).  ``system.detuning_over_g``
accepts ``resonant`` for the two-photon resonance of the operating point,
and ``system.omega_over_kappa`` may replace ``system.eps_over_g``.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path

from .ensemble import EnsembleSpec
from .hilbert import SystemParams
from .minimal import resonant_detuning
from .trajectories import UnravelingConfig

SUBCOMMANDS = ("steady", "g2", "waiting-time", "spectra", "trajectory", "ensemble", "wigner", "validate")

SYSTEM_KEYS = {"g_over_kappa", "eps_over_g", "omega_over_kappa", "detuning_over_g", "gamma_over_kappa", "n_max"}
UNRAVELING_KEYS = {"r", "theta", "bandwidth", "dt", "seed", "t_max", "record_stride", "initial_state", "scheme"}
ENSEMBLE_KEYS = {"n_traj", "base_seed", "warmup", "batch_size"}
GRID_KEYS = {
    "tau_min", "tau_max", "n_tau", "omega_min", "omega_max", "n_omega", "frame", "theta", "t_snap",
    "projection", "extent", "n_points", "tau_window", "d_tau", "form",
}
STRING_KEYS = {"unraveling.initial_state", "unraveling.scheme", "grid.frame", "grid.projection", "grid.form"}
INT_KEYS = {
    "system.n_max", "unraveling.seed", "unraveling.record_stride", "ensemble.n_traj",
    "ensemble.base_seed", "ensemble.batch_size", "grid.n_tau", "grid.n_omega", "grid.n_points",
}

_FIG2 = {
    "system.g_over_kappa": "1000",
    "system.omega_over_kappa": "10/sqrt(2)",
    "system.detuning_over_g": "resonant",
    "system.n_max": "14",
    "unraveling.r": "1",
    "unraveling.initial_state": "1,-",
    "unraveling.t_max": "10",
    "grid.tau_max": "4",
}
_FIG5 = {
    "system.g_over_kappa": "200",
    "system.gamma_over_kappa": "0",
    "system.n_max": "14",
    "unraveling.r": "0.5",
    "unraveling.initial_state": "1,-",
    "unraveling.t_max": "12",
    "grid.tau_max": "3",
    "grid.omega_min": "-450",
    "grid.omega_max": "450",
}

PRESETS: dict[str, dict[str, str]] = {
    "fig2a": {**_FIG2, "system.gamma_over_kappa": "2"},
    "fig2b": {**_FIG2, "system.gamma_over_kappa": "0"},
    "fig2b-ii": {**_FIG2, "system.gamma_over_kappa": "0", "system.omega_over_kappa": "1/sqrt(2)"},
    "fig3": {**_FIG2, "system.gamma_over_kappa": "2", "system.n_max": "25", "unraveling.initial_state": "3,-",
             "unraveling.t_max": "4"},
    "fig4": {**_FIG5, "system.eps_over_g": "0.03", "system.detuning_over_g": "-0.7114", "unraveling.r": "1"},
    "fig4b": {**_FIG5, "system.eps_over_g": "0.03", "system.detuning_over_g": "-0.7114", "unraveling.r": "1"},
    "fig4c": {**_FIG5, "system.eps_over_g": "0.055", "system.detuning_over_g": "-0.7114", "unraveling.r": "1"},
    "fig4d": {**_FIG5, "system.eps_over_g": "0.16", "system.detuning_over_g": "0.545", "unraveling.r": "1"},
    "fig5a": {**_FIG5, "system.eps_over_g": "0.03", "system.detuning_over_g": "-0.7114", "unraveling.theta": "3*pi/4"},
    "fig5b": {**_FIG5, "system.eps_over_g": "0.055", "system.detuning_over_g": "-0.7114", "unraveling.theta": "pi/4"},
    "fig5c": {**_FIG5, "system.eps_over_g": "0.055", "system.detuning_over_g": "-0.7114", "unraveling.theta": "3*pi/4"},
    "fig5d": {**_FIG5, "system.eps_over_g": "0.16", "system.detuning_over_g": "0.545", "unraveling.theta": "pi/4",
              "grid.t_snap": "9.95"},
    "fig6": {**_FIG5, "system.eps_over_g": "0.03", "system.detuning_over_g": "-0.7114", "unraveling.theta": "pi/4"},
}

_OPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg, ast.UAdd: operator.pos,
}
_NAMES = {"pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": math.sqrt}


class ConfigError(ValueError):
    """Malformed or incomplete configuration; the message names the key."""


def eval_number(text: str, key: str = "") -> float:
    """Evaluate a numeric literal or a small arithmetic expression."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
            return _FUNCS[node.func.id](*[ev(a) for a in node.args])
        raise ValueError("unsupported expression")

    try:
        return float(ev(ast.parse(text.strip(), mode="eval")))
    except (SyntaxError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError(f"{key}: cannot parse {text!r} as a number ({exc})") from None


def parse_text(text: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for k, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {k}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key] = val
    return out


def _check_key(key: str):
    section, _, name = key.partition(".")
    allowed = {"system": SYSTEM_KEYS, "unraveling": UNRAVELING_KEYS, "ensemble": ENSEMBLE_KEYS, "grid": GRID_KEYS}
    if section not in allowed:
        raise ConfigError(f"{key}: unknown section {section!r} (use system., unraveling., ensemble., grid.)")
    if name not in allowed[section]:
        raise ConfigError(f"{key}: unknown key in section {section!r}")


def _value(key: str, text: str):
    if key in STRING_KEYS:
        return text
    if key == "system.detuning_over_g" and text.strip() == "resonant":
        return "resonant"
    v = eval_number(text, key)
    if key in INT_KEYS:
        if v != int(v):
            raise ConfigError(f"{key}: expected an integer, got {text!r}")
        return int(v)
    return v


@dataclass
class RunConfig:
    """Validated configuration of one CLI run."""

    subcommand: str
    params: SystemParams | None
    unraveling: UnravelingConfig | None = None
    ensemble: EnsembleSpec | None = None
    output_dir: Path = Path("out")
    format: str = "csv"
    grid: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    batch_size: int = 256

    def echo(self) -> dict:
        """Unit-tagged settings for provenance headers."""
        out = {"subcommand": self.subcommand, "format": self.format}
        if self.params is not None:
            out["system"] = self.params.as_dict()
        if self.unraveling is not None:
            out["unraveling"] = self.unraveling.as_dict()
        if self.ensemble is not None:
            out["ensemble"] = {k: v for k, v in self.ensemble.as_dict().items() if k != "cfg"}
        if self.grid:
            out["grid"] = dict(self.grid)
        return out


def build_params(values: dict) -> SystemParams:
    def need(name):
        key = "system." + name
        if key not in values:
            raise ConfigError(f"missing required key {key}")
        return values[key]

    g = need("g_over_kappa")
    if "system.eps_over_g" in values and "system.omega_over_kappa" in values:
        raise ConfigError("system.eps_over_g and system.omega_over_kappa are mutually exclusive")
    if "system.omega_over_kappa" in values:
        # Omega = 2 sqrt2 eps^2/g
        eps_over_g = math.sqrt(values["system.omega_over_kappa"] / (2.0 * math.sqrt(2.0) * g))
    else:
        eps_over_g = need("eps_over_g")
    det = need("detuning_over_g")
    if det == "resonant":
        det = resonant_detuning(g, eps_over_g * g) / g
    return SystemParams.from_ratios(
        g, eps_over_g, det, values.get("system.gamma_over_kappa", 0.0), values.get("system.n_max", 14)
    )


def parse_config(
    subcommand: str,
    config_path=None,
    preset: str | None = None,
    overrides: dict | None = None,
    output_dir=None,
    fmt: str = "csv",
) -> RunConfig:
    """Merge preset < config file < flag overrides into a :class:`RunConfig`."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    text: dict[str, str] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; available: {', '.join(PRESETS)}")
        text.update(PRESETS[preset])
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config file {path} not found")
        text.update(parse_text(path.read_text()))
    for k, v in (overrides or {}).items():
        text[k] = str(v)
    for k in text:
        _check_key(k)
    values = {k: _value(k, v) for k, v in text.items()}

    out = RunConfig(subcommand, None, output_dir=Path(output_dir or "out"), format=fmt, raw=dict(text))
    if subcommand == "validate":
        return out
    try:
        out.params = build_params(values)
        unr = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith("unraveling.")}
        if subcommand in ("trajectory", "ensemble") and "r" not in unr:
            raise ConfigError("missing required key unraveling.r")
        out.unraveling = UnravelingConfig(**unr)
        if subcommand == "ensemble":
            ens = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith("ensemble.")}
            if "n_traj" not in ens:
                raise ConfigError("missing required key ensemble.n_traj")
            out.batch_size = int(ens.pop("batch_size", 256))
            out.ensemble = EnsembleSpec(cfg=out.unraveling, **ens)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    out.grid = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith("grid.")}
    return out


__all__ = ["RunConfig", "ConfigError", "PRESETS", "SUBCOMMANDS", "parse_config", "parse_text", "eval_number", "build_params"]
