from __future__ import annotations

import json
import math

import numpy as np
import pytest

from jcsim.cli import main
from jcsim.config import PRESETS, ConfigError, eval_number, parse_config, parse_text
from jcsim.io import provenance, read_csv, write_csv, write_json


def test_csv_roundtrip(tmp_path):
    cols = {"t": np.linspace(0, 1, 5), "z": np.exp(1j * np.arange(5))}
    head = provenance({"g": 1.0}, seed=3, method="unit", extra=np.float64(2.5))
    path = write_csv(tmp_path / "x.csv", cols, head)
    header, data = read_csv(path)
    assert header["seed"] == 3 and header["method"] == "unit" and header["extra"] == 2.5
    assert set(data) == {"t", "z_re", "z_im"}
    assert np.allclose(data["z_re"] + 1j * data["z_im"], cols["z"], atol=1e-11)
    with pytest.raises(ValueError):
        write_csv(tmp_path / "bad.csv", {"a": [1, 2], "b": [1]}, head)


def test_json_payload(tmp_path):
    path = write_json(tmp_path / "x.json", {"v": np.array([1 + 2j])}, provenance(method="m"))
    doc = json.loads(path.read_text())
    assert doc["data"]["v"] == [{"re": 1.0, "im": 2.0}]
    assert doc["header"]["code"] == "jcsim"


def test_number_expressions():
    assert eval_number("3*pi/4") == pytest.approx(3 * math.pi / 4)
    assert eval_number("10/sqrt(2)") == pytest.approx(10 / math.sqrt(2))
    with pytest.raises(ConfigError):
        eval_number("__import__('os')", "k")


def test_parse_text_comments_and_errors():
    assert parse_text("a.b = 1  # c\n\n# only\n") == {"a.b": "1"}
    with pytest.raises(ConfigError):
        parse_text("nonsense")


def test_preset_fig2b_expansion():
    rc = parse_config("steady", preset="fig2b")
    p = rc.params
    assert p.g == 1000 and p.gamma == 0.0
    omega = 2 * math.sqrt(2) * p.eps_d**2 / p.g
    assert omega == pytest.approx(10 / math.sqrt(2))
    assert p.delta_omega_d == pytest.approx(-p.g / math.sqrt(2) - math.sqrt(2) * p.eps_d**2 / p.g)


def test_preset_fig5a_expansion():
    rc = parse_config("trajectory", preset="fig5a")
    p, u = rc.params, rc.unraveling
    assert p.g == 200 and p.eps_over_g == pytest.approx(0.03) and p.detuning_over_g == pytest.approx(-0.7114)
    assert p.gamma == 0.0 and p.n_max == 14
    assert u.r == 0.5 and u.theta == pytest.approx(3 * math.pi / 4)
    assert set(PRESETS) >= {"fig2a", "fig2b", "fig3", "fig4", "fig5a", "fig5b", "fig5c", "fig5d", "fig6"}


def test_precedence_file_then_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("system.g_over_kappa = 50\nsystem.eps_over_g = 0.02\n")
    rc = parse_config("steady", cfg, preset="fig5a", overrides={"system.eps_over_g": "0.04"})
    assert rc.params.g == 50 and rc.params.eps_over_g == pytest.approx(0.04)
    assert rc.echo()["system"]["g"] == 50


@pytest.mark.parametrize(
    "sub, values, missing",
    [
        ("steady", {"system.eps_over_g": "0.1", "system.detuning_over_g": "0"}, "system.g_over_kappa"),
        ("steady", {"system.g_over_kappa": "10", "system.detuning_over_g": "0"}, "system.eps_over_g"),
        ("trajectory", {"system.g_over_kappa": "10", "system.eps_over_g": "0.1", "system.detuning_over_g": "0"},
         "unraveling.r"),
        ("ensemble", {"system.g_over_kappa": "10", "system.eps_over_g": "0.1", "system.detuning_over_g": "0",
                      "unraveling.r": "0.5"}, "ensemble.n_traj"),
    ],
)
def test_missing_required_key_is_named(sub, values, missing):
    with pytest.raises(ConfigError, match=missing):
        parse_config(sub, overrides=values)


def test_unknown_key_and_bad_int():
    with pytest.raises(ConfigError, match="unknown"):
        parse_config("steady", preset="fig2b", overrides={"system.foo": "1"})
    with pytest.raises(ConfigError, match="integer"):
        parse_config("steady", preset="fig2b", overrides={"system.n_max": "3.5"})


SMALL = ["--set", "system.g_over_kappa=20", "--set", "system.eps_over_g=0.1",
         "--set", "system.detuning_over_g=-0.7", "--n-max", "5"]


def _strip_created(text: str) -> str:
    return "\n".join(line for line in text.splitlines() if not line.startswith("# created"))


def test_cli_outputs_identical_apart_from_timestamp(tmp_path, capsys):
    for k in (1, 2):
        assert main(["g2", "--out", str(tmp_path / f"r{k}"), "--set", "grid.n_tau=51", *SMALL]) == 0
    a = (tmp_path / "r1" / "g2.csv").read_text()
    b = (tmp_path / "r2" / "g2.csv").read_text()
    assert _strip_created(a) == _strip_created(b)
    assert "# created" in a


def test_cli_trajectory_reproducible(tmp_path, capsys):
    args = ["trajectory", "--seed", "4", "--set", "unraveling.r=0.5", "--set", "unraveling.t_max=0.3", *SMALL]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b")]) == 0
    for name in ("trajectory.csv", "jumps.csv"):
        assert _strip_created((tmp_path / "a" / name).read_text()) == _strip_created((tmp_path / "b" / name).read_text())
    header, cols = read_csv(tmp_path / "a" / "trajectory.csv")
    assert header["seed"] == 4 and "photocurrent" in cols


@pytest.mark.parametrize("sub", ["steady", "waiting-time", "spectra", "wigner"])
def test_cli_subcommands_run(tmp_path, capsys, sub):
    extra = ["--set", "grid.n_omega=101"] if sub == "spectra" else []
    extra += ["--set", "grid.n_points=41"] if sub == "wigner" else []
    assert main([sub, "--out", str(tmp_path), "--format", "json", *SMALL, *extra]) == 0
    assert any(tmp_path.iterdir())


def test_cli_ensemble_writes_manifest(tmp_path, capsys):
    args = ["ensemble", "--out", str(tmp_path), "--set", "unraveling.r=0.5", "--set", "unraveling.t_max=3",
            "--set", "ensemble.n_traj=4", "--set", "grid.tau_window=0.2", *SMALL]
    assert main(args) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert [t["index"] for t in manifest["data"]["trajectories"]] == [0, 1, 2, 3]
    assert (tmp_path / "triggered_average.csv").exists()


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["steady", "--out", str(tmp_path), "--set", "system.g_over_kappa=20"]) == 1
    assert "system." in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["bogus"])


def test_cli_validate_negative_control(tmp_path, capsys):
    code = main(["validate", "--out", str(tmp_path), "--only", "2", "--override", "2.target=3.0"])
    assert code == 2
    doc = json.loads((tmp_path / "validation.json").read_text())
    assert doc["data"]["criteria"][0]["passed"] is False
    assert main(["validate", "--out", str(tmp_path), "--only", "2"]) == 0
