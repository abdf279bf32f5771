"""The ``rarefaction`` command: exit codes, manifests and round trips."""
import json

import numpy as np
import pytest

from rarefaction.cli import (ConfigError, OutputFormatError, RunConfig, load_config, main,
                             read_csv, read_grid, write_csv)


def manifest(root, sub):
    return json.loads((root / sub / "manifest.json").read_text())


def test_riemann1d(tmp_path):
    assert main(["riemann1d", "--out", "fan", "--n", "11"]) == 0
    m = manifest(tmp_path, "fan")
    assert m["results"]["dv_dxi"] == pytest.approx(2 / 2.4, abs=1e-8)
    cols = read_csv(tmp_path / "fan" / "fan.csv", ["xi", "c", "v", "w", "wbar"])
    assert len(cols["xi"]) == 11


def test_default_evolve_preserves_constant_state(tmp_path):
    assert main(["evolve"]) == 0
    res = manifest(tmp_path, "out")["results"]
    assert res["max_drift"] <= 1e-10
    assert max(res["residuals"]["max"].values()) <= 1e-10


def test_evolve_is_deterministic(tmp_path):
    args = ["evolve", "--initial", "taylor", "--background", "perturbed", "--t-end", "1.3",
            "--nu", "10", "--u-star", "0.05", "--delta", "1e-2"]
    assert main(args + ["--out", "a"]) == 0
    assert main(args + ["--out", "b"]) == 0
    for name in ("grid.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_grid_round_trip(tmp_path):
    assert main(["evolve", "--initial", "taylor", "--t-end", "1.2", "--nu", "8",
                 "--u-star", "0.05", "--delta", "1e-2", "--commute", "3", "--out", "g"]) == 0
    grid = read_grid(tmp_path / "g")
    assert grid.towers is not None and grid.towers["w"].shape[1] == 4
    assert main(["diagnose", "g", "--energy", "global", "--residuals"]) == 0
    res = manifest(tmp_path, "g/diagnose")["results"]
    assert np.isfinite(res["energy"]["fits"]["sup_E"])


def test_config_file_and_override(tmp_path):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text('[eos]\ngamma = 1.6\n[evolve]\nnu = 12\nt_end = 1.1\n')
    cfg = load_config(str(cfg_file), {"nu": 14})
    assert (cfg.gamma, cfg.nu, cfg.t_end) == (1.6, 14, 1.1)
    with pytest.raises(ConfigError):
        bad = tmp_path / "bad.toml"
        bad.write_text("[evolve]\nwhatever = 1\n")
        load_config(str(bad), {})


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(gamma=0.9).validate()
    with pytest.raises(ValueError):
        RunConfig(u_star=100.0).validate()


def test_exit_codes(tmp_path):
    assert main(["evolve", "--gamma", "0.5"]) == 1
    assert main(["diagnose", "missing-run", "--residuals"]) == 3
    # kappa growth needs a long run: numerical failure
    assert main(["evolve", "--out", "short", "--t-end", "1.1"]) == 0
    assert main(["diagnose", "short", "--kappa"]) == 2


def test_csv_read_back_checks_header(tmp_path):
    p = tmp_path / "x.csv"
    write_csv(p, {"a": np.arange(3.0), "b": np.ones(3)})
    assert np.array_equal(read_csv(p, ["a", "b"])["a"], np.arange(3.0))
    with pytest.raises(OutputFormatError):
        read_csv(p, ["a", "c"])


def test_verify_integral(tmp_path, capsys):
    assert main(["verify", "integral"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_boundary_manifest(tmp_path):
    assert main(["boundary", "--order", "2", "--t-end", "10", "--out", "bd"]) == 0
    res = manifest(tmp_path, "bd")["results"]
    assert max(res["oracle_max_rel_err"].values()) <= 1e-6
    assert res["vanishing_orders"]["Tw"] == "exact zero"
