"""Exit codes, output control, and subcommand behavior of the CLI."""

import json
import subprocess
import sys

import pytest

import quasiband as qb
from quasiband import cli


def write_config(tmp_path, **over):
    data = {
        "mode": "verify",
        "graph": {"builtin": "z1"},
        "potential": {"inline": {
            "omega": 6.0,
            "sites": [{"index": [1], "coeffs": [{"k": 0, "re": -2.6}]}],
        }},
        "truncation": {"radius": 20, "modes": 3, "half_line": True},
        "bounds": {"variants": ["cor42"]},
        "verify": {"omega": 6.0},
        "convergence": {"enabled": False},
        "periodicity": {"enabled": False},
    }
    data.update(over)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_verify_clean_run_exits_zero(tmp_path, capsys):
    code = cli.main(["verify", "--config", write_config(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "[cor42.total] window=gap count=1" in out
    assert "-> satisfied" in out
    assert "verify: 1 instance(s), 0 violation(s)" in out


def test_verify_violation_exits_two(tmp_path, capsys):
    path = write_config(tmp_path, runtime={"bound_scale": 0.0})
    code = cli.main(["verify", "--config", path])
    out = capsys.readouterr().out
    assert code == 2
    assert "VIOLATED" in out


def test_missing_config_exits_three(tmp_path, capsys):
    code = cli.main(["verify", "--config", str(tmp_path / "nope.toml")])
    err = capsys.readouterr().err
    assert code == 3
    assert "config error" in err


def test_bad_usage_exits_three(capsys):
    assert cli.main(["frobnicate"]) == 3
    assert cli.main(["verify"]) == 3  # missing required --config
    assert cli.main(["bands", "not-a-graph.xyz"]) == 3
    assert "config error" in capsys.readouterr().err


def test_numerical_failure_exits_four(tmp_path, capsys, monkeypatch):
    def boom(cfg, with_bounds=True):
        raise qb.EigensolveError("synthetic failure")

    monkeypatch.setattr(cli, "run_verify", boom)
    code = cli.main(["verify", "--config", write_config(tmp_path)])
    err = capsys.readouterr().err
    assert code == 4
    assert "numerical failure" in err


def test_bands_builtin(tmp_path, capsys):
    out_path = tmp_path / "bands.json"
    code = cli.main(["bands", "z1", "--grid", "64", "--out", str(out_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "z1: dim=1 bands=1 s_top=4" in out
    assert "top=regular" in out
    report = json.loads(out_path.read_text())
    assert report["entries"][0]["s_top"] == 4.0


def test_bands_graph_json(tmp_path, capsys):
    gpath = tmp_path / "graph.json"
    qb.save_graph(qb.build_hypercubic(1), gpath)
    code = cli.main(["bands", str(gpath), "--grid", "32"])
    out = capsys.readouterr().out
    assert code == 0
    assert "s_top=4" in out


def test_bands_config_writes_declared_output(tmp_path, capsys):
    out_json = tmp_path / "survey.json"
    cfg = {
        "mode": "bands",
        "bands": {"graphs": ["z1"], "grid": 32},
        "output": {"json": str(out_json)},
    }
    path = tmp_path / "bands_cfg.json"
    path.write_text(json.dumps(cfg))
    code = cli.main(["bands", str(path)])
    assert code == 0
    assert out_json.exists()
    assert f"wrote {out_json}" in capsys.readouterr().out


def test_verify_bound_override(tmp_path, capsys):
    path = write_config(tmp_path, bounds={"variants": []})
    code = cli.main(["verify", "--config", path, "--bound", "cor42"])
    out = capsys.readouterr().out
    assert code == 0
    assert "cor42.total" in out
    # strip variants still need their coupling constant
    assert cli.main(["verify", "--config", path, "--bound", "cor43"]) == 3
    assert "coupling_c" in capsys.readouterr().err


def test_verify_output_overrides(tmp_path, capsys):
    jpath = tmp_path / "r.json"
    cpath = tmp_path / "r.csv"
    code = cli.main([
        "verify", "--config", write_config(tmp_path),
        "--json", str(jpath), "--csv", str(cpath),
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert jpath.exists() and cpath.exists()
    assert f"wrote {jpath}" in out
    report = json.loads(jpath.read_text())
    assert report["kind"] == "verify"


def test_count_subcommand(tmp_path, capsys):
    code = cli.main(["count", "--config", write_config(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "count: 1 instance(s), 0 violation(s)" in out


def test_sweep_subcommand(tmp_path, capsys):
    path = write_config(
        tmp_path, mode="sweep",
        sweep={"omega": [6.0], "amplitude": [0.5, 1.0]},
    )
    code = cli.main(["sweep", "--config", path, "--workers", "2"])
    out = capsys.readouterr().out
    assert code == 0
    assert "sweep: 2 instance(s), 0 violation(s)" in out


def test_bargmann_subcommand(tmp_path, capsys):
    path = tmp_path / "b.json"
    path.write_text(json.dumps({
        "mode": "bargmann",
        "bargmann": {"instances": 4, "radius": 60, "max_site": 5, "seed": 3},
    }))
    code = cli.main(["bargmann", "--config", str(path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "bargmann: 4 instance(s), 0 violation(s)" in out
    assert "unconverged" not in out


def test_calibrate_subcommand(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({
        "mode": "calibrate",
        "calibrate": {"dim": 1, "radii": [40], "wells": [-3.0]},
    }))
    code = cli.main(["calibrate", "--config", str(path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "calibrate: empirical ratio" in out


def test_module_entry_point(tmp_path):
    # the installed package runs as python -m quasiband
    path = write_config(tmp_path, runtime={"bound_scale": 0.0})
    proc = subprocess.run(
        [sys.executable, "-m", "quasiband", "verify", "--config", path],
        capture_output=True, text=True, timeout=300,
    )
    assert proc.returncode == 2
    assert "VIOLATED" in proc.stdout
