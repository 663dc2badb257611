import json
import subprocess
import sys

import pytest

from cogpilot.cli import CliCommand, apply_override, main, parse_args, run
from cogpilot.errors import ConfigurationError
from cogpilot.experiments import CSV_COLUMNS, read_report


@pytest.fixture
def config(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({
        "M": 4, "num_cognitive_users": 5, "reuse_count": 2,
        "snr_grid_db": [10], "trials": 200, "drops": 2, "seed": 3,
    }))
    return str(p)


def test_parse_sweep():
    cmd = parse_args(["sweep", "--config", "s.json", "--out", "r.csv"])
    assert (cmd.verb, cmd.config_path, cmd.output_path) == ("sweep", "s.json", "r.csv")
    assert cmd.report_format == "csv"


def test_parse_overrides_and_stdout():
    cmd = parse_args(["sweep", "--config", "s.json", "--set", "trials=100", "--out", "-"])
    assert cmd.overrides == ["trials=100"]
    assert cmd.output_path == "-"


def test_format_inferred_from_suffix():
    assert parse_args(["sweep", "--config", "c", "--out", "r.JSON"]).report_format == "json"
    assert parse_args(["sweep", "--config", "c", "--out", "r.json", "--format", "csv"]).report_format == "csv"


@pytest.mark.parametrize("argv", [["sweep"], ["sweep", "--config", "c", "--bogus"], ["frobnicate"], []])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        parse_args(argv)
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err
    assert main(argv) == 2


def test_unknown_verb_in_command():
    with pytest.raises(ConfigurationError):
        CliCommand("plot", "c.json")


def test_dotted_override():
    data = {"trials": 5}
    apply_override(data, "cmmse.contamination_threshold=0.5")
    apply_override(data, "cmmse.filter_power_budget=4")
    apply_override(data, "allocators=[\"HPA\"]")
    apply_override(data, "spread_law=gaussian")
    assert data == {"trials": 5, "cmmse": {"contamination_threshold": 0.5, "filter_power_budget": 4},
                    "allocators": ["HPA"], "spread_law": "gaussian"}
    with pytest.raises(ConfigurationError):
        apply_override(data, "trials")
    with pytest.raises(ConfigurationError):
        apply_override(data, "trials.x=1")


def test_sweep_to_file(config, tmp_path):
    out = tmp_path / "r.csv"
    assert main(["sweep", "--config", config, "--out", str(out), "--set", "trials=50"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + 4
    assert read_report(out).rows[0].trials == 100


def test_sweep_json_and_seed(config, tmp_path):
    out = tmp_path / "r.json"
    assert main(["sweep", "--config", config, "--out", str(out), "--seed", "9", "--trials", "20"]) == 0
    data = json.loads(out.read_text())
    assert data["provenance"]["seed"] == 9
    assert data["provenance"]["config"]["trials"] == 20


def test_sweep_stdout_is_reproducible(config, capsys):
    main(["sweep", "--config", config, "--out", "-"])
    first = capsys.readouterr().out
    main(["sweep", "--config", config, "--out", "-", "--workers", "2"])
    assert capsys.readouterr().out == first


def test_validate(config, capsys):
    assert main(["validate", "--config", config]) == 0
    assert "all invariants hold" in capsys.readouterr().out


def test_oracle(config, capsys):
    code = main(["oracle", "--config", config, "--trials", "100000", "--set", "allocators=[\"HPA\"]"])
    out = capsys.readouterr().out
    errs = [float(line.split("rel_err")[1]) for line in out.splitlines() if "rel_err" in line]
    assert code == 0
    assert len(errs) == 4 and max(errs) < 0.02


def test_allocate_toy_prefers_orthogonal_user(tmp_path, capsys):
    # M = 4 at half-wavelength spacing: broadside and sin(theta) = 0.5 are orthogonal
    cfg = {
        "M": 4, "num_cognitive_users": 2, "reuse_count": 1, "snr_grid_db": [20],
        "sector_width_deg": 1.0, "sector_overlap_deg": 0.0,
        "pbs_angles_deg": [0.0, 0.0, 30.0], "cbs_angles_deg": [0.0, -30.0, 30.0],
        "allocators": ["MPA"],
    }
    p = tmp_path / "toy.json"
    p.write_text(json.dumps(cfg))
    assert main(["allocate", "--config", str(p)]) == 0
    out = capsys.readouterr().out
    assert "MPA: 2" in out
    assert "pool: [2" in out


def test_config_errors_exit_2(config, tmp_path, capsys):
    assert main(["sweep", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["sweep", "--config", config, "--set", "M=0"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["validate", "--config", str(bad)]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_numerical_failure_exits_1(config, monkeypatch):
    from cogpilot import cli
    from cogpilot.errors import ConvergenceError

    def boom(cfg):
        raise ConvergenceError("no bracket", bracket=(0.0, 1.0))

    monkeypatch.setattr(cli, "sweep", boom)
    assert run(parse_args(["sweep", "--config", config])) == 1


def test_module_entry_point(config):
    res = subprocess.run([sys.executable, "-m", "cogpilot", "validate", "--config", config],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "all invariants hold" in res.stdout
