"""End-to-end tests for the command-line interface: config parsing, the
canonical echo, artifact layout, determinism, and exit codes."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from translayer import ConfigError
from translayer.cli import (
    RunConfig,
    _merge_dash_values,
    echo_config,
    load_report,
    main,
    parse_config,
)

SWEEP_TEXT = """\
# a tiny but complete sweep setup
command = sweep
kind = g1d
L = 1.0
eps = 0.08,0.06,0.045,0.034
n = 256

seed = 3
"""


# ---------------------------------------------------------------------------
# config parsing and the canonical echo


def test_parse_config_roundtrips_through_echo():
    cfg = parse_config(SWEEP_TEXT)
    assert cfg.command == "sweep"
    assert cfg.params["eps"] == (0.08, 0.06, 0.045, 0.034)
    assert cfg.seed == 3
    again = parse_config(echo_config(cfg))
    assert again == cfg


def test_parse_config_reports_duplicate_lines():
    text = "command = check\nsuite = all\nsuite = extension\n"
    with pytest.raises(ConfigError, match=r"line 3: duplicate key 'suite' \(first set on line 2\)"):
        parse_config(text)


def test_parse_config_empty_file_lists_requirements():
    with pytest.raises(ConfigError, match="required keys"):
        parse_config("# nothing here\n\n")


def test_parse_config_rejects_unknown_key():
    with pytest.raises(ConfigError, match="line 2: unknown key 'bogus'"):
        parse_config("command = lift\nbogus = 3\n")


def test_parse_config_needs_a_command():
    with pytest.raises(ConfigError, match="does not set 'command'"):
        parse_config("n = 12\n")


def test_parse_config_rejects_malformed_lines():
    with pytest.raises(ConfigError, match="line 1: expected 'key = value'"):
        parse_config("command check\n")
    with pytest.raises(ConfigError, match="missing key"):
        parse_config("= check\n")


def test_run_config_validation():
    with pytest.raises(ConfigError, match="unknown command"):
        RunConfig("compute", {}, Path("."), 0, 1)
    with pytest.raises(ConfigError, match="seed"):
        RunConfig("lift", {}, Path("."), -1, 1)
    with pytest.raises(ConfigError, match="threads"):
        RunConfig("lift", {}, Path("."), 0, 0)


def test_merge_dash_values_glues_negative_tuples():
    argv = ["constant", "--which", "m", "--wells", "-1,1", "--R", "5", "--out", "run"]
    merged = _merge_dash_values(argv)
    assert "--wells=-1,1" in merged
    assert "--wells" not in merged
    assert merged.count("--R") == 1  # positive values stay split


# ---------------------------------------------------------------------------
# end-to-end commands (in-process)


def test_dry_run_echo_reparses_to_the_same_config(tmp_path, capsys):
    rc = main([
        "sweep", "--kind", "g1d", "--eps", "0.08,0.06,0.045,0.034",
        "--out", str(tmp_path), "--seed", "3", "--dry-run",
    ])
    assert rc == 0
    echoed = capsys.readouterr().out
    cfg = parse_config(echoed)
    assert cfg.command == "sweep"
    assert cfg.params["kind"] == "g1d"
    assert cfg.output_dir == tmp_path


def test_constant_command_writes_artifacts(tmp_path):
    rc = main([
        "constant", "--which", "m", "--wells", "-1,1", "--R", "4", "--n", "128",
        "--out", str(tmp_path),
    ])
    assert rc == 0
    report = load_report(tmp_path / "m.json")
    assert report["command"] == "constant"
    assert 1.9 <= report["value"] <= 2.3
    assert report["profile_path"] == "m_profile.csv"
    lines = (tmp_path / "m_profile.csv").read_text().splitlines()
    assert lines[0] == "x,f"
    assert len(lines) == 130  # header + 129 nodes


def test_config_file_with_flag_override(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("command = constant\nwhich = m\nR = 4\nn = 128\n")
    rc = main(["constant", "--config", str(path), "--n", "64", "--dry-run"])
    assert rc == 0
    cfg = parse_config(capsys.readouterr().out)
    assert cfg.params["n"] == 64
    assert cfg.params["R"] == 4.0


def test_config_file_command_mismatch(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("command = constant\nwhich = m\n")
    rc = main(["lift", "--config", str(path)])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_missing_required_flag_exits_2(tmp_path, capsys):
    rc = main(["constant", "--out", str(tmp_path)])
    assert rc == 2
    assert "which" in capsys.readouterr().err


def test_bad_flag_value_exits_2(tmp_path, capsys):
    rc = main(["constant", "--which", "bogus", "--out", str(tmp_path)])
    assert rc == 2
    assert "expected one of" in capsys.readouterr().err


def test_lift_command_reports_both_ratios(tmp_path):
    rc = main(["lift", "--n", "64", "--out", str(tmp_path), "--seed", "11"])
    assert rc == 0
    report = load_report(tmp_path / "lift.json")
    explicit = report["explicit"]["ratio"]
    sharp = report["sharp"]["ratio"]
    assert sharp <= explicit + 1e-9
    assert (tmp_path / "lift_extension.csv").exists()


def test_sweep_command_writes_ladder(tmp_path):
    rc = main([
        "sweep", "--kind", "g1d", "--eps", "0.08,0.06,0.045,0.034", "--n", "256",
        "--out", str(tmp_path), "--threads", "2",
    ])
    assert rc == 0
    report = load_report(tmp_path / "sweep.json")
    assert report["records"] == 4
    assert report["all_converged"] is True
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert rows[0].startswith("eps,lambda,L,min_energy")
    assert len(rows) == 5


def test_sweep_repeats_are_byte_identical(tmp_path):
    args = ["sweep", "--kind", "f1d", "--eps", "0.1,0.08,0.06,0.04", "--n", "256",
            "--mass", "0", "--seed", "5", "--threads", "1", "--stable-output", "true"]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main([*args, "--out", str(out_a)]) == 0
    assert main([*args, "--out", str(out_b)]) == 0
    for name in ("sweep.csv", "sweep.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_check_command_small_suite(tmp_path, capsys):
    rc = main([
        "check", "--suite", "inequalities", "--trials", "3", "--n", "64",
        "--seed", "7", "--out", str(tmp_path),
    ])
    assert rc == 0
    report = load_report(tmp_path / "check.json")
    assert report["passed"] is True
    assert all(r["passed"] for r in report["results"])
    assert "pass" in capsys.readouterr().out


def test_check_failure_exits_1(tmp_path, monkeypatch, capsys):
    import translayer.cli as cli_mod

    monkeypatch.setattr(
        cli_mod, "_suite_inequalities", lambda config: [{"name": "forced", "passed": False}]
    )
    rc = main(["check", "--suite", "inequalities", "--out", str(tmp_path)])
    assert rc == 1
    assert "FAIL" in capsys.readouterr().out
    assert load_report(tmp_path / "check.json")["passed"] is False


def test_load_report_rejects_unknown_schema(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"schema_version": "9"}))
    with pytest.raises(ConfigError, match="unsupported schema_version"):
        load_report(path)
