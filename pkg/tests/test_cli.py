# tests/test_cli.py
import hashlib
import json
from importlib.resources import files
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from syncgain.cli import STARTERS, main
from syncgain.io import load_gain

STARTERS_PATH = files("syncgain") / "templates" / "starters"

OSCILLATOR = '{"A": [[0.0, 1.0], [-1.0, 0.0]], "C": [[0.0, 1.0]]}'
DOUBLE_INTEGRATOR = '{"A": [[0.0, 1.0], [0.0, 0.0]], "C": [[1.0, 0.0]]}'


def invoke(*args: str):
    return CliRunner().invoke(main, [str(a) for a in args])


### init / validate ###


def test_init_blank(tmp_path: Path) -> None:
    target = tmp_path / "run"
    result = invoke("init", target, "--starter", "blank")
    assert result.exit_code == 0, result.output
    assert (target / "config.toml").exists()
    result = invoke("validate", target / "config.toml")
    assert result.exit_code == 0, result.output


@pytest.mark.parametrize("starter", STARTERS)
def test_init_starter(starter: str, tmp_path: Path) -> None:
    target = tmp_path / "run"
    result = invoke("init", target, "--starter", starter)
    assert result.exit_code == 0, result.output
    assert (target / "config.toml").exists()
    if starter == "counterexample_g":
        assert (target / "gain.json").exists()


def test_init_refuses_existing_config(tmp_path: Path) -> None:
    (tmp_path / "config.toml").write_text("")
    result = invoke("init", tmp_path, "--starter", "blank")
    assert result.exit_code == 2
    assert "already exists" in result.output


@pytest.mark.parametrize("starter", STARTERS)
def test_validate_starter(starter: str) -> None:
    config = STARTERS_PATH / starter / "config.toml"
    result = invoke("validate", config)
    assert result.exit_code == 0, result.output
    assert "All files valid." in result.output


def test_validate_reports_bad_pair(tmp_path: Path) -> None:
    (tmp_path / "config.toml").write_text(
        "[pair]\nA = [[1.0, 0.0]]\nC = [[1.0]]\n"
    )
    result = invoke("validate", tmp_path / "config.toml")
    assert result.exit_code == 2
    assert "[x]" in result.output


@pytest.mark.parametrize("starter", STARTERS)
def test_simulate_starter(starter: str, tmp_path: Path) -> None:
    config = STARTERS_PATH / starter / "config.toml"
    result = invoke("simulate", "--config", config, "--out", tmp_path)
    assert result.exit_code == 0, result.output
    assert (tmp_path / "summary.json").exists()
    summary = json.loads((tmp_path / "summary.json").read_text())
    if starter == "counterexample_g":
        assert summary["final_sync_error"] > summary["initial_sync_error"]


### classify / synthesize ###


@pytest.mark.parametrize(
    "pair, member, outside",
    [
        (DOUBLE_INTEGRATOR, ["A_J", "O_P"], ["A_N", "O_F"]),
        ('{"A": [[0.0]], "C": [[1.0]]}', ["A_N", "O_F"], ["A_H"]),
        ('{"A": [[0.0]], "C": [[0.0]]}', ["A_N"], ["O_F", "O_P"]),
    ],
)
def test_classify_flags(
    pair: str, member: list, outside: list, tmp_path: Path
) -> None:
    result = invoke("classify", "--pair", pair, "--out", tmp_path)
    assert result.exit_code == 0, result.output
    flags = json.loads((tmp_path / "classification.json").read_text())[
        "flags"
    ]
    assert all(flags[name] for name in member)
    assert not any(flags[name] for name in outside)


def test_classify_needs_pair() -> None:
    result = invoke("classify")
    assert result.exit_code == 2
    assert "No pair given" in result.output


def test_malformed_pair_is_usage_error() -> None:
    result = invoke("classify", "--pair", '{"A": [[1.0, 2.0]], "C": [[1]]}')
    assert result.exit_code == 2


def test_negative_tolerance_is_usage_error() -> None:
    result = invoke("classify", "--pair", OSCILLATOR, "--tol-eig", "-1")
    assert result.exit_code == 2


def test_synthesize_algorithm1(tmp_path: Path) -> None:
    result = invoke("synthesize", "--pair", OSCILLATOR, "--out", tmp_path)
    assert result.exit_code == 0, result.output
    assert "algorithm1: guarantee G>0" in result.output
    gain = load_gain(tmp_path / "gain.json")
    assert np.allclose(gain.L, [[0.0], [1.0]], atol=1e-6)


def test_synthesize_riccati_with_delta() -> None:
    result = invoke("synthesize", "--pair", DOUBLE_INTEGRATOR, "--delta", 1)
    assert result.exit_code == 0, result.output
    assert "riccati_delta: guarantee G>=delta" in result.output


def test_synthesize_without_guarantee() -> None:
    result = invoke("synthesize", "--pair", DOUBLE_INTEGRATOR)
    assert result.exit_code == 3
    assert "syncgain verify f" in result.output
    assert "A_J=True" in result.output


### simulate ###


def test_simulate_writes_manifest(tmp_path: Path) -> None:
    result = invoke(
        "simulate",
        "--pair",
        OSCILLATOR,
        "--graph",
        "ring:3",
        "--t-end",
        60,
        "--steps",
        600,
        "--out",
        tmp_path,
    )
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["command"] == "simulate"
    assert {f["path"] for f in report["files"]} == {
        "trajectory.csv",
        "summary.json",
    }
    for entry in report["files"]:
        payload = (tmp_path / entry["path"]).read_bytes()
        assert hashlib.sha256(payload).hexdigest() == entry["sha256"]
    assert report["results"]["summary"]["decayed"] is True


def test_simulate_without_out_writes_nothing(tmp_path: Path) -> None:
    runner = CliRunner()
    with runner.isolated_filesystem(temp_dir=tmp_path) as cwd:
        result = runner.invoke(
            main,
            ["simulate", "--pair", OSCILLATOR, "--graph", "ring:2",
             "--t-end", "5", "--steps", "50"],
        )
        assert result.exit_code == 0, result.output
        assert list(Path(cwd).iterdir()) == []


def test_simulate_runs_are_deterministic(tmp_path: Path) -> None:
    reports = []
    for name in ("a", "b"):
        result = invoke(
            "simulate",
            "--pair",
            OSCILLATOR,
            "--graph",
            "ring:4",
            "--t-end",
            10,
            "--steps",
            100,
            "--seed",
            7,
            "--out",
            tmp_path / name,
        )
        assert result.exit_code == 0, result.output
        report = json.loads((tmp_path / name / "report.json").read_text())
        del report["created"]
        reports.append(report)
    assert reports[0] == reports[1]
    for artifact in ("trajectory.csv", "summary.json"):
        assert (tmp_path / "a" / artifact).read_bytes() == (
            tmp_path / "b" / artifact
        ).read_bytes()


def test_gain_file_round_trip(tmp_path: Path) -> None:
    result = invoke(
        "synthesize",
        "--pair",
        DOUBLE_INTEGRATOR,
        "--delta",
        1,
        "--out",
        tmp_path / "synth",
    )
    assert result.exit_code == 0, result.output
    gain_file = tmp_path / "synth" / "gain.json"
    common = ["--pair", DOUBLE_INTEGRATOR, "--graph", "ring:3",
              "--t-end", 10, "--steps", 100]
    fresh = invoke("simulate", *common, "--delta", 1,
                   "--out", tmp_path / "fresh")
    loaded = invoke("simulate", *common, "--gain", gain_file,
                    "--out", tmp_path / "loaded")
    assert fresh.exit_code == 0, fresh.output
    assert loaded.exit_code == 0, loaded.output
    assert (tmp_path / "fresh" / "trajectory.csv").read_bytes() == (
        tmp_path / "loaded" / "trajectory.csv"
    ).read_bytes()


def test_simulate_gain_shape_mismatch(tmp_path: Path) -> None:
    (tmp_path / "gain.json").write_text(
        '{"L": [[1.0]], "branch": "algorithm1", "guarantee": "G>0"}'
    )
    result = invoke(
        "simulate", "--pair", OSCILLATOR, "--graph", "ring:2",
        "--gain", tmp_path / "gain.json",
    )
    assert result.exit_code == 2
    assert "Gain is 1×1" in result.output


### verify ###


@pytest.mark.parametrize("statement", ["e", "f", "g", "h"])
def test_verify_statement(statement: str, tmp_path: Path) -> None:
    result = invoke("verify", statement, "--out", tmp_path)
    assert result.exit_code == 0, result.output
    assert f"Statement ({statement}) confirmed: True" in result.output
    record = json.loads(
        (tmp_path / f"statement_{statement}.json").read_text()
    )
    assert record["confirmed"] is True
    assert (tmp_path / "trajectory.csv").exists()


def test_verify_unknown_target() -> None:
    result = invoke("verify", "z")
    assert result.exit_code == 2


def test_verify_spectral(tmp_path: Path) -> None:
    result = invoke(
        "verify", "spectral", "--pair", OSCILLATOR, "--graph", "ring:5",
        "--out", tmp_path,
    )
    assert result.exit_code == 0, result.output
    verdict = json.loads((tmp_path / "verdict.json").read_text())
    assert verdict["overall"] is True
    assert len(verdict["records"]) == 4


def test_verify_spectral_consensus(tmp_path: Path) -> None:
    config = STARTERS_PATH / "consensus" / "config.toml"
    result = invoke(
        "verify", "spectral", "--config", config, "--out", tmp_path
    )
    assert result.exit_code == 0, result.output
    assert "synchronizes: ✓" in result.output


def test_verify_claim1() -> None:
    result = invoke("verify", "claim1", "--pair", DOUBLE_INTEGRATOR)
    assert result.exit_code == 0, result.output


def test_verify_ensemble(tmp_path: Path) -> None:
    result = invoke(
        "verify", "ensemble", "--cases", 3, "--seed", 5, "--out", tmp_path
    )
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "report.json").read_text())
    ensemble = report["results"]["ensemble"]
    assert ensemble["agreements"] == 3
    assert ensemble["margin"] == 0.05


### demo ###


def test_demo(tmp_path: Path) -> None:
    result = invoke("demo", "--out", tmp_path)
    assert result.exit_code == 0, result.output
    assert "Oscillators synchronized: True" in result.output
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["final_sync_error"] <= 1e-6 * summary["initial_sync_error"]
