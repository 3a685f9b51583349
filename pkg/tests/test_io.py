import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from syncgain.errors import ConfigError, GraphError
from syncgain.interconnect import ring
from syncgain.io import (
    dumps,
    load_gain,
    load_graph,
    load_pair,
    load_run_config,
    write_json,
    write_report,
    write_trajectory_csv,
)
from syncgain.models import GainModel
from syncgain.simulate import harmonic_oscillators, simulate_array
from syncgain.synthesis import synth_riccati
from syncgain.sysclass import SystemPair

PAIR_JSON = '{"A": [[0.0, 1.0], [-1.0, 0.0]], "C": [[0.0, 1.0]]}'


def test_load_pair_inline() -> None:
    pair = load_pair(PAIR_JSON)
    assert (pair.n, pair.m) == (2, 1)


def test_load_pair_file(tmp_path: Path) -> None:
    (tmp_path / "pair.json").write_text(PAIR_JSON)
    pair = load_pair("pair.json", tmp_path)
    assert pair.A[0, 1] == 1.0


def test_load_pair_toml(tmp_path: Path) -> None:
    (tmp_path / "pair.toml").write_text("A = [[2.0]]\nC = [[1.0]]\n")
    pair = load_pair(tmp_path / "pair.toml")
    assert pair.A[0, 0] == 2.0


@pytest.mark.parametrize(
    "source, message",
    [
        ("{not json", "Invalid inline JSON"),
        ("missing.json", "File not found"),
        ('{"A": [[1.0]], "C": [[1.0, 2.0]]}', "inline JSON"),
    ],
)
def test_load_pair_errors(source: str, message: str) -> None:
    with pytest.raises(ConfigError, match=message):
        load_pair(source)


def test_load_pair_bad_toml(tmp_path: Path) -> None:
    (tmp_path / "pair.toml").write_text("A = [[\n")
    with pytest.raises(ConfigError, match="pair.toml"):
        load_pair(tmp_path / "pair.toml")


def test_load_graph_generator() -> None:
    gamma = load_graph("ring:4")
    assert np.array_equal(gamma.gamma, ring(4).gamma)


def test_load_graph_inline_and_file(tmp_path: Path) -> None:
    text = '{"p": 2, "edges": [[1, 2, 0.5]]}'
    (tmp_path / "graph.json").write_text(text)
    inline = load_graph(text)
    from_file = load_graph("graph.json", tmp_path)
    assert np.array_equal(inline.gamma, from_file.gamma)
    assert inline.gamma[0, 1] == 0.5


def test_load_graph_gamma_rows_must_sum_to_zero() -> None:
    assert load_graph('{"gamma": [[-1.0, 1.0], [0.0, 0.0]]}').p == 2
    with pytest.raises(GraphError, match="Row sums"):
        load_graph('{"gamma": [[0.0, 1.0], [0.0, 0.0]]}')


def test_load_graph_bad_generator() -> None:
    with pytest.raises(ConfigError, match="generator"):
        load_graph("ring:x")


def test_load_gain(tmp_path: Path) -> None:
    pair = SystemPair(C=[[1.0, 0.0]], A=[[0.0, 1.0], [0.0, 0.0]])
    gain = synth_riccati(pair, 1.0)
    write_json(tmp_path / "gain.json", GainModel.from_gain(gain), tmp_path)
    again = load_gain("gain.json", tmp_path)
    assert np.array_equal(again.L, gain.L)
    assert again.delta == 1.0
    assert again.guarantee == "G>=delta"


def test_load_run_config_relative_paths(tmp_path: Path) -> None:
    run = tmp_path / "run"
    run.mkdir()
    (run / "pair.json").write_text(PAIR_JSON)
    (run / "config.toml").write_text(
        'pair = "pair.json"\ngraph = "ring:3"\nout = "results"\n'
        "[tolerances]\nint = 1e-5\n"
    )
    config = load_run_config(run / "config.toml")
    assert config.base_dir == run.resolve()
    assert config.out == run.resolve() / "results"
    assert config.tolerances.int_ == 1e-5
    assert load_pair(config.pair, config.base_dir).n == 2


def test_load_run_config_rejects_unknown_key(tmp_path: Path) -> None:
    path = tmp_path / "config.toml"
    path.write_text("colour = 1\n")
    with pytest.raises(ConfigError, match="colour"):
        load_run_config(path)


def test_load_run_config_missing(tmp_path: Path) -> None:
    with pytest.raises(ConfigError, match="File not found"):
        load_run_config(tmp_path / "config.toml")


### Writers ###


def test_dumps_is_deterministic() -> None:
    data = {"b": [0.1, 1e-17], "a": 1}
    assert dumps(data) == dumps(dict(reversed(list(data.items()))))
    assert json.loads(dumps(data))["b"] == [0.1, 1e-17]
    assert dumps(data).endswith("\n")


def test_write_json_manifest(tmp_path: Path) -> None:
    entry = write_json(tmp_path / "sub" / "x.json", {"k": 1}, tmp_path)
    payload = (tmp_path / "sub" / "x.json").read_bytes()
    assert entry.path == "sub/x.json"
    assert entry.sha256 == hashlib.sha256(payload).hexdigest()


def test_trajectory_csv(tmp_path: Path) -> None:
    spec = harmonic_oscillators(ring(2), [1.0, 0.0, 0.0, 1.0])
    traj = simulate_array(spec, 1.0, 4)
    write_trajectory_csv(tmp_path / "trajectory.csv", traj, tmp_path)
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == (
        "t,x[1][1],x[1][2],x[2][1],x[2][2],sync_error,tracking_error"
    )
    assert len(lines) == 6
    first = lines[1].split(",")
    assert [float(v) for v in first[:5]] == [0.0, 1.0, 0.0, 0.0, 1.0]
    assert float(lines[-1].split(",")[0]) == 1.0


def test_write_report(tmp_path: Path) -> None:
    entry = write_json(tmp_path / "summary.json", {"ok": True}, tmp_path)
    path = write_report(tmp_path, "simulate", {"ok": True}, [entry])
    report = json.loads(path.read_text())
    assert report["command"] == "simulate"
    assert report["files"] == [
        {"path": "summary.json", "sha256": entry.sha256}
    ]
    assert report["created"].endswith("+00:00")
