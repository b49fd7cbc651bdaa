import json

import pandas as pd
import pytest
from click.testing import CliRunner

from app.cli import CSV_HEADER, EXIT_INVALID, EXIT_USAGE, cli

SMALL_RUN = {
    "grid": {"t_min": 0.01, "t_max": 100.0, "N": 32},
    "budget": 4,
    "refinements": 1,
    "seed": 3,
    "cases": [
        {"name": "lebesgue", "b": {"power": {"a": 0.0}}, "v": {"power": {"a": 0.0}},
         "w": {"power": {"a": 0.0}}, "exponents": {"p": 2.0, "q": 2.0}},
        {"name": "hardy", "u": {"power": {"a": 0.0}}, "b": {"power": {"a": 0.0}},
         "v": {"power": {"a": 0.0}}, "w": {"power": {"a": 0.0}}, "exponents": {"p": 2.0, "q": 2.0}},
    ],
    "fields": [{"name": "unit", "kind": "radial", "n": 1, "radii": [0.25, 0.5], "values": [1.0]}],
    "samples": 32,
}


@pytest.fixture
def run_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(SMALL_RUN))
    return path


def invoke(*args):
    return CliRunner().invoke(cli, [str(a) for a in args])


def test_unknown_command():
    assert invoke("frobnicate").exit_code == EXIT_USAGE


def test_invalid_config(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(dict(SMALL_RUN, grid={"t_min": 10.0, "t_max": 1.0, "N": 32})))
    result = invoke("constants", "--config", path, "--out", tmp_path / "out")
    assert result.exit_code == EXIT_INVALID


def test_unknown_config_key(tmp_path):
    path = tmp_path / "extra.json"
    path.write_text(json.dumps(dict(SMALL_RUN, colour="blue")))
    assert invoke("constants", "--config", path, "--out", tmp_path / "out").exit_code == EXIT_INVALID


def test_missing_config(tmp_path):
    result = invoke("constants", "--config", tmp_path / "nope.json", "--out", tmp_path / "out")
    assert result.exit_code == EXIT_INVALID


def test_constants_csv(run_file, tmp_path):
    out = tmp_path / "out"
    result = invoke("constants", "--config", run_file, "--out", out)
    assert result.exit_code == 0, result.output
    lines = (out / "constants.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    frame = pd.read_csv(out / "constants.csv")
    assert set(frame["regime"]) == {"i"}
    assert (frame["seed"] == 3).all()
    assert (out / "constants.md").exists()


def test_constants_rerun_is_byte_identical(run_file, tmp_path):
    invoke("constants", "--config", run_file, "--out", tmp_path / "a")
    invoke("constants", "--config", run_file, "--out", tmp_path / "b")
    for name in ("constants.csv", "constants.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cap_from_environment(run_file, tmp_path, monkeypatch):
    monkeypatch.setenv("LORENTZ_LAB_CAP", "0.5")
    out = tmp_path / "out"
    assert invoke("constants", "--config", run_file, "--out", out).exit_code == 0
    frame = pd.read_csv(out / "constants.csv")
    assert not frame["finite"].any()


def test_oracle_json(run_file, tmp_path):
    out = tmp_path / "out"
    assert invoke("oracle", "--config", run_file, "--out", out).exit_code == 0
    payload = json.loads((out / "oracle.json").read_text())
    assert [entry["case"] for entry in payload] == ["lebesgue", "hardy"]
    assert payload[0]["provenance"]["seed"] == 3


def test_seed_override(run_file, tmp_path):
    out = tmp_path / "out"
    assert invoke("oracle", "--config", run_file, "--out", out, "--seed", 11).exit_code == 0
    payload = json.loads((out / "oracle.json").read_text())
    assert payload[0]["seed"] == 11


def test_verify_summary(run_file, tmp_path):
    out = tmp_path / "out"
    result = invoke("verify", "--config", run_file, "--out", out)
    assert result.exit_code in (0, 3)
    assert "consistent: " in result.output
    assert "consistent: " in (out / "verify.md").read_text()
    reports = json.loads((out / "verify.json").read_text())
    assert all(len(r["trend"]) == 2 for r in reports)


def test_check_conditions(run_file, tmp_path):
    out = tmp_path / "out"
    assert invoke("check-conditions", "--config", run_file, "--out", out).exit_code == 0
    payload = json.loads((out / "conditions.json").read_text())
    names = {c["name"] for c in payload[0]["conditions"]}
    assert {"B_delta2", "V_delta2", "W_delta2"} <= names


def test_maximal_csv(run_file, tmp_path):
    out = tmp_path / "out"
    assert invoke("maximal", "--config", run_file, "--out", out).exit_code == 0
    frame = pd.read_csv(out / "maximal.csv")
    assert list(frame.columns) == ["field", "operator", "x", "value"]
    assert (frame["value"] <= 1.0 + 1e-12).all()


def test_seed_and_cap_reach_outputs(run_file, tmp_path):
    out = tmp_path / "out"
    assert invoke("constants", "--config", run_file, "--out", out, "--seed", 11).exit_code == 0
    frame = pd.read_csv(out / "constants.csv")
    assert (frame["seed"] == 11).all()
    payload = json.loads((out / "constants.json").read_text())
    assert all(entry["provenance"]["seed"] == 11 for entry in payload)
    assert all(entry["provenance"]["cap"] > 0 for entry in payload)
