import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from qembed import cli

EXPECTED = [
    "chsh", "clock", "completeness", "decoherence", "gates", "ghz",
    "kochen-specker", "learner", "oscillator", "qubit-chain", "sphere", "stern-gerlach",
]

QUICK_ARGS = {
    "chsh": ["--mode", "cartesian"],
    "clock": ["--tmax", "1", "--dt", "0.5"],
    "completeness": ["--n", "3", "--seed", "1"],
    "decoherence": ["--tmax", "0.3", "--dt", "0.1"],
    "gates": ["--gate", "SWAP", "--map", "correlation_Q2"],
    "ghz": ["--restarts", "2", "--seed", "1"],
    "kochen-specker": [],
    "learner": ["--epochs", "20", "--seed", "1"],
    "oscillator": ["--grid", "32", "--tmax", "0.2"],
    "qubit-chain": ["--samples", "5", "--seed", "1"],
    "sphere": ["--method", "monte_carlo", "--n", "1000", "--seed", "1"],
    "stern-gerlach": [],
}


def _schema(name):
    text = resources.files("qembed").joinpath("schemas", name).read_text()
    return json.loads(text)


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_is_alphabetical_and_complete(capsys):
    code, out, _ = run(["list"], capsys)
    names = [line.split()[0] for line in out.splitlines()]
    assert code == 0
    assert names == EXPECTED == sorted(names)


@pytest.mark.parametrize("name", EXPECTED)
def test_each_scenario_has_help(name):
    proc = subprocess.run([sys.executable, "-m", "qembed", "run", name, "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert name in proc.stdout


@pytest.mark.parametrize("name", EXPECTED)
def test_output_validates_and_is_byte_stable(name, tmp_path, capsys):
    schema = _schema("output.schema.json")
    sub = {"$defs": schema["$defs"], **schema["$defs"][name]}
    out = tmp_path / "a.json"
    assert cli.main(["run", name, *QUICK_ARGS[name], "--out", str(out)]) == 0
    first = out.read_bytes()
    assert cli.main(["run", name, *QUICK_ARGS[name], "--out", str(out)]) == 0
    assert out.read_bytes() == first
    jsonschema.validate(json.loads(first), sub)
    manifest = json.loads((tmp_path / "a.json.manifest.json").read_text())
    jsonschema.validate(manifest, _schema("manifest.schema.json"))


def test_stern_gerlach_decoherent_quarters(capsys):
    code, out, _ = run(["run", "stern-gerlach", "--mode", "decoherent"], capsys)
    probs = json.loads(out)["probabilities"]
    assert code == 0
    assert sorted(k for k, v in probs.items() if abs(v - 0.25) < 1e-12) == ["+++", "++-", "+-+", "+--"]


def test_chsh_singlet_optimized(capsys):
    code, out, _ = run(["run", "chsh", "--state", "singlet", "--mode", "arbitrary", "--optimize"], capsys)
    assert json.loads(out)["value"] == pytest.approx(2.8284271247461903, abs=1e-9)


def test_completeness_sweep(capsys):
    code, out, _ = run(["run", "completeness", "--map", "correlation_Q2", "--n", "500", "--seed", "7"], capsys)
    assert code == 0
    assert json.loads(out)["success"] == 500


def test_scenario_flag_form(capsys):
    code, out, _ = run(["run", "--scenario", "kochen-specker"], capsys)
    assert code == 0 and json.loads(out)["contradiction"] is True


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"mode": "decoherent", "omega": 2.0}))
    _, out, _ = run(["run", "stern-gerlach", "--config", str(cfg)], capsys)
    assert json.loads(out)["mode"] == "decoherent"
    _, out, _ = run(["run", "stern-gerlach", "--config", str(cfg), "--mode", "coherent"], capsys)
    assert json.loads(out)["mode"] == "coherent"


def test_unknown_config_key_is_rejected(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"modes": "decoherent"}))
    code, _, err = run(["run", "stern-gerlach", "--config", str(cfg)], capsys)
    assert code == cli.EXIT_CONFIG
    assert "unknown keys" in err


def test_stochastic_scenario_needs_seed(capsys):
    code, _, err = run(["run", "qubit-chain"], capsys)
    assert code == cli.EXIT_CONFIG
    assert "--seed" in err


def test_numerical_failure_exit_code(capsys):
    code, _, err = run(["run", "oscillator", "--grid", "16", "--tmax", "0.1"], capsys)
    assert code == cli.EXIT_NUMERICAL
    assert "numerical failure" in err


def test_csv_headers(capsys):
    headers = {
        "clock": "t,psi,expectation",
        "decoherence": "t,P,rho1,rho2,rho3,A,ReB,ImB",
        "learner": "epoch,loss",
        "oscillator": "z,p,re,im",
    }
    for name, header in headers.items():
        code, out, _ = run(["run", name, *QUICK_ARGS[name], "--format", "csv"], capsys)
        assert code == 0
        assert out.splitlines()[0] == header


def test_csv_unsupported_for_summary_scenario(capsys):
    code, _, _ = run(["run", "kochen-specker", "--format", "csv"], capsys)
    assert code == cli.EXIT_CONFIG


def test_float_format_has_17_digits():
    assert cli.dumps_json({"b": 0.1, "a": -0.0}) == '{"a": 0.0, "b": 0.10000000000000001}\n'


def test_thread_cap_is_validated(monkeypatch, capsys):
    monkeypatch.setenv("QEMBED_THREADS", "many")
    code, _, _ = run(["run", "completeness", "--n", "1", "--seed", "1"], capsys)
    assert code == cli.EXIT_CONFIG
