import json

import numpy as np
import pytest

from squaredrift import io
from squaredrift.cli import RunConfig, main
from squaredrift.states import ConfigError

FIG2_JSON = '{"mu":1,"beta":-1.5,"gamma":1,"Q":1,"zeta":0.2,"D":1,"k":1}'
HOPF_JSON = '{"lambda":0.1,"omega":1,"A":[-1,0],"B":[-1,0]}'


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_branches_report(capsys):
    code, out, _ = run(capsys, "branches", "--params", FIG2_JSON)
    assert code == 0
    th = json.loads(out)["thresholds"]
    assert th["mu_pitchfork"] == pytest.approx(1.0)
    assert th["mu_hopf"] == pytest.approx(0.6)
    assert th["omega_hopf"] == pytest.approx(0.4)


def test_branches_normal_form(capsys):
    code, out, _ = run(capsys, "branches", "--model", "hopf", "--params", HOPF_JSON)
    assert code == 0
    amps = {b["label"]: b["amp2"] for b in json.loads(out)["branches"]}
    assert amps["PSq"] == pytest.approx(0.05)


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--model", "full", "--samples", "1000", "--tol", "1e-12")
    assert code == 0
    assert out.strip().splitlines()[-1] == "PASS all checks"


def test_verify_failure_exit_code(capsys):
    code, out, _ = run(capsys, "verify", "--model", "full", "--samples", "10", "--tol", "1e-300")
    assert code == 2
    assert "FAIL" in out


def test_simulate_from_equilibrium_is_constant(tmp_path, capsys):
    path = tmp_path / "sq.csv"
    params = '{"mu":0.5,"beta":-1.5,"Q":1,"zeta":0.2}'
    code, _, _ = run(capsys, "simulate", "--model", "full", "--params", params, "--t-end", "20",
                     "--dt-out", "1", "--out", str(path))
    assert code == 0
    fields, times, states = io.read_trajectory_csv(path)
    assert len(times) == 21
    assert np.all(states == states[0])
    assert states[0, 0] == 1.0


def test_simulate_is_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        assert run(capsys, "simulate", "--perturb", "0.01", "--seed", "7", "--t-end", "10", "--out", str(path))[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    run(capsys, "simulate", "--perturb", "0.01", "--seed", "8", "--t-end", "10", "--out", str(paths[1]))
    assert paths[0].read_bytes() != paths[1].read_bytes()


def test_equilibria_lists_closed_form_seeds(capsys):
    code, out, _ = run(capsys, "equilibria", "--params", '{"mu":1.2,"beta":-1.5,"Q":1,"zeta":0.2}')
    assert code == 0
    labels = {e["seed"]: e["label"]["label"] for e in json.loads(out)["equilibria"]}
    assert labels["Squares"] == "Squares"
    assert labels["TSq"] == "TSq"
    assert labels["DTSq"] == "DTSq"


def test_orbit_and_classify_round_trip(tmp_path, capsys):
    path = tmp_path / "psq.json"
    code, _, _ = run(capsys, "orbit", "--model", "hopf", "--params", HOPF_JSON,
                     "--state", "[0.22, 0, 0, 0, 0, 0]", "--period", "6.2", "--out", str(path))
    assert code == 0
    data = io.read_json(path)
    assert data["label"]["label"] == "PSq"
    code, out, _ = run(capsys, "classify", str(path))
    assert code == 0
    assert json.loads(out)["label"]["label"] == "PSq"


def test_classify_trajectory_at_rest(tmp_path, capsys):
    path = tmp_path / "tsq.csv"
    params = '{"mu":1.2,"beta":-1.5,"Q":1,"zeta":0.2}'
    c = 0.3 ** 0.5
    state = f'{{"rx": 1.4142135623730951, "cx": {c}, "dx": {c}, "ry": {2.2 ** 0.5}}}'
    code, _, _ = run(capsys, "simulate", "--params", params, "--state", state, "--t-end", "1", "--tol", "1e-12",
                     "--out", str(path))
    assert code == 0
    code, out, _ = run(capsys, "classify", str(path), "--params", params)
    assert code == 0
    report = json.loads(out)
    assert report["label"]["label"] == "TSq"
    assert report["drift"]["rate"][0] == pytest.approx(c, abs=1e-10)


def test_sweep_writes_events(tmp_path, capsys):
    csv_path, events_path = tmp_path / "s.csv", tmp_path / "e.json"
    code, _, _ = run(capsys, "sweep", "--params", FIG2_JSON, "--range", "0.4", "1.2", "0.1",
                     "--out", str(csv_path), "--events", str(events_path))
    assert code == 0
    events = io.read_json(events_path)["events"]
    assert [e["kind"] for e in events] == ["hopf", "pitchfork"]
    assert len(io.parse_sweep_csv(csv_path.read_text())) == 9


@pytest.mark.parametrize("argv", [
    ["bogus"],
    [],
    ["simulate", "--frobnicate"],
    ["branches", "--params", '{"mu":1,"beta":0,"Ra":5}'],
    ["simulate", "--params", "{not json"],
    ["simulate", "--state", "[1, 2]"],
    ["sweep", "--range", "1", "0", "0.1"],
    ["simulate", "--seed", "-1"],
])
def test_usage_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert err.startswith("error:")


def test_numerical_failure_exits_2(capsys):
    code, _, err = run(capsys, "orbit", "--model", "hopf", "--params", HOPF_JSON,
                       "--state", "[0, 0, 0, 0, 0, 0]", "--period", "6")
    assert code == 2
    assert err.startswith("numerical failure")


def test_config_file(tmp_path, capsys):
    cfg = RunConfig(seed=3)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert RunConfig.from_dict(json.loads(path.read_text())) == cfg
    code, out, _ = run(capsys, "branches", "--config", str(path))
    assert code == 0
    assert json.loads(out)["params"]["mu"] == 1.0


def test_run_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"model": "polar", "colour": "blue"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"integrator": {"method": "euler"}})
