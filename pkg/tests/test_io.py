import numpy as np
import pytest

from squaredrift import io
from squaredrift.dynamics import find_periodic_orbit, simulate
from squaredrift.models import squares_state
from squaredrift.states import HopfNFParams, ModelParams
from squaredrift.sweep import sweep_parameter

FIG2 = ModelParams(mu=1.0, beta=-1.5, gamma=1.0, Q=1.0, zeta=0.2)


def test_trajectory_csv_round_trip(tmp_path):
    traj = simulate("polar", squares_state(FIG2) + 0.01, 5.0, FIG2, dt_out=0.25)
    path = tmp_path / "traj.csv"
    io.write_trajectory_csv(traj, path)
    fields, times, states = io.read_trajectory_csv(path)
    assert fields == traj.fields
    np.testing.assert_array_equal(times, traj.times)
    np.testing.assert_array_equal(states, traj.states)


def test_trajectory_csv_needs_header():
    with pytest.raises(ValueError):
        io.parse_trajectory_csv("1,2,3\n")


def test_orbit_json_round_trip(tmp_path):
    p = HopfNFParams(0.1, 1.0, complex(-1, 0.2), -1, 0.1)
    orbit = find_periodic_orbit("hopf", p, np.array([0.3, 0, 0, 0, 0, 0]), 6.0, basis=np.eye(4)[:, :2])
    path = tmp_path / "orbit.json"
    io.write_orbit_json(orbit, path, {"note": "x"})
    back = io.read_orbit_json(path)
    assert back.params == orbit.params
    assert back.period == orbit.period
    np.testing.assert_array_equal(back.states, orbit.states)
    np.testing.assert_array_equal(back.multipliers, orbit.multipliers)
    np.testing.assert_array_equal(back.basis, orbit.basis)
    assert io.read_json(path)["note"] == "x"


def test_json_handles_numpy_and_complex():
    text = io.dumps({"a": np.array([1.5, 2.0]), "z": 1 + 2j, "n": np.int64(3), "b": np.bool_(True), "inf": float("inf")})
    assert '"z": [\n    1.0,\n    2.0\n  ]' in text
    import json

    data = json.loads(text)
    assert data == {"a": [1.5, 2.0], "z": [1.0, 2.0], "n": 3, "b": True, "inf": None}


def test_sweep_csv_round_trip():
    sr = sweep_parameter("polar", FIG2, "mu", (0.4, 0.8, 0.1))
    rows = io.parse_sweep_csv(io.sweep_csv(sr))
    assert [r["mu"] for r in rows] == list(sr.values)
    for row, pt in zip(rows, sr.points):
        assert row["rx"] == pt.state[0]
        assert row["leading_re"] == pt.leading.real
        assert row["label"] == pt.label
        assert row["stable"] is pt.stable
        assert row["converged"] is True
