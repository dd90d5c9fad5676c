"""CSV and JSON files for trajectories, orbits and sweeps, with matching readers."""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .dynamics.integrate import Trajectory
from .dynamics.orbits import PeriodicOrbit
from .states import params_from_dict

FLOAT_FORMAT = "%.17g"


def _fmt(v) -> str:
    return FLOAT_FORMAT % float(v)


def write_text(text: str, path) -> None:
    """Write to ``path``; ``None`` or ``"-"`` means standard output."""
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")


def read_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# trajectories


def trajectory_csv(traj: Trajectory) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("t",) + tuple(traj.fields))
    for t, row in zip(traj.times, traj.states):
        writer.writerow([_fmt(t)] + [_fmt(v) for v in row])
    return buf.getvalue()


def parse_trajectory_csv(text: str) -> tuple[tuple[str, ...], np.ndarray, np.ndarray]:
    """``(fields, times, states)`` from :func:`trajectory_csv` output."""
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or not rows[0] or rows[0][0] != "t":
        raise ValueError("trajectory CSV must start with a header row beginning with 't'")
    fields = tuple(rows[0][1:])
    data = np.array([[float(v) for v in row] for row in rows[1:] if row], dtype=float).reshape(-1, len(fields) + 1)
    return fields, data[:, 0], data[:, 1:]


def write_trajectory_csv(traj: Trajectory, path) -> None:
    write_text(trajectory_csv(traj), path)


def read_trajectory_csv(path) -> tuple[tuple[str, ...], np.ndarray, np.ndarray]:
    return parse_trajectory_csv(read_text(path))


# ---------------------------------------------------------------------------
# JSON


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def write_json(obj, path) -> None:
    write_text(dumps(obj), path)


def read_json(path):
    return json.loads(read_text(path))


def orbit_to_dict(orbit: PeriodicOrbit) -> dict:
    return {
        "model": orbit.model,
        "params": orbit.params.to_dict(),
        "period": orbit.period,
        "residual": orbit.residual,
        "multipliers": [[float(z.real), float(z.imag)] for z in np.asarray(orbit.multipliers, dtype=complex)],
        "fields": list(orbit.vector_field.fields),
        "samples": np.asarray(orbit.states).tolist(),
        "n_steps": orbit.n_steps,
        "section": list(orbit.section),
        "basis": None if orbit.basis is None else np.asarray(orbit.basis).tolist(),
    }


def orbit_from_dict(data: dict) -> PeriodicOrbit:
    model = data["model"]
    basis = data.get("basis")
    return PeriodicOrbit(
        model=model,
        params=params_from_dict(model, data["params"]),
        period=float(data["period"]),
        states=np.array(data["samples"], dtype=float),
        residual=float(data["residual"]),
        multipliers=np.array([complex(re, im) for re, im in data["multipliers"]]),
        monodromy=None,
        n_steps=int(data.get("n_steps", 2048)),
        section=tuple(data.get("section", (0, 0.0, 1))),
        basis=None if basis is None else np.array(basis, dtype=float),
    )


def write_orbit_json(orbit: PeriodicOrbit, path, extra: dict | None = None) -> None:
    data = orbit_to_dict(orbit)
    if extra:
        data.update(extra)
    write_json(data, path)


def read_orbit_json(path) -> PeriodicOrbit:
    return orbit_from_dict(read_json(path))


# ---------------------------------------------------------------------------
# sweeps


def sweep_csv(sr) -> str:
    from .models import get_model

    fields = get_model("polar").fields
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow((sr.name,) + tuple(fields) + ("leading_re", "leading_im", "label", "stable", "converged"))
    for pt in sr.points:
        state = pt.state if pt.state is not None else np.full(len(fields), math.nan)
        lead = pt.leading if pt.converged else None
        writer.writerow(
            [_fmt(pt.value)]
            + [_fmt(v) for v in state]
            + [_fmt(lead.real) if lead is not None else "nan", _fmt(lead.imag) if lead is not None else "nan"]
            + [pt.label, "" if pt.stable is None else str(pt.stable).lower(), str(pt.converged).lower()]
        )
    return buf.getvalue()


def parse_sweep_csv(text: str) -> list[dict]:
    rows = list(csv.DictReader(_io.StringIO(text)))
    out = []
    for row in rows:
        rec = {}
        for key, value in row.items():
            if key in ("label",):
                rec[key] = value
            elif key in ("stable", "converged"):
                rec[key] = None if value == "" else value == "true"
            else:
                rec[key] = float(value)
        out.append(rec)
    return out
