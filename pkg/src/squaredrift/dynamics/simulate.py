"""Trajectory simulation with representation handling for the convection model."""

from __future__ import annotations

import numpy as np

from .integrate import IntegratorConfig, Trajectory, integrate

R_SWITCH = 1e-8


def _with_phases_matching(polar: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Shift unwrapped phases by multiples of 2 pi to continue ``reference``."""
    out = polar.copy()
    for j in (6, 7):
        out[:, j] += 2 * np.pi * np.round((reference[j] - out[0, j]) / (2 * np.pi))
    return out


def convert_trajectory(traj: Trajectory, form: str) -> Trajectory:
    """Express a ``polar`` or ``full`` trajectory in ``"polar"`` or ``"cartesian"`` form."""
    from ..models import get_model, modes_array_from_polar, polar_array_from_modes

    if form not in ("polar", "cartesian"):
        raise ValueError("form must be 'polar' or 'cartesian'")
    target = "polar" if form == "polar" else "full"
    if traj.model == target:
        return traj
    if {traj.model, target} != {"polar", "full"}:
        raise ValueError(f"cannot convert a {traj.model!r} trajectory to {form} form")
    if target == "full":
        states = modes_array_from_polar(traj.states)
    else:
        states = polar_array_from_modes(traj.states)
    vf = get_model(target)
    derivs = np.array([vf.rhs(x, traj.params) for x in states])
    return Trajectory(traj.times.copy(), states, derivs, target, traj.params, vf.fields, traj.switched_at)


def simulate(model, s0, t_end: float, p, cfg: IntegratorConfig | None = None,
             dt_out: float | None = None, t0: float = 0.0) -> Trajectory:
    """Integrate ``model`` from ``s0`` on ``[t0, t_end]``.

    For the polar model, integration hands over to the Cartesian form as
    soon as a roll amplitude drops below ``1e-8``, where the phases lose
    their meaning; the returned trajectory is still in polar form.
    ``dt_out`` resamples onto a uniform grid.
    """
    from ..models import get_model, modes_array_from_polar, polar_array_from_modes

    vf = get_model(model) if isinstance(model, str) else model
    traj = integrate(vf, s0, (t0, t_end), p, cfg)
    if getattr(vf, "name", None) == "polar":
        small = np.nonzero(np.minimum(traj.states[:, 0], traj.states[:, 3]) < R_SWITCH)[0]
        if len(small):
            i = max(int(small[0]) - 1, 0)
            head = Trajectory(traj.times[: i + 1], traj.states[: i + 1], traj.derivs[: i + 1], "polar", p, vf.fields)
            start = modes_array_from_polar(traj.states[i])[0]
            tail = integrate("full", start, (traj.times[i], t_end), p, cfg)
            tail_polar = _with_phases_matching(polar_array_from_modes(tail.states), traj.states[i])
            tail_derivs = np.array([vf.rhs(x, p) for x in tail_polar])
            traj = Trajectory(
                np.concatenate([head.times, tail.times[1:]]),
                np.vstack([head.states, tail_polar[1:]]),
                np.vstack([head.derivs, tail_derivs[1:]]),
                "polar", p, vf.fields, float(traj.times[i]),
            )
    if dt_out is not None:
        if dt_out <= 0:
            raise ValueError("dt_out must be positive")
        traj = traj.resample(dt_out)
    return traj
