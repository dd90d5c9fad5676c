"""Explicit time stepping: adaptive Dormand-Prince 5(4) and classical RK4.

All stage combinations are written element-wise, so a trajectory started in
a fixed-point subspace of a symmetry (e.g. ``r_x = r_y, c_x = c_y``) stays in
it bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class IntegrationError(RuntimeError):
    """Step budget exhausted or step size underflow."""


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_step: float = math.inf
    initial_step: float | None = None
    max_steps: int = 1_000_000
    step: float = 1e-2  # fixed step for "rk4"

    def __post_init__(self):
        if self.method not in ("rk45", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_step <= 0 or self.step <= 0 or self.max_steps <= 0:
            raise ValueError("step controls must be positive")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "max_step": None if math.isinf(self.max_step) else self.max_step,
            "initial_step": self.initial_step,
            "max_steps": self.max_steps,
            "step": self.step,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IntegratorConfig":
        allowed = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ValueError(f"unknown integrator keys: {', '.join(unknown)}")
        data = dict(data)
        if data.get("max_step") is None:
            data.pop("max_step", None)
        return cls(**data)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    model: str = ""
    params: object = None
    fields: tuple[str, ...] = field(default_factory=tuple)
    switched_at: float | None = None  # polar -> Cartesian hand-over time, if any

    def __len__(self) -> int:
        return len(self.times)

    def interpolate(self, t) -> np.ndarray:
        """Cubic Hermite interpolation using the stored derivatives."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2)
        t0, t1 = self.times[idx], self.times[idx + 1]
        h = (t1 - t0)[:, None]
        s = ((t - t0) / (t1 - t0))[:, None]
        return _hermite(s, h, self.states[idx], self.states[idx + 1], self.derivs[idx], self.derivs[idx + 1])

    def resample(self, dt: float) -> "Trajectory":
        """Uniform output grid with spacing ``dt`` (end point included when it lands)."""
        t0, t1 = self.times[0], self.times[-1]
        n = int(math.floor((t1 - t0) / dt + 1e-9))
        times = t0 + dt * np.arange(n + 1)
        if len(self.times) == 1:
            states = np.repeat(self.states[:1], len(times), axis=0)
            derivs = np.repeat(self.derivs[:1], len(times), axis=0)
        else:
            states = self.interpolate(times)
            derivs = self._interp_derivs(times)
        return Trajectory(times, states, derivs, self.model, self.params, self.fields, self.switched_at)

    def _interp_derivs(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2)
        t0, t1 = self.times[idx], self.times[idx + 1]
        h = (t1 - t0)[:, None]
        s = ((t - t0) / (t1 - t0))[:, None]
        y0, y1 = self.states[idx], self.states[idx + 1]
        f0, f1 = self.derivs[idx], self.derivs[idx + 1]
        dh00 = (6 * s * s - 6 * s) / h
        dh10 = 3 * s * s - 4 * s + 1
        dh01 = (-6 * s * s + 6 * s) / h
        dh11 = 3 * s * s - 2 * s
        return dh00 * y0 + dh10 * f0 + dh01 * y1 + dh11 * f1


def _hermite(s, h, y0, y1, f0, f1):
    s2 = s * s
    s3 = s2 * s
    return (
        (2 * s3 - 3 * s2 + 1) * y0
        + (s3 - 2 * s2 + s) * h * f0
        + (-2 * s3 + 3 * s2) * y1
        + (s3 - s2) * h * f1
    )


def rhs_of(model) -> tuple[Callable, str, tuple[str, ...]]:
    """Resolve a model name, :class:`VectorField` or bare ``f(x, p)``."""
    if callable(model) and not hasattr(model, "rhs"):
        return model, getattr(model, "__name__", "custom"), ()
    from ..models import get_model

    vf = get_model(model)
    return vf.rhs, vf.name, vf.fields


def _error_norm(err, y, ynew, cfg: IntegratorConfig) -> float:
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(ynew))
    return float(np.max(np.abs(err) / scale))


def _initial_step(f, t0, y0, f0, p, cfg: IntegratorConfig, span: float) -> float:
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y0)
    d0 = float(np.max(np.abs(y0) / scale))
    d1 = float(np.max(np.abs(f0) / scale))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = f(y0 + h0 * f0, p)
    d2 = float(np.max(np.abs(f1 - f0) / scale)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, cfg.max_step, span)


def dopri_step(f, y, h, k1, p):
    """One Dormand-Prince step: returns (y_new, f(y_new), error estimate)."""
    k2 = f(y + h * (_A21 * k1), p)
    k3 = f(y + h * (_A31 * k1 + _A32 * k2), p)
    k4 = f(y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3), p)
    k5 = f(y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4), p)
    k6 = f(y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5), p)
    ynew = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
    k7 = f(ynew, p)
    err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
    return ynew, k7, err


def rk4_step(f, y, h, p):
    k1 = f(y, p)
    k2 = f(y + (0.5 * h) * k1, p)
    k3 = f(y + (0.5 * h) * k2, p)
    k4 = f(y + h * k3, p)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(model, s0, t_span, p=None, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate from ``s0`` over ``t_span = (t0, t1)``; every accepted step is kept."""
    cfg = cfg or IntegratorConfig()
    f, name, fields = rhs_of(model)
    t0, t1 = (float(v) for v in t_span)
    if not (math.isfinite(t0) and math.isfinite(t1)) or t1 < t0:
        raise ValueError("t_span must be finite with t1 >= t0")
    y = np.array(s0.to_array() if hasattr(s0, "to_array") else s0, dtype=float)
    fy = f(y, p)
    times, states, derivs = [t0], [y], [fy]
    if t1 == t0:
        return Trajectory(np.array(times), np.array(states), np.array(derivs), name, p, fields)

    if cfg.method == "rk4":
        n = max(1, int(math.ceil((t1 - t0) / cfg.step - 1e-9)))
        if n > cfg.max_steps:
            raise IntegrationError(f"{n} fixed steps exceed max_steps={cfg.max_steps}")
        h = (t1 - t0) / n
        for i in range(1, n + 1):
            y = rk4_step(f, y, h, p)
            if not np.all(np.isfinite(y)):
                raise IntegrationError(f"solution blew up at t={t0 + i * h:g}")
            times.append(t0 + i * h)
            states.append(y)
            derivs.append(f(y, p))
        return Trajectory(np.array(times), np.array(states), np.array(derivs), name, p, fields)

    t = t0
    h = cfg.initial_step or _initial_step(f, t0, y, fy, p, cfg, t1 - t0)
    steps = 0
    rejected = False
    while t < t1:
        if steps >= cfg.max_steps:
            raise IntegrationError(f"max_steps={cfg.max_steps} exceeded at t={t:g}")
        h = min(h, cfg.max_step)
        last = t + h >= t1
        if last:
            h = t1 - t
        if h <= 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t={t:g}")
        ynew, fnew, err = dopri_step(f, y, h, fy, p)
        en = _error_norm(err, y, ynew, cfg)
        steps += 1
        if not math.isfinite(en):
            h *= 0.2
            rejected = True
            continue
        if en <= 1.0:
            t = t1 if last else t + h
            y, fy = ynew, fnew
            times.append(t)
            states.append(y)
            derivs.append(fy)
            fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
            if rejected:
                fac = min(fac, 1.0)
            h *= fac
            rejected = False
        else:
            h *= max(0.2, 0.9 * en ** -0.2)
            rejected = True
    return Trajectory(np.array(times), np.array(states), np.array(derivs), name, p, fields)


def section_crossings(traj: Trajectory, section) -> list[tuple[float, np.ndarray]]:
    """Times and states where ``x[index] - offset`` changes sign.

    ``section`` is ``(index, offset, direction)`` with direction ``+1``
    (upward), ``-1`` (downward) or ``0`` (both).  Each bracketed crossing is
    refined by bisection on the cubic Hermite interpolant.
    """
    index, offset, direction = section
    g = traj.states[:, index] - offset
    out = []
    for i in range(len(g) - 1):
        g0, g1 = g[i], g[i + 1]
        up = g0 < 0 <= g1
        down = g0 > 0 >= g1
        if not ((up and direction >= 0) or (down and direction <= 0)):
            continue
        y0, y1 = traj.states[i], traj.states[i + 1]
        f0, f1 = traj.derivs[i], traj.derivs[i + 1]
        h = traj.times[i + 1] - traj.times[i]

        def gs(s):
            return _hermite(s, h, y0[index], y1[index], f0[index], f1[index]) - offset

        lo, hi = 0.0, 1.0
        glo = g0
        s = 1.0
        for _ in range(200):
            s = 0.5 * (lo + hi)
            gm = gs(s)
            if abs(gm) <= 1e-12 or hi - lo < 1e-16:
                break
            if (gm < 0) == (glo < 0):
                lo, glo = s, gm
            else:
                hi = s
        out.append((traj.times[i] + s * h, _hermite(s, h, y0, y1, f0, f1)))
    return out
