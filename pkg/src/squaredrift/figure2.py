"""Oscillations born at the Hopf instability of squares: attractor hunt and the three symmetric orbits.

At ``mu = 1, Q = 1, zeta = 0.2, beta = -1.5`` squares have lost stability
to oscillations.  Pulsating squares (PSq) and diagonal pulsating squares
(DPSq) are found inside their fixed subspaces, where they are attracting;
alternating pulsating waves (APW) are the attractor of the full core.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import ClassificationError, SolutionLabel, classify_equilibrium, classify_orbit, drift_profile
from .dynamics.integrate import IntegratorConfig, section_crossings
from .dynamics.orbits import OrbitError, PeriodicOrbit, find_periodic_orbit, floquet_multipliers, stability_verdict
from .dynamics.simulate import simulate
from .models import squares_state, thresholds
from .states import ModelParams
from .sweep import detect_bifurcations, sector_basis, sweep_parameter

FIGURE2_PARAMS = ModelParams(mu=1.0, beta=-1.5, gamma=1.0, Q=1.0, zeta=0.2)
TRANSIENT = 200.0
PERTURBATION = 1e-2
DEFAULT_SEED = 42
SECTION = (1, 0.0, 1)  # c_x = 0, increasing
FALLBACK_SECTION = (4, 0.0, 1)  # c_y = 0, increasing

SECTORS = {"PSq": "x", "DPSq": "diagonal", "APW": None}


@dataclass
class AttractorResult:
    trial: int
    status: str  # orbit | equilibrium | failed
    label: SolutionLabel | None = None
    orbit: PeriodicOrbit | None = None
    message: str = ""


def estimate_period(traj, t_min: float, section=SECTION) -> float | None:
    """Mean spacing of the section crossings after ``t_min``; ``None`` if irregular."""
    times = np.array([t for t, _ in section_crossings(traj, section) if t >= t_min])
    if len(times) < 3:
        return None
    gaps = np.diff(times)
    if np.ptp(gaps) > 1e-3 * np.mean(gaps):
        return None
    return float(np.mean(gaps))


def _window(p: ModelParams) -> float:
    th = thresholds(p)
    period = 2 * math.pi / th.omega_hopf if th.omega_hopf else 20.0
    return 4.0 * period


def _settle(p, x0, transient, basis=None):
    """Run out the transient; return ``(final state, period estimate or None)``."""
    traj = simulate("polar", x0, transient + _window(p), p, IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12))
    for section in (SECTION, FALLBACK_SECTION):
        if basis is not None and np.max(np.abs(basis[section[0]])) < 1e-12:
            continue
        period = estimate_period(traj, transient, section)
        if period is not None:
            return traj.states[-1], period
    return traj.states[-1], None


def perturbed_squares(p: ModelParams, rng: np.random.Generator, amplitude: float = PERTURBATION,
                      basis: np.ndarray | None = None) -> np.ndarray:
    x = squares_state(p)
    if basis is None:
        x[:6] += amplitude * rng.standard_normal(6)
    else:
        x[:6] += basis @ (amplitude * rng.standard_normal(basis.shape[1]))
    return x


def hunt_attractors(p: ModelParams = FIGURE2_PARAMS, seed: int = DEFAULT_SEED, trials: int = 10,
                    transient: float = TRANSIENT, amplitude: float = PERTURBATION) -> list[AttractorResult]:
    """Perturb squares at random, discard a transient and label what the flow settles on."""
    rng = np.random.default_rng(seed)
    out = []
    for trial in range(trials):
        x0 = perturbed_squares(p, rng, amplitude)
        try:
            x, period = _settle(p, x0, transient)
            if period is None:
                try:
                    label = classify_equilibrium(x, p, model="polar")
                    out.append(AttractorResult(trial, "equilibrium", label))
                except ClassificationError as exc:
                    out.append(AttractorResult(trial, "failed", message=str(exc)))
                continue
            orbit = find_periodic_orbit("polar", p, x, period)
            out.append(AttractorResult(trial, "orbit", classify_orbit(orbit), orbit))
        except (OrbitError, ArithmeticError, ValueError, RuntimeError) as exc:
            out.append(AttractorResult(trial, "failed", message=str(exc)))
    return out


def refine_symmetric_orbit(kind: str, p: ModelParams = FIGURE2_PARAMS, seed: int = DEFAULT_SEED,
                           transient: float = TRANSIENT, amplitude: float = PERTURBATION) -> PeriodicOrbit:
    """Refine PSq or DPSq inside its fixed subspace, or APW in the full core."""
    if kind not in SECTORS:
        raise ValueError(f"unknown orbit kind {kind!r}; choose from {sorted(SECTORS)}")
    basis = sector_basis(SECTORS[kind])
    rng = np.random.default_rng(seed)
    x0 = perturbed_squares(p, rng, amplitude, basis)
    x, period = _settle(p, x0, transient, basis)
    if period is None:
        raise OrbitError(f"no regular oscillation found for {kind}")
    return find_periodic_orbit("polar", p, x, period, basis=basis)


def orbit_summary(orbit: PeriodicOrbit) -> dict:
    label = classify_orbit(orbit)
    full = floquet_multipliers(orbit)
    restricted = floquet_multipliers(orbit, "restricted")
    drift = drift_profile(orbit)
    return {
        "label": label.to_dict(),
        "period": orbit.period,
        "residual": orbit.residual,
        "multipliers": [[z.real, z.imag] for z in full],
        "max_modulus": float(np.max(np.abs(full[np.argsort(np.abs(full - 1))[1:]]))),
        "stability": stability_verdict(full),
        "restricted_stability": stability_verdict(restricted),
        "drift": drift.to_dict(),
        "relative_net_drift": drift.relative_net(),
        "quarter_turn_sense": drift.quarter_turn_sense(),
    }


def figure2_report(p: ModelParams = FIGURE2_PARAMS, seed: int = DEFAULT_SEED, trials: int = 10,
                   transient: float = TRANSIENT) -> dict:
    """End-to-end reproduction: thresholds, detected Hopf point, attractors, the three orbits."""
    th = thresholds(p)
    hi = max(p.mu, th.mu_pitchfork) + 0.2
    sweep = sweep_parameter("polar", p, "mu", (0.05, hi, 0.05))
    events = [e.to_dict() for e in detect_bifurcations(sweep)]
    attractors = hunt_attractors(p, seed, trials, transient)
    orbits = {}
    for kind in ("PSq", "DPSq", "APW"):
        try:
            orbits[kind] = orbit_summary(refine_symmetric_orbit(kind, p, seed, transient))
        except (OrbitError, ArithmeticError, ValueError, RuntimeError) as exc:
            orbits[kind] = {"error": str(exc)}
    return {
        "params": p.to_dict(),
        "seed": seed,
        "thresholds": th.to_dict(),
        "bifurcations": events,
        "attractors": [
            {
                "trial": a.trial,
                "status": a.status,
                "label": None if a.label is None else a.label.to_dict(),
                "period": None if a.orbit is None else a.orbit.period,
                "message": a.message,
            }
            for a in attractors
        ],
        "orbits": orbits,
    }
