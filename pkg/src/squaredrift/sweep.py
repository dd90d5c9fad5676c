"""Parameter sweeps along the squares branch, bifurcation detection, branch following.

Squares are continued in the translation-free polar core, where they are an
isolated equilibrium.  For the Cartesian representations the spectrum is
then read from that model's own Jacobian with the neutral translation
eigenvalues removed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classify import ClassificationError, classify_equilibrium, classify_orbit
from .dynamics.equilibria import find_equilibrium
from .dynamics.linalg import eigenvalues, eigenvector
from .dynamics.orbits import OrbitError, PeriodicOrbit, find_periodic_orbit, stability_verdict
from .models import (
    drop_neutral,
    get_model,
    modes_array_from_polar,
    squares_state,
)
from .states import ModelParams

POSITIVE_RE = 1e-10
PARAM_TOL = 1e-8
HOPF_IM = 1e-6
TB_SMALL = 1e-3

SWEEP_MODELS = ("polar", "full", "amplitude")


class BranchError(RuntimeError):
    """The requested branch could not be started."""


@dataclass
class SweepPoint:
    value: float
    state: np.ndarray | None  # polar array
    converged: bool
    residual: float
    eigenvalues: np.ndarray  # spectrum in the swept model, neutral directions removed
    label: str
    stable: bool | None
    amplitude_stable: bool | None = None
    error: str = ""

    @property
    def leading(self) -> complex | None:
        if len(self.eigenvalues) == 0:
            return None
        return complex(self.eigenvalues[0])

    @property
    def unstable_count(self) -> int:
        return int(np.sum(self.eigenvalues.real > POSITIVE_RE))


@dataclass
class SweepResult:
    name: str
    values: np.ndarray
    points: list[SweepPoint]
    model: str
    p0: ModelParams

    def params_at(self, value: float) -> ModelParams:
        return self.p0.replace(**{self.name: float(value)})


@dataclass(frozen=True)
class BifurcationEvent:
    kind: str  # pitchfork | hopf | takens-bogdanov
    parameter: str
    value: float
    eigenvalues: tuple[complex, ...]
    frequency: float | None = None
    change: int = 0  # change in the number of unstable eigenvalues

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "parameter": self.parameter,
            "value": self.value,
            "frequency": self.frequency,
            "change": self.change,
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
        }


def sweep_values(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError("step must be positive")
    if hi < lo:
        raise ValueError("range must satisfy lo <= hi")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _spectrum(model: str, polar: np.ndarray, p: ModelParams) -> np.ndarray:
    vf = get_model(model)
    if vf.name == "polar":
        return eigenvalues(vf.jacobian(polar, p)[:6, :6])
    x = modes_array_from_polar(polar)[0]
    if vf.name == "amplitude":
        x = x[[0, 1, 4, 5]]
    return drop_neutral(eigenvalues(vf.jacobian(x, p)), vf.translation_modes(x))


def _amplitude_stable(polar: np.ndarray, p: ModelParams) -> bool:
    vf = get_model("amplitude")
    x = np.array([polar[0], 0.0, polar[3], 0.0])
    eigs = drop_neutral(eigenvalues(vf.jacobian(x, p)), vf.translation_modes(x))
    return bool(np.all(eigs.real < 0))


def _squares_seed(p: ModelParams) -> np.ndarray | None:
    try:
        return squares_state(p)
    except ValueError:
        return None


def _solve_point(model: str, p: ModelParams, value: float, seed) -> SweepPoint:
    if seed is None:
        return SweepPoint(value, None, False, math.nan, np.array([]), "Unknown", None, error="no seed")
    res = find_equilibrium("polar", seed, p)
    if not res.converged:
        return SweepPoint(
            value, res.state, False, res.residual_norm, np.array([]), "Unknown", None,
            error=f"Newton failed, residual {res.residual_norm:.3e}",
        )
    eigs = _spectrum(model, res.state, p)
    try:
        label = classify_equilibrium(res.state, p, model="polar").label
    except ClassificationError:
        label = "Unknown"
    return SweepPoint(
        value, res.state, True, res.residual_norm, eigs, label,
        bool(np.all(eigs.real < 0)), _amplitude_stable(res.state, p),
    )


def sweep_parameter(model, p0: ModelParams, name: str, range_: tuple[float, float, float], seed=None) -> SweepResult:
    """Continue squares over ``name`` in ``[lo, hi]`` with the previous solution as seed.

    A failed point is recorded and the next one is re-seeded from the
    closed-form squares state.
    """
    model = get_model(model).name
    if model not in SWEEP_MODELS:
        raise ValueError(f"sweeps run on {SWEEP_MODELS}, not {model!r}")
    if name not in ModelParams.KEYS:
        raise ValueError(f"unknown parameter {name!r}")
    values = sweep_values(*range_)
    points = []
    prev = None if seed is None else np.asarray(seed, dtype=float)
    for v in values:
        p = p0.replace(**{name: float(v)})
        guess = prev if prev is not None else _squares_seed(p)
        try:
            pt = _solve_point(model, p, float(v), guess)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            pt = SweepPoint(float(v), None, False, math.nan, np.array([]), "Unknown", None, error=str(exc))
        points.append(pt)
        prev = pt.state if pt.converged else None
    return SweepResult(name, values, points, model, p0)


def _classify_crossing(sr: SweepResult, value: float, point: SweepPoint, change: int) -> BifurcationEvent:
    eigs = point.eigenvalues
    k = abs(change)
    order = np.argsort(np.abs(eigs.real), kind="stable")
    crossing = eigs[order[:k]]
    small = int(np.sum(np.abs(eigs) < TB_SMALL))
    if small >= 2 * k:
        kind, freq = "takens-bogdanov", None
    elif np.max(np.abs(crossing.imag)) > HOPF_IM:
        kind, freq = "hopf", float(np.mean(np.abs(crossing.imag)))
    else:
        kind, freq = "pitchfork", None
    return BifurcationEvent(kind, sr.name, value, tuple(complex(z) for z in crossing), freq, change)


def refine_crossing(sr: SweepResult, left: SweepPoint, right: SweepPoint, tol: float = PARAM_TOL):
    """Bisect between two sweep points, re-solving the equilibrium at each trial value."""
    a, b = left, right
    target = left.unstable_count
    while abs(b.value - a.value) > tol:
        mid = 0.5 * (a.value + b.value)
        m = _solve_point(sr.model, sr.params_at(mid), mid, a.state)
        if not m.converged:
            break
        if m.unstable_count == target:
            a = m
        else:
            b = m
    mid = 0.5 * (a.value + b.value)
    m = _solve_point(sr.model, sr.params_at(mid), mid, a.state)
    return mid, (m if m.converged else b)


def detect_bifurcations(sr: SweepResult, tol: float = PARAM_TOL) -> list[BifurcationEvent]:
    """Changes in the number of unstable eigenvalues between consecutive points."""
    events = []
    pts = sr.points
    for left, right in zip(pts, pts[1:]):
        if not (left.converged and right.converged):
            continue
        change = right.unstable_count - left.unstable_count
        if change == 0:
            continue
        value, at = refine_crossing(sr, left, right, tol)
        events.append(_classify_crossing(sr, value, at, change))
    return events


# ---------------------------------------------------------------------------
# branch following


@dataclass
class BranchPoint:
    value: float
    amplitude: float
    label: str
    stability: str
    state: np.ndarray | None = None
    orbit: PeriodicOrbit | None = None
    period: float | None = None


@dataclass
class Branch:
    kind: str  # equilibrium | periodic
    parameter: str
    points: list[BranchPoint] = field(default_factory=list)
    status: str = "ok"


def _critical_vector(J: np.ndarray, event: BifurcationEvent, basis: np.ndarray | None):
    """Eigenvector of the crossing eigenvalue, projected into ``basis`` when given."""
    A = J if basis is None else basis.T @ J @ basis
    eigs = eigenvalues(A)
    lam = eigs[int(np.argmin(np.abs(eigs - 1j * abs(event.eigenvalues[0].imag))))]
    v = eigenvector(A, lam)
    if basis is not None:
        v = basis @ v
    return lam, v


SECTORS = {"x": ("my",), "diagonal": ("md",)}


def sector_basis(sector) -> np.ndarray | None:
    """Orthonormal basis of a symmetry sector of the polar core.

    ``"x"`` is the fixed space of ``m_y`` (``c_y = d_y = 0``), ``"diagonal"``
    that of ``m_d``; ``None`` means the whole core.
    """
    from .symmetry import GroupElement, act_on_core, fixed_subspace

    if sector is None:
        return None
    if isinstance(sector, str):
        if sector not in SECTORS:
            raise ValueError(f"unknown sector {sector!r}; choose from {sorted(SECTORS)}")
        return fixed_subspace(act_on_core, [GroupElement(n) for n in SECTORS[sector]], 6)
    return np.asarray(sector, dtype=float)


def _shear_amplitude(state: np.ndarray) -> float:
    return float(np.max(np.abs(state[[1, 2, 4, 5]])))


def _verdict(eigs) -> str:
    eigs = np.asarray(eigs)
    if np.any(eigs.real > 1e-9):
        return "unstable"
    if np.all(eigs.real < -1e-9):
        return "stable"
    return "marginal"


def follow_branch(
    model,
    p: ModelParams,
    event: BifurcationEvent,
    direction: int = 1,
    n_steps: int = 10,
    step: float = 0.02,
    sector="x",
    end: float | None = None,
) -> Branch:
    """Natural-parameter continuation of the solution born at ``event``.

    ``sector`` selects the symmetry sector of the new branch (see
    :func:`sector_basis`); the default ``"x"`` seeds x-shear, giving TSq at a
    pitchfork and PSq at a Hopf point.  ``end``, if given, is included as the
    last parameter value.  Computation is in the polar core whatever
    ``model`` is.
    """
    get_model(model)
    basis = sector_basis(sector)
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    name = event.parameter
    kind = "periodic" if event.kind == "hopf" else "equilibrium"
    branch = Branch(kind, name)
    if n_steps <= 0:
        return branch
    values = [event.value + direction * step * (i + 1) for i in range(n_steps)]
    if end is not None:
        values = [v for v in values if direction * (end - v) > 1e-12] + [float(end)]
    p_at = lambda v: p.replace(**{name: float(v)})  # noqa: E731

    p_c = p_at(event.value)
    base = squares_state(p_c)
    J = get_model("polar").jacobian(base, p_c)[:6, :6]
    lam, v = _critical_vector(J, event, basis)
    first = abs(values[0] - event.value)
    if kind == "equilibrium":
        v = v.real / np.max(np.abs(v.real))
        return _follow_equilibria(branch, p_at, values, v, basis, first)
    v = v / np.max(np.abs(v))
    return _follow_orbits(branch, p_at, values, v, abs(lam.imag), basis, first)


def _start_amplitudes(first_step: float):
    h = math.sqrt(max(abs(first_step), 1e-6))
    return [h * f for f in (1.0, 0.5, 2.0, 0.25, 4.0)]


def _follow_equilibria(branch: Branch, p_at, values, v, basis, first: float) -> Branch:
    prev = None
    for val in values:
        p = p_at(val)
        if prev is None:
            res = None
            for eps in _start_amplitudes(first):
                guess = squares_state(p)
                guess[:6] += eps * v
                trial = find_equilibrium("polar", guess, p, basis=basis)
                if trial.converged and _shear_amplitude(trial.state) > 1e-6:
                    res = trial
                    break
            if res is None:
                raise BranchError("no bifurcating equilibrium in this direction")
        else:
            res = find_equilibrium("polar", prev, p, basis=basis)
            if not res.converged or _shear_amplitude(res.state) <= 1e-6:
                branch.status = f"continuation stopped at {branch.parameter}={val:.6g}"
                return branch
        try:
            label = classify_equilibrium(res.state, p, model="polar").label
        except ClassificationError:
            label = "Unknown"
        branch.points.append(
            BranchPoint(val, _shear_amplitude(res.state), label, _verdict(res.eigenvalues), res.state.copy())
        )
        prev = res.state
    return branch


def _follow_orbits(branch: Branch, p_at, values, v, omega, basis, first: float) -> Branch:
    prev: PeriodicOrbit | None = None
    for val in values:
        p = p_at(val)
        orbit = None
        if prev is None:
            for eps in _start_amplitudes(first):
                guess = squares_state(p)
                guess[:6] += eps * v.real
                try:
                    orbit = find_periodic_orbit("polar", p, guess, 2 * math.pi / omega, basis=basis)
                    break
                except (OrbitError, ValueError, ArithmeticError):
                    continue
            if orbit is None:
                raise BranchError("no bifurcating periodic orbit in this direction")
        else:
            try:
                orbit = find_periodic_orbit("polar", p, prev.states[0], prev.period, basis=basis)
            except (OrbitError, ValueError, ArithmeticError) as exc:
                branch.status = f"continuation stopped at {branch.parameter}={val:.6g}: {exc}"
                return branch
        try:
            label = classify_orbit(orbit).label
        except ClassificationError:
            label = "Unknown"
        branch.points.append(
            BranchPoint(val, orbit.diameter, label, stability_verdict(orbit.multipliers), orbit.states[0].copy(),
                        orbit, orbit.period)
        )
        prev = orbit
    return branch
