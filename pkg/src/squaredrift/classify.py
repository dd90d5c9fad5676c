"""Isotropy labels for equilibria and periodic orbits, and drift accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .models import get_model, polar_array_from_modes
from .symmetry import (
    DIHEDRAL_NAMES,
    IDENTITY,
    GroupElement,
    SpatioTemporalSymmetry,
    TemporalShift,
    act_on_core,
    act_on_nf_core,
    act_on_orbit,
    conjugate,
    isotropy_of_core,
)

EQUILIBRIUM_RESIDUAL = 1e-8
DEGENERATE_DIAMETER = 1e-10
SHIFTS = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))


class ClassificationError(ValueError):
    """Input is not a valid equilibrium or orbit for classification."""


@dataclass(frozen=True)
class SolutionLabel:
    label: str
    generators: tuple[SpatioTemporalSymmetry, ...] = ()
    residual: float = 0.0
    group: frozenset = frozenset()
    conjugator: GroupElement = IDENTITY
    circulation: int | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "generators": [str(g) for g in self.generators],
            "group": sorted(str(g) for g in self.group),
            "residual": self.residual,
            "conjugator": str(self.conjugator),
            "circulation": self.circulation,
        }


def _st(name: str, shift=0) -> SpatioTemporalSymmetry:
    return SpatioTemporalSymmetry(GroupElement(name), TemporalShift(Fraction(shift)))


# defining generators and full invariance groups, before conjugation
CANONICAL_GENERATORS = {
    "PSq": (_st("my"), _st("mx", Fraction(1, 2))),
    "DPSq": (_st("md"), _st("mdp", Fraction(1, 2))),
    "APW": (_st("rq", Fraction(1, 4)),),
}


def generate_group(generators) -> frozenset:
    """Closure of a set of spatio-temporal symmetries (dihedral part and shift only)."""
    group = {_st("e")}
    frontier = list(group)
    gens = [SpatioTemporalSymmetry(GroupElement(g.spatial.dihedral), g.temporal) for g in generators]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = a * g
                if b not in group:
                    group.add(b)
                    nxt.append(b)
        frontier = nxt
    return frozenset(group)


CANONICAL_GROUPS = {label: generate_group(gens) for label, gens in CANONICAL_GENERATORS.items()}


def _conjugate_st(h: GroupElement, g: SpatioTemporalSymmetry) -> SpatioTemporalSymmetry:
    return SpatioTemporalSymmetry(conjugate(h, g.spatial), g.temporal)


def _conjugate_set(h: GroupElement, group) -> frozenset:
    return frozenset(_conjugate_st(h, g) for g in group)


def is_closed_group(elements) -> bool:
    elements = frozenset(elements)
    return all(a * b in elements for a in elements for b in elements)


# ---------------------------------------------------------------------------
# equilibria


def _state_array(s, model):
    if hasattr(s, "to_array"):
        from .states import model_of_state

        return s.to_array(), model or model_of_state(s)
    if model is None:
        raise ClassificationError("model is required for array states")
    return np.asarray(s, dtype=float), model


def _equilibrium_core(x, model, p):
    """Residual and a translation-free core for the equilibrium test."""
    vf = get_model(model)
    if vf.name == "full":
        polar = polar_array_from_modes(x)[0]
        resid = get_model("polar").rhs(polar, p)[:6]
        return resid, polar[:6], "polar"
    if vf.name == "amplitude":
        core = np.array([math.hypot(x[0], x[1]), 0.0, 0.0, math.hypot(x[2], x[3]), 0.0, 0.0])
        return vf.rhs(x, p), core, "polar"
    return vf.rhs(x, p)[: len(vf.core)], x[: len(vf.core)], vf.name


def _conjugator_to(found: frozenset, target_names: tuple[str, ...]) -> GroupElement | None:
    target = frozenset(GroupElement(n) for n in target_names)
    for name in DIHEDRAL_NAMES:
        h = GroupElement(name)
        if frozenset(conjugate(h, g) for g in target) == found:
            return h
    return None


def classify_equilibrium(s, p, tol: float = 1e-8, model: str | None = None) -> SolutionLabel:
    """Label an equilibrium by its amplitude structure and dihedral isotropy."""
    x, model = _state_array(s, model)
    resid, core, kind = _equilibrium_core(x, model, p)
    res = float(np.max(np.abs(resid), initial=0.0))
    if res > EQUILIBRIUM_RESIDUAL:
        raise ClassificationError(f"not an equilibrium: residual {res:.3e}")
    scale = tol * (1.0 + float(np.max(np.abs(core), initial=0.0)))
    if np.max(np.abs(core), initial=0.0) <= scale:
        return SolutionLabel("Trivial", residual=res)

    if kind == "polar":
        act = act_on_core
        rx, ry = core[0], core[3]
        if (rx <= scale) != (ry <= scale):
            return SolutionLabel("Rolls", residual=res)
    elif kind == "pitchfork":
        act = lambda g, v: act_on_nf_core(g, v, "pitchfork")  # noqa: E731
    elif kind == "hopf":
        act = lambda g, v: act_on_nf_core(g, v, "hopf")  # noqa: E731
    else:
        raise ClassificationError(f"cannot classify equilibria of model {model!r}")

    found = isotropy_of_core(core, act, tol)
    gens = lambda names, h: tuple(SpatioTemporalSymmetry(conjugate(h, GroupElement(n))) for n in names)  # noqa: E731
    if len(found) == 8 and kind == "polar":
        return SolutionLabel("Squares", gens(("rq", "mx"), IDENTITY), res, frozenset(SpatioTemporalSymmetry(g) for g in found))
    group = frozenset(SpatioTemporalSymmetry(g) for g in found)
    for label, names in (("TSq", ("my",)), ("DTSq", ("md",))):
        h = _conjugator_to(found, ("e",) + names)
        if h is not None:
            return SolutionLabel(label, gens(names, h), res, group, h)
    return SolutionLabel("Unknown", (), res, group)


# ---------------------------------------------------------------------------
# periodic orbits


def orbit_symmetry_distances(orbit) -> dict[SpatioTemporalSymmetry, float]:
    """Relative distance between the orbit and each of its 32 candidate images."""
    core = orbit.samples
    diameter = float(np.max(np.ptp(core, axis=0))) if len(core) else 0.0
    if not diameter >= DEGENERATE_DIAMETER:
        raise ClassificationError(f"degenerate orbit: diameter {diameter:.3e}")
    nc = core.shape[1]
    out = {}
    for name in DIHEDRAL_NAMES:
        for shift in SHIFTS:
            gamma = _st(name, shift)
            image = act_on_orbit(gamma, orbit).samples[:, :nc]
            out[gamma] = float(np.max(np.abs(image - core))) / diameter
    return out


def classify_orbit(orbit, tol: float = 1e-6) -> SolutionLabel:
    """Spatio-temporal isotropy label of a sampled periodic orbit."""
    if not (orbit.period > 0):
        raise ClassificationError("orbit period must be positive")
    dist = orbit_symmetry_distances(orbit)
    group = frozenset(g for g, d in dist.items() if d <= tol)
    residual = max(dist[g] for g in group)
    for label, canon in CANONICAL_GROUPS.items():
        for name in DIHEDRAL_NAMES:
            h = GroupElement(name)
            if _conjugate_set(h, canon) == group:
                gens = tuple(_conjugate_st(h, g) for g in CANONICAL_GENERATORS[label])
                circulation = None
                if label == "APW":
                    circulation = 1 if _st("rq", Fraction(1, 4)) in group else -1
                return SolutionLabel(label, gens, residual, group, h, circulation)
    if len(group) > 1 and any(
        group < _conjugate_set(GroupElement(name), canon)
        for canon in CANONICAL_GROUPS.values()
        for name in DIHEDRAL_NAMES
    ):
        gens = tuple(sorted((g for g in group if g != _st("e")), key=str))
        return SolutionLabel("CrossRollLike", gens, residual, group)
    gens = tuple(sorted((g for g in group if g != _st("e")), key=str))
    return SolutionLabel("Unknown", gens, residual, group)


# ---------------------------------------------------------------------------
# drift


@dataclass(frozen=True)
class DriftProfile:
    """Pattern drift along a solution.

    For an orbit ``quarters`` holds the phase change over each quarter
    period, starting at the first sample; ``rate`` is set for equilibria.
    """

    net: tuple[float, float]
    quarters: tuple[tuple[float, float], ...] | None = None
    rate: tuple[float, float] | None = None
    excursion: float = 0.0
    period: float | None = None

    def relative_net(self) -> float:
        """``|net drift|`` relative to the peak phase excursion."""
        size = max(abs(self.net[0]), abs(self.net[1]))
        if size == 0.0:
            return 0.0
        return size / self.excursion if self.excursion > 0 else math.inf

    def quarter_turn_sense(self, tol: float = 1e-6) -> int:
        """+1 / -1 if each quarter drift is the previous one turned by +-90 degrees, else 0."""
        if not self.quarters:
            return 0
        q = np.array(self.quarters)
        scale = float(np.max(np.abs(q)))
        if scale == 0.0:
            return 0
        for sense, turn in ((1, np.array([[0.0, -1.0], [1.0, 0.0]])), (-1, np.array([[0.0, 1.0], [-1.0, 0.0]]))):
            nxt = np.roll(q, -1, axis=0)
            if np.max(np.abs(nxt - q @ turn.T)) <= tol * scale:
                return sense
        return 0

    def directions(self) -> list[str]:
        """Dominant direction of each quarter drift, e.g. ``['+x', '+y', '-x', '-y']``."""
        out = []
        for dx, dy in self.quarters or ():
            if abs(dx) >= abs(dy):
                out.append(("+" if dx >= 0 else "-") + "x")
            else:
                out.append(("+" if dy >= 0 else "-") + "y")
        return out

    def to_dict(self) -> dict:
        return {
            "net": list(self.net),
            "quarters": None if self.quarters is None else [list(q) for q in self.quarters],
            "rate": None if self.rate is None else list(self.rate),
            "excursion": self.excursion,
            "period": self.period,
        }


def _orbit_drift(orbit) -> DriftProfile:
    vf = orbit.vector_field
    if len(vf.drift) != 2:
        raise ClassificationError(f"model {vf.name!r} carries no drift phases")
    phases = orbit.drift
    n = orbit.n_samples
    net = phases[-1] - phases[0]
    marks = [round(i * n / 4) for i in range(5)] if n % 4 == 0 else None
    if marks is not None:
        at = phases[marks]
    else:
        t = np.arange(n + 1) / n
        at = np.column_stack([np.interp(np.linspace(0, 1, 5), t, phases[:, j]) for j in range(2)])
    quarters = tuple((float(a), float(b)) for a, b in np.diff(at, axis=0))
    excursion = float(np.max(np.ptp(phases, axis=0)))
    return DriftProfile((float(net[0]), float(net[1])), quarters, None, excursion, orbit.period)


def _equilibrium_rate(x, model, p) -> tuple[float, float]:
    vf = get_model(model)
    f = vf.rhs(x, p)
    if vf.drift:
        return float(f[vf.drift[0]]), float(f[vf.drift[1]])
    if vf.name == "full":
        rates = []
        for i in (0, 4):
            a = complex(x[i], x[i + 1])
            da = complex(f[i], f[i + 1])
            rates.append((da / a).imag if abs(a) > 0 else 0.0)
        return rates[0], rates[1]
    return 0.0, 0.0


def drift_profile(solution, p=None, model: str | None = None) -> DriftProfile:
    """Drift of a periodic orbit (net and per quarter) or an equilibrium (rates)."""
    if hasattr(solution, "states") and hasattr(solution, "period"):
        return _orbit_drift(solution)
    if hasattr(solution, "residual_norm"):
        x, model = solution.state, solution.model
    else:
        x, model = _state_array(solution, model)
    if p is None:
        raise ClassificationError("parameters are required for an equilibrium drift profile")
    rate = _equilibrium_rate(np.asarray(x, dtype=float), model, p)
    return DriftProfile((0.0, 0.0), None, rate, 0.0, None)
