"""The symmetry group D4 x T^2 of the square lattice and its actions.

A spatial element is stored as a signed permutation ``P`` of the two
horizontal axes together with a translation ``t``; it acts on positions as
``x -> P x + t``.  Composition therefore reads

    (P1, t1) * (P2, t2) = (P1 P2, P1 t2 + t1)

which is exactly how the reflections conjugate translations (``m_x`` negates
``delta_x``, ``m_d`` swaps the two shifts).  Translations are kept unwrapped;
they are reduced modulo ``2 pi / k`` only when compared or printed.

Temporal shifts by a quarter or half period (``t_q``, ``t_h``) combine with a
spatial element into a :class:`SpatioTemporalSymmetry`, which acts on sampled
periodic orbits.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .states import (
    AmplitudeState,
    HopfNFState,
    ModeState,
    PitchforkNFState,
    PolarState,
    model_of_state,
)

_MATRICES = {
    "e": ((1, 0), (0, 1)),
    "rq": ((0, 1), (-1, 0)),
    "rq2": ((-1, 0), (0, -1)),
    "rq3": ((0, -1), (1, 0)),
    "mx": ((-1, 0), (0, 1)),
    "my": ((1, 0), (0, -1)),
    "md": ((0, 1), (1, 0)),
    "mdp": ((0, -1), (-1, 0)),
}
_NAME_OF = {m: name for name, m in _MATRICES.items()}

DIHEDRAL_NAMES: tuple[str, ...] = tuple(_MATRICES)
REFLECTIONS = ("mx", "my", "md", "mdp")
ROTATIONS = ("rq", "rq2", "rq3")


def _matmul(a, b):
    return tuple(
        tuple(sum(a[i][l] * b[l][j] for l in range(2)) for j in range(2)) for i in range(2)
    )


def _signed_perm(name: str) -> tuple[tuple[int, int], tuple[int, int]]:
    """Rows of ``P`` as ``(source index, sign)``: ``new[i] = sign * old[j]``."""
    rows = []
    for row in _MATRICES[name]:
        j = 0 if row[0] != 0 else 1
        rows.append((j, row[j]))
    return tuple(rows)


_PERMS = {name: _signed_perm(name) for name in _MATRICES}


def _fmt(v: float) -> str:
    return repr(float(v))


@dataclass(frozen=True)
class GroupElement:
    """An element of D4 x T^2: dihedral part followed by a translation."""

    dihedral: str = "e"
    translation: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.dihedral not in _MATRICES:
            raise ValueError(f"unknown dihedral element {self.dihedral!r}")
        tx, ty = self.translation
        object.__setattr__(self, "translation", (float(tx), float(ty)))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(_MATRICES[self.dihedral], dtype=float)

    @property
    def is_pure_dihedral(self) -> bool:
        return self.translation == (0.0, 0.0)

    @property
    def order(self) -> int:
        """Order of the dihedral part."""
        return dihedral_order(self.dihedral)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)

    def inverse(self) -> "GroupElement":
        inv = _NAME_OF[tuple(zip(*_MATRICES[self.dihedral]))]
        tx, ty = self.translation
        px = _MATRICES[inv]
        return GroupElement(inv, (-(px[0][0] * tx + px[0][1] * ty), -(px[1][0] * tx + px[1][1] * ty)))

    def reduced(self, k: float = 1.0) -> "GroupElement":
        """Copy with translations wrapped into ``[0, 2 pi / k)``."""
        period = 2 * math.pi / k
        tx, ty = self.translation
        return GroupElement(self.dihedral, (tx % period, ty % period))

    def close_to(self, other: "GroupElement", k: float = 1.0, tol: float = 1e-12) -> bool:
        if self.dihedral != other.dihedral:
            return False
        period = 2 * math.pi / k
        for a, b in zip(self.translation, other.translation):
            d = (a - b) % period
            if min(d, period - d) > tol:
                return False
        return True

    def __str__(self) -> str:
        if self.is_pure_dihedral:
            return self.dihedral
        tx, ty = self.translation
        shift = f"t({_fmt(tx)},{_fmt(ty)})"
        return shift if self.dihedral == "e" else f"{shift}*{self.dihedral}"


def dihedral_order(name: str) -> int:
    g = GroupElement(name)
    x, n = g, 1
    while x.dihedral != "e":
        x, n = compose(x, g), n + 1
    return n


IDENTITY = GroupElement("e")


def element(name: str) -> GroupElement:
    return GroupElement(name)


def translation(dx: float, dy: float) -> GroupElement:
    return GroupElement("e", (dx, dy))


def compose(g1: GroupElement, g2: GroupElement) -> GroupElement:
    """The element acting as ``g1`` after ``g2``."""
    p1 = _MATRICES[g1.dihedral]
    p = _matmul(p1, _MATRICES[g2.dihedral])
    t2x, t2y = g2.translation
    t1x, t1y = g1.translation
    tx = p1[0][0] * t2x + p1[0][1] * t2y + t1x
    ty = p1[1][0] * t2x + p1[1][1] * t2y + t1y
    return GroupElement(_NAME_OF[p], (tx, ty))


def conjugate(g: GroupElement, h: GroupElement) -> GroupElement:
    """``g h g^-1``."""
    return compose(compose(g, h), g.inverse())


_ELEMENT_RE = re.compile(r"^t\(([^,()]+),([^,()]+)\)$")


def parse_element(text: str) -> GroupElement:
    """Parse ``"mx"``, ``"t(0.1,0.2)"`` or ``"t(0.1,0.2)*md"``."""
    text = text.replace(" ", "")
    result = IDENTITY
    for part in text.split("*"):
        m = _ELEMENT_RE.match(part)
        if m:
            g = translation(float(m.group(1)), float(m.group(2)))
        elif part in _MATRICES:
            g = GroupElement(part)
        else:
            raise ValueError(f"cannot parse group element {text!r}")
        result = compose(result, g)
    return result


# ---------------------------------------------------------------------------
# temporal shifts and spatio-temporal symmetries

_SHIFT_NAMES = {Fraction(0): "", Fraction(1, 2): "th", Fraction(1, 4): "tq", Fraction(3, 4): "tq3"}
_SHIFT_OF = {name: frac for frac, name in _SHIFT_NAMES.items() if name}


@dataclass(frozen=True)
class TemporalShift:
    """Advance time by ``fraction`` of the period; denominators 1, 2 or 4."""

    fraction: Fraction = Fraction(0)

    def __post_init__(self):
        frac = Fraction(self.fraction) % 1
        if frac.denominator not in (1, 2, 4):
            raise ValueError(f"temporal shift {frac} is not a multiple of a quarter period")
        object.__setattr__(self, "fraction", frac)

    def __add__(self, other: "TemporalShift") -> "TemporalShift":
        return TemporalShift(self.fraction + other.fraction)

    def __str__(self) -> str:
        return _SHIFT_NAMES[self.fraction]


T_HALF = TemporalShift(Fraction(1, 2))
T_QUARTER = TemporalShift(Fraction(1, 4))
NO_SHIFT = TemporalShift(Fraction(0))


@dataclass(frozen=True)
class SpatioTemporalSymmetry:
    spatial: GroupElement = IDENTITY
    temporal: TemporalShift = field(default_factory=TemporalShift)

    def __mul__(self, other: "SpatioTemporalSymmetry") -> "SpatioTemporalSymmetry":
        return SpatioTemporalSymmetry(compose(self.spatial, other.spatial), self.temporal + other.temporal)

    def inverse(self) -> "SpatioTemporalSymmetry":
        return SpatioTemporalSymmetry(self.spatial.inverse(), TemporalShift(-self.temporal.fraction))

    @property
    def key(self) -> tuple[str, Fraction]:
        return (self.spatial.dihedral, self.temporal.fraction)

    def __str__(self) -> str:
        shift = str(self.temporal)
        spatial = str(self.spatial)
        if not shift:
            return spatial
        return shift if spatial == "e" else f"{shift}*{spatial}"


def spatiotemporal(name: str, shift: Fraction | int = 0) -> SpatioTemporalSymmetry:
    return SpatioTemporalSymmetry(GroupElement(name), TemporalShift(Fraction(shift)))


def parse_spatiotemporal(text: str) -> SpatioTemporalSymmetry:
    """Parse labels such as ``"tq*rq"``, ``"th*mx"`` or ``"my"``."""
    text = text.replace(" ", "")
    shift = NO_SHIFT
    parts = text.split("*")
    if parts[0] in _SHIFT_OF:
        shift = TemporalShift(_SHIFT_OF[parts[0]])
        parts = parts[1:]
    spatial = parse_element("*".join(parts)) if parts else IDENTITY
    return SpatioTemporalSymmetry(spatial, shift)


# ---------------------------------------------------------------------------
# actions on flat arrays


def _pair_action(name: str, vx, vy):
    (jx, sx), (jy, sy) = _PERMS[name]
    src = (vx, vy)
    return sx * src[jx], sy * src[jy]


def _complex_pair_action(name: str, ax: complex, ay: complex):
    """Reflection of an axis conjugates the roll amplitude along it."""
    (jx, sx), (jy, sy) = _PERMS[name]
    src = (ax, ay)
    nx = src[jx] if sx > 0 else src[jx].conjugate()
    ny = src[jy] if sy > 0 else src[jy].conjugate()
    return nx, ny


def act_on_modes(g: GroupElement, s, k: float = 1.0):
    """Action on ``(a_x, c_x, d_x, a_y, c_y, d_y)`` (linear, so also on tangents)."""
    if isinstance(s, ModeState):
        return ModeState.from_array(act_on_modes(g, s.to_array(), k))
    x = np.asarray(s, dtype=float)
    ax, ay = _complex_pair_action(g.dihedral, complex(x[0], x[1]), complex(x[4], x[5]))
    cx, cy = _pair_action(g.dihedral, x[2], x[6])
    dx, dy = _pair_action(g.dihedral, x[3], x[7])
    tx, ty = g.translation
    if tx:
        ax = ax * complex(math.cos(k * tx), math.sin(k * tx))
    if ty:
        ay = ay * complex(math.cos(k * ty), math.sin(k * ty))
    return np.array([ax.real, ax.imag, cx, dx, ay.real, ay.imag, cy, dy])


def act_on_amplitudes(g: GroupElement, s, k: float = 1.0):
    """Action on the roll amplitudes ``(a_x, a_y)`` alone."""
    if isinstance(s, AmplitudeState):
        return AmplitudeState.from_array(act_on_amplitudes(g, s.to_array(), k))
    x = np.asarray(s, dtype=float)
    full = np.array([x[0], x[1], 0.0, 0.0, x[2], x[3], 0.0, 0.0])
    y = act_on_modes(g, full, k)
    return y[[0, 1, 4, 5]]


def act_on_core(g: GroupElement, x):
    """D4 action on the translation-free core ``(r_x, c_x, d_x, r_y, c_y, d_y)``.

    Translations act trivially here.  Works on any trailing-axis batch.
    """
    x = np.asarray(x, dtype=float)
    (jx, sx), (jy, sy) = _PERMS[g.dihedral]
    out = np.empty_like(x)
    off = (0, 3)
    out[..., 0] = x[..., off[jx]]
    out[..., 3] = x[..., off[jy]]
    out[..., 1] = sx * x[..., off[jx] + 1]
    out[..., 2] = sx * x[..., off[jx] + 2]
    out[..., 4] = sy * x[..., off[jy] + 1]
    out[..., 5] = sy * x[..., off[jy] + 2]
    return out


def act_on_phases(g: GroupElement, phases, scale: float = 1.0, tangent: bool = False):
    """Phases move like positions: ``phi -> P phi + scale * t``."""
    phases = np.asarray(phases, dtype=float)
    (jx, sx), (jy, sy) = _PERMS[g.dihedral]
    out = np.empty_like(phases)
    out[..., 0] = sx * phases[..., jx]
    out[..., 1] = sy * phases[..., jy]
    if not tangent:
        out[..., 0] += scale * g.translation[0]
        out[..., 1] += scale * g.translation[1]
    return out


def act_on_polar(g: GroupElement, s, k: float = 1.0, tangent: bool = False):
    if isinstance(s, PolarState):
        return PolarState.from_array(act_on_polar(g, s.to_array(), k))
    x = np.asarray(s, dtype=float)
    out = np.empty_like(x)
    out[..., :6] = act_on_core(g, x[..., :6])
    out[..., 6:8] = act_on_phases(g, x[..., 6:8], k, tangent)
    return out


def act_on_nf_core(g: GroupElement, v, kind: str):
    """Action on the critical amplitudes ``v`` (real pair or complex pair)."""
    v = np.asarray(v, dtype=float)
    (jx, sx), (jy, sy) = _PERMS[g.dihedral]
    out = np.empty_like(v)
    if kind == "pitchfork":
        out[..., 0] = sx * v[..., jx]
        out[..., 1] = sy * v[..., jy]
    elif kind == "hopf":
        out[..., 0:2] = sx * v[..., 2 * jx:2 * jx + 2]
        out[..., 2:4] = sy * v[..., 2 * jy:2 * jy + 2]
    else:
        raise ValueError(f"unknown normal form kind {kind!r}")
    return out


def act_on_nf(g: GroupElement, s, kind: str | None = None, tangent: bool = False):
    """Action on a normal-form state ``(v_x, v_y, phi_x, phi_y)``."""
    if isinstance(s, PitchforkNFState):
        return PitchforkNFState.from_array(act_on_nf(g, s.to_array(), "pitchfork"))
    if isinstance(s, HopfNFState):
        return HopfNFState.from_array(act_on_nf(g, s.to_array(), "hopf"))
    x = np.asarray(s, dtype=float)
    nv = 2 if kind == "pitchfork" else 4
    out = np.empty_like(x)
    out[..., :nv] = act_on_nf_core(g, x[..., :nv], kind)
    out[..., nv:nv + 2] = act_on_phases(g, x[..., nv:nv + 2], 1.0, tangent)
    return out


def act_on_state(g: GroupElement, state, k: float = 1.0):
    """Act on any typed state object."""
    model = model_of_state(state)
    from .models import get_model

    return type(state).from_array(get_model(model).act(g, state.to_array(), k))


# ---------------------------------------------------------------------------
# checks


def verify_equivariance(model, g: GroupElement, s, p, k: float | None = None) -> float:
    """``max |F(g s) - g F(s)|`` for a registered vector field."""
    from .models import get_model

    vf = get_model(model)
    x = s.to_array() if hasattr(s, "to_array") else np.asarray(s, dtype=float)
    if k is None:
        k = getattr(p, "k", 1.0)
    lhs = vf.rhs(vf.act(g, x, k), p)
    rhs = vf.act(g, vf.rhs(x, p), k, tangent=True)
    return float(np.max(np.abs(lhs - rhs)))


def isotropy_of_state(s, tol: float = 1e-8, model: str | None = None, k: float = 1.0) -> frozenset:
    """Dihedral elements fixing ``s`` to relative tolerance ``tol``.

    Continuous translations are not searched.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    from .models import get_model

    if model is None:
        model = model_of_state(s)
    x = s.to_array() if hasattr(s, "to_array") else np.asarray(s, dtype=float)
    vf = get_model(model)
    scale = tol * (1.0 + float(np.max(np.abs(x), initial=0.0)))
    found = []
    for name in DIHEDRAL_NAMES:
        g = GroupElement(name)
        if np.max(np.abs(vf.act(g, x, k) - x), initial=0.0) <= scale:
            found.append(g)
    return frozenset(found)


def isotropy_of_core(x, act, tol: float) -> frozenset:
    """Same as :func:`isotropy_of_state` for an explicit core action."""
    x = np.asarray(x, dtype=float)
    scale = tol * (1.0 + float(np.max(np.abs(x), initial=0.0)))
    return frozenset(
        GroupElement(name)
        for name in DIHEDRAL_NAMES
        if np.max(np.abs(act(GroupElement(name), x) - x), initial=0.0) <= scale
    )


def is_closed(elements: Iterable[GroupElement]) -> bool:
    names = {g.dihedral for g in elements}
    return all(compose(GroupElement(a), GroupElement(b)).dihedral in names for a in names for b in names)


def action_matrix(act, g: GroupElement, dim: int) -> np.ndarray:
    """Matrix of a linear action, assembled column by column."""
    eye = np.eye(dim)
    return np.column_stack([act(g, eye[i]) for i in range(dim)])


def fixed_subspace(act, elements: Iterable[GroupElement], dim: int) -> np.ndarray:
    """Orthonormal basis (columns) of the subspace fixed by all ``elements``."""
    blocks = [action_matrix(act, g, dim) - np.eye(dim) for g in elements]
    if not blocks:
        return np.eye(dim)
    _, sv, vt = np.linalg.svd(np.vstack(blocks))
    rank = int(np.sum(sv > 1e-12))
    return vt[rank:].T.copy()


# ---------------------------------------------------------------------------
# periodic orbits

MIN_ORBIT_SAMPLES = 8


def act_on_orbit(gamma: SpatioTemporalSymmetry, orbit, k: float | None = None):
    """The orbit ``w(t) = gamma v(t - s T)`` for ``gamma = (g, s)``.

    Samples are rotated cyclically by the temporal fraction (Fourier
    interpolation when that is not a whole number of samples).  Drift phases
    are split into a periodic part and the net drift per period so that the
    shifted copy keeps its cumulative phase.  ``gamma`` is invariance of the
    orbit exactly when ``g v(t) = v(t + s T)``.
    """
    from .dynamics.orbits import shift_samples, with_states

    if isinstance(gamma, GroupElement):
        gamma = SpatioTemporalSymmetry(gamma)
    n = orbit.n_samples
    if n < MIN_ORBIT_SAMPLES or not (orbit.period > 0):
        raise ValueError(f"orbit needs a positive period and at least {MIN_ORBIT_SAMPLES} samples")
    vf = orbit.vector_field
    if k is None:
        k = getattr(orbit.params, "k", 1.0) if vf.drift_scale_from_k else 1.0
    frac = float(gamma.temporal.fraction)
    states = np.asarray(orbit.states, dtype=float)
    drift = list(vf.drift)
    net = states[-1, drift] - states[0, drift]
    ramp = np.arange(n)[:, None] / n
    periodic = states[:-1].copy()
    periodic[:, drift] -= ramp * net
    shifted = shift_samples(periodic, frac)
    shifted[:, drift] += (ramp - frac) * net
    last = shifted[0].copy()
    last[drift] += net
    shifted = np.vstack([shifted, last])
    out = np.array([vf.act(gamma.spatial, row, k) for row in shifted])
    basis = orbit.basis
    if basis is not None:
        basis = action_matrix(vf.core_act, gamma.spatial, len(vf.core)) @ basis
    return with_states(orbit, out, basis)
