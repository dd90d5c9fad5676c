"""Vector fields, Jacobians and closed-form branches.

Five right-hand sides are provided, each on a flat real array (complex
fields split into real and imaginary parts):

``amplitude``  roll/square amplitude equations ``(a_x, a_y)``
``full``       magnetoconvection model ``(a_x, c_x, d_x, a_y, c_y, d_y)``
``polar``      the same model with ``a = r e^{i theta}``
``pitchfork``  steady D4 normal form with drift
``hopf``       oscillatory D4 normal form with drift

Each is registered as a :class:`VectorField` carrying its Jacobian, its group
action, and which coordinates are dynamically active (the *core*) and which
are slaved drift phases.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import symmetry
from .dynamics.linalg import eigenvalues
from .states import (
    AmplitudeState,
    HopfNFParams,
    HopfNFState,
    ModelParams,
    ModeState,
    PitchforkNFParams,
    PitchforkNFState,
    PolarState,
)

PHASE_EPS = 1e-12


class AmbiguousPhaseWarning(UserWarning):
    """A roll amplitude is too small for its phase to be meaningful."""


def _arr(s) -> np.ndarray:
    return s.to_array() if hasattr(s, "to_array") else np.asarray(s, dtype=float)


# ---------------------------------------------------------------------------
# right-hand sides


def amplitude_rhs(s, p: ModelParams) -> np.ndarray:
    axr, axi, ayr, ayi = _arr(s)
    ax2 = axr * axr + axi * axi
    ay2 = ayr * ayr + ayi * ayi
    gx = p.mu - ax2 - (1.0 + p.beta) * ay2
    gy = p.mu - ay2 - (1.0 + p.beta) * ax2
    return np.array([gx * axr, gx * axi, gy * ayr, gy * ayi])


def full_rhs(s, p: ModelParams) -> np.ndarray:
    axr, axi, cx, dx, ayr, ayi, cy, dy = _arr(s)
    ax2 = axr * axr + axi * axi
    ay2 = ayr * ayr + ayi * ayi
    gx = p.mu - ax2 - (1.0 + p.beta) * ay2 - p.gamma * cx * cx
    gy = p.mu - ay2 - (1.0 + p.beta) * ax2 - p.gamma * cy * cy
    return np.array([
        gx * axr - p.D * cx * axi,
        gx * axi + p.D * cx * axr,
        -cx - p.Q * dx + ax2 * cx,
        p.zeta * cx - p.zeta * dx,
        gy * ayr - p.D * cy * ayi,
        gy * ayi + p.D * cy * ayr,
        -cy - p.Q * dy + ay2 * cy,
        p.zeta * cy - p.zeta * dy,
    ])


def polar_rhs(s, p: ModelParams) -> np.ndarray:
    rx, cx, dx, ry, cy, dy = _arr(s)[:6]
    rx2, ry2 = rx * rx, ry * ry
    return np.array([
        rx * (p.mu - rx2 - (1.0 + p.beta) * ry2 - p.gamma * cx * cx),
        -cx - p.Q * dx + rx2 * cx,
        p.zeta * cx - p.zeta * dx,
        ry * (p.mu - ry2 - (1.0 + p.beta) * rx2 - p.gamma * cy * cy),
        -cy - p.Q * dy + ry2 * cy,
        p.zeta * cy - p.zeta * dy,
        p.D * cx,
        p.D * cy,
    ])


def pitchfork_nf_rhs(s, p: PitchforkNFParams) -> np.ndarray:
    vx, vy = _arr(s)[:2]
    return np.array([
        p.lam * vx + p.A * vx ** 3 + p.B * vy * vy * vx,
        p.lam * vy + p.A * vy ** 3 + p.B * vx * vx * vy,
        p.D * vx,
        p.D * vy,
    ])


def _hopf_complex(vx: complex, vy: complex, p: HopfNFParams):
    lw = complex(p.lam, p.omega)
    nx = vx.real * vx.real + vx.imag * vx.imag
    ny = vy.real * vy.real + vy.imag * vy.imag
    fx = (lw + p.A * (nx + ny) + p.B * nx) * vx + p.C * vx.conjugate() * vy * vy
    fy = (lw + p.A * (nx + ny) + p.B * ny) * vy + p.C * vy.conjugate() * vx * vx
    return fx, fy


def hopf_nf_rhs(s, p: HopfNFParams) -> np.ndarray:
    x = _arr(s)
    vx, vy = complex(x[0], x[1]), complex(x[2], x[3])
    fx, fy = _hopf_complex(vx, vy, p)
    return np.array([fx.real, fx.imag, fy.real, fy.imag, (p.D * vx).real, (p.D * vy).real])


# ---------------------------------------------------------------------------
# Jacobians


def _roll_block(J, o, oo, u, w, U, W, c, G, p, with_shear: bool):
    """Rows of one roll amplitude; ``o``/``oo`` index its own/other amplitude."""
    J[o, o] = G - 2 * u * u
    J[o + 1, o + 1] = G - 2 * w * w
    J[o, o + 1] = -2 * u * w
    J[o + 1, o] = -2 * u * w
    J[o, oo] = -2 * (1 + p.beta) * U * u
    J[o, oo + 1] = -2 * (1 + p.beta) * W * u
    J[o + 1, oo] = -2 * (1 + p.beta) * U * w
    J[o + 1, oo + 1] = -2 * (1 + p.beta) * W * w
    if with_shear:
        J[o, o + 1] -= p.D * c
        J[o + 1, o] += p.D * c
        J[o, o + 2] = -2 * p.gamma * c * u - p.D * w
        J[o + 1, o + 2] = -2 * p.gamma * c * w + p.D * u
        J[o + 2, o] = 2 * u * c
        J[o + 2, o + 1] = 2 * w * c
        J[o + 2, o + 2] = u * u + w * w - 1
        J[o + 2, o + 3] = -p.Q
        J[o + 3, o + 2] = p.zeta
        J[o + 3, o + 3] = -p.zeta


def amplitude_jacobian(s, p: ModelParams) -> np.ndarray:
    axr, axi, ayr, ayi = _arr(s)
    ax2 = axr * axr + axi * axi
    ay2 = ayr * ayr + ayi * ayi
    J = np.zeros((4, 4))
    _roll_block(J, 0, 2, axr, axi, ayr, ayi, 0.0, p.mu - ax2 - (1 + p.beta) * ay2, p, False)
    _roll_block(J, 2, 0, ayr, ayi, axr, axi, 0.0, p.mu - ay2 - (1 + p.beta) * ax2, p, False)
    return J


def full_jacobian(s, p: ModelParams) -> np.ndarray:
    axr, axi, cx, dx, ayr, ayi, cy, dy = _arr(s)
    ax2 = axr * axr + axi * axi
    ay2 = ayr * ayr + ayi * ayi
    J = np.zeros((8, 8))
    gx = p.mu - ax2 - (1 + p.beta) * ay2 - p.gamma * cx * cx
    gy = p.mu - ay2 - (1 + p.beta) * ax2 - p.gamma * cy * cy
    _roll_block(J, 0, 4, axr, axi, ayr, ayi, cx, gx, p, True)
    _roll_block(J, 4, 0, ayr, ayi, axr, axi, cy, gy, p, True)
    return J


def polar_jacobian(s, p: ModelParams) -> np.ndarray:
    rx, cx, dx, ry, cy, dy = _arr(s)[:6]
    J = np.zeros((8, 8))
    for o, oo, r, R, c in ((0, 3, rx, ry, cx), (3, 0, ry, rx, cy)):
        G = p.mu - r * r - (1 + p.beta) * R * R - p.gamma * c * c
        J[o, o] = G - 2 * r * r
        J[o, oo] = -2 * (1 + p.beta) * R * r
        J[o, o + 1] = -2 * p.gamma * c * r
        J[o + 1, o] = 2 * r * c
        J[o + 1, o + 1] = r * r - 1
        J[o + 1, o + 2] = -p.Q
        J[o + 2, o + 1] = p.zeta
        J[o + 2, o + 2] = -p.zeta
    J[6, 1] = p.D
    J[7, 4] = p.D
    return J


def pitchfork_nf_jacobian(s, p: PitchforkNFParams) -> np.ndarray:
    vx, vy = _arr(s)[:2]
    J = np.zeros((4, 4))
    J[0, 0] = p.lam + 3 * p.A * vx * vx + p.B * vy * vy
    J[0, 1] = 2 * p.B * vy * vx
    J[1, 1] = p.lam + 3 * p.A * vy * vy + p.B * vx * vx
    J[1, 0] = 2 * p.B * vx * vy
    J[2, 0] = p.D
    J[3, 1] = p.D
    return J


def hopf_nf_jacobian(s, p: HopfNFParams) -> np.ndarray:
    x = _arr(s)
    v = (complex(x[0], x[1]), complex(x[2], x[3]))
    lw = complex(p.lam, p.omega)
    J = np.zeros((6, 6))
    for i in (0, 1):
        a, b = v[i], v[1 - i]
        na, nb = abs(a) ** 2, abs(b) ** 2
        # Wirtinger derivatives of the complex right-hand side for v_i
        d_a = lw + p.A * (2 * na + nb) + 2 * p.B * na
        d_abar = (p.A + p.B) * a * a + p.C * b * b
        d_b = p.A * b.conjugate() * a + 2 * p.C * a.conjugate() * b
        d_bbar = p.A * b * a
        for col, (dz, dzbar) in ((2 * i, (d_a, d_abar)), (2 * (1 - i), (d_b, d_bbar))):
            du = dz + dzbar
            dw = 1j * (dz - dzbar)
            J[2 * i, col] = du.real
            J[2 * i, col + 1] = dw.real
            J[2 * i + 1, col] = du.imag
            J[2 * i + 1, col + 1] = dw.imag
    J[4, 0], J[4, 1] = p.D.real, -p.D.imag
    J[5, 2], J[5, 3] = p.D.real, -p.D.imag
    return J


# ---------------------------------------------------------------------------
# registry


def _amplitude_act(g, x, k=1.0, tangent=False):
    return symmetry.act_on_amplitudes(g, x, k)


def _modes_act(g, x, k=1.0, tangent=False):
    return symmetry.act_on_modes(g, x, k)


def _polar_act(g, x, k=1.0, tangent=False):
    return symmetry.act_on_polar(g, x, k, tangent)


def _pitchfork_act(g, x, k=1.0, tangent=False):
    return symmetry.act_on_nf(g, x, "pitchfork", tangent)


def _hopf_act(g, x, k=1.0, tangent=False):
    return symmetry.act_on_nf(g, x, "hopf", tangent)


def _count_rolls(x, pairs) -> int:
    return sum(1 for i, j in pairs if math.hypot(x[i], x[j]) > PHASE_EPS)


@dataclass(frozen=True)
class VectorField:
    """A registered right-hand side with its structural metadata.

    ``core`` lists the coordinates that close on themselves; ``drift`` the
    slaved phase coordinates driven by the core.  ``section`` holds
    candidate Poincare coordinates (core indices), in order of preference.
    """

    name: str
    fields: tuple[str, ...]
    rhs: Callable
    jacobian: Callable
    act: Callable
    core: tuple[int, ...]
    drift: tuple[int, ...]
    core_act: Callable
    section: tuple[int, ...]
    translation_modes: Callable[[np.ndarray], int] = lambda x: 0
    drift_scale_from_k: bool = False

    @property
    def dim(self) -> int:
        return len(self.fields)

    @property
    def core_fields(self) -> tuple[str, ...]:
        return tuple(self.fields[i] for i in self.core)


MODELS: dict[str, VectorField] = {
    "amplitude": VectorField(
        "amplitude", AmplitudeState.FIELDS, amplitude_rhs, amplitude_jacobian, _amplitude_act,
        core=(0, 1, 2, 3), drift=(), core_act=lambda g, x: symmetry.act_on_amplitudes(g, x),
        section=(0, 2), translation_modes=lambda x: _count_rolls(x, ((0, 1), (2, 3))),
    ),
    "full": VectorField(
        "full", ModeState.FIELDS, full_rhs, full_jacobian, _modes_act,
        core=tuple(range(8)), drift=(), core_act=lambda g, x: symmetry.act_on_modes(g, x),
        section=(2, 6), translation_modes=lambda x: _count_rolls(x, ((0, 1), (4, 5))),
    ),
    "polar": VectorField(
        "polar", PolarState.FIELDS, polar_rhs, polar_jacobian, _polar_act,
        core=(0, 1, 2, 3, 4, 5), drift=(6, 7), core_act=symmetry.act_on_core,
        section=(1, 4), drift_scale_from_k=True,
    ),
    "pitchfork": VectorField(
        "pitchfork", PitchforkNFState.FIELDS, pitchfork_nf_rhs, pitchfork_nf_jacobian, _pitchfork_act,
        core=(0, 1), drift=(2, 3), core_act=lambda g, x: symmetry.act_on_nf_core(g, x, "pitchfork"),
        section=(0, 1),
    ),
    "hopf": VectorField(
        "hopf", HopfNFState.FIELDS, hopf_nf_rhs, hopf_nf_jacobian, _hopf_act,
        core=(0, 1, 2, 3), drift=(4, 5), core_act=lambda g, x: symmetry.act_on_nf_core(g, x, "hopf"),
        section=(0, 2),
    ),
}


def get_model(model) -> VectorField:
    if isinstance(model, VectorField):
        return model
    try:
        return MODELS[model]
    except KeyError:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(MODELS)}") from None


def jacobian(model, s, p) -> np.ndarray:
    return get_model(model).jacobian(_arr(s), p)


# ---------------------------------------------------------------------------
# coordinate changes


def to_polar(s, warn: bool = True) -> PolarState:
    """Mode state to polar form; phases of vanishing rolls are set to zero."""
    x = _arr(s)
    out = []
    for re_, im_ in ((x[0], x[1]), (x[4], x[5])):
        r = math.hypot(re_, im_)
        if r < PHASE_EPS:
            if warn:
                warnings.warn("roll amplitude below 1e-12; phase set to 0", AmbiguousPhaseWarning, stacklevel=2)
            out.append((r, 0.0))
        else:
            out.append((r, math.atan2(im_, re_)))
    (rx, thx), (ry, thy) = out
    return PolarState(rx, float(x[2]), float(x[3]), ry, float(x[6]), float(x[7]), thx, thy)


def to_cartesian(s) -> ModeState:
    x = _arr(s)
    rx, cx, dx, ry, cy, dy, thx, thy = x[:8]
    return ModeState(cmath.rect(rx, thx), float(cx), float(dx), cmath.rect(ry, thy), float(cy), float(dy))


def polar_array_from_modes(x) -> np.ndarray:
    """Vectorised :func:`to_polar` on rows, with phases unwrapped along axis 0."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    out[:, 0] = np.hypot(x[:, 0], x[:, 1])
    out[:, 3] = np.hypot(x[:, 4], x[:, 5])
    out[:, [1, 2, 4, 5]] = x[:, [2, 3, 6, 7]]
    out[:, 6] = np.unwrap(np.arctan2(x[:, 1], x[:, 0]))
    out[:, 7] = np.unwrap(np.arctan2(x[:, 5], x[:, 4]))
    return out


def modes_array_from_polar(x) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    out[:, 0] = x[:, 0] * np.cos(x[:, 6])
    out[:, 1] = x[:, 0] * np.sin(x[:, 6])
    out[:, 4] = x[:, 3] * np.cos(x[:, 7])
    out[:, 5] = x[:, 3] * np.sin(x[:, 7])
    out[:, [2, 3, 6, 7]] = x[:, [1, 2, 4, 5]]
    return out


# ---------------------------------------------------------------------------
# closed-form results


def drop_neutral(eigs, count: int) -> np.ndarray:
    """Remove the ``count`` eigenvalues closest to zero (group-orbit directions)."""
    eigs = np.asarray(eigs)
    if count <= 0:
        return eigs
    keep = np.sort(np.argsort(np.abs(eigs), kind="stable")[count:])
    return eigs[keep]


@dataclass(frozen=True)
class PrimaryBranches:
    rolls_amp2: float | None
    squares_amp2: float | None
    rolls_stable: bool | None
    squares_stable: bool | None
    rolls_eigenvalues: np.ndarray | None
    squares_eigenvalues: np.ndarray | None


def _amplitude_stability(state: np.ndarray, p: ModelParams):
    J = amplitude_jacobian(state, p)
    eigs = drop_neutral(eigenvalues(J), MODELS["amplitude"].translation_modes(state))
    return bool(np.all(eigs.real < 0)), eigs


def primary_branches(p: ModelParams) -> PrimaryBranches:
    """Rolls and squares of the amplitude equations and their stability.

    Stability comes from the eigenvalues of the amplitude Jacobian with the
    neutral translation directions removed.
    """
    rolls_amp2 = p.mu if p.mu >= 0 else None
    squares_amp2 = p.mu / (2 + p.beta) if p.beta > -2 and p.mu >= 0 else None
    rolls_stable = squares_stable = None
    rolls_eigs = squares_eigs = None
    if p.mu > 0:
        rolls_stable, rolls_eigs = _amplitude_stability(np.array([math.sqrt(p.mu), 0, 0, 0]), p)
        if squares_amp2 is not None:
            a = math.sqrt(squares_amp2)
            squares_stable, squares_eigs = _amplitude_stability(np.array([a, 0, a, 0]), p)
    return PrimaryBranches(rolls_amp2, squares_amp2, rolls_stable, squares_stable, rolls_eigs, squares_eigs)


@dataclass(frozen=True)
class Thresholds:
    mu_pitchfork: float
    mu_hopf: float | None
    omega_hopf: float | None
    hopf_exists: bool
    tb_point: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "mu_pitchfork": self.mu_pitchfork,
            "mu_hopf": self.mu_hopf,
            "omega_hopf": self.omega_hopf,
            "hopf_exists": self.hopf_exists,
            "tb_point": {"mu": self.tb_point[0], "Q": self.tb_point[1]},
        }


def thresholds(p: ModelParams) -> Thresholds:
    """Secondary instabilities of squares in the model."""
    hopf = p.Q > p.zeta
    mu_h = (1 + p.zeta) * (2 + p.beta)
    return Thresholds(
        mu_pitchfork=(1 + p.Q) * (2 + p.beta),
        mu_hopf=mu_h if hopf else None,
        omega_hopf=math.sqrt(p.zeta * (p.Q - p.zeta)) if hopf else None,
        hopf_exists=hopf,
        tb_point=(mu_h, p.zeta),
    )


def squares_state(p: ModelParams) -> np.ndarray:
    """Squares in polar form (core plus zero phases)."""
    if p.beta <= -2 or p.mu < 0:
        raise ValueError("squares need mu >= 0 and beta > -2")
    r = math.sqrt(p.mu / (2 + p.beta))
    return np.array([r, 0.0, 0.0, r, 0.0, 0.0, 0.0, 0.0])


@dataclass(frozen=True)
class ClosedFormBranch:
    label: str
    exists: bool
    state: np.ndarray | None = None  # polar array
    drift_rate: tuple[float, float] | None = None
    reason: str = ""


def tsq_branch(p: ModelParams, sign: float = 1.0) -> ClosedFormBranch:
    """Travelling squares drifting along x, in closed form."""
    if p.gamma == 0:
        return ClosedFormBranch("TSq", False, reason="gamma = 0: shear amplitude undefined")
    rx2 = 1 + p.Q
    ry2 = p.mu - (1 + p.beta) * (1 + p.Q)
    c2 = (p.mu - rx2 - (1 + p.beta) * ry2) / p.gamma
    if ry2 < 0 or c2 < 0:
        return ClosedFormBranch("TSq", False, reason="negative squared amplitude")
    c = math.copysign(math.sqrt(c2), sign)
    state = np.array([math.sqrt(rx2), c, c, math.sqrt(ry2), 0.0, 0.0, 0.0, 0.0])
    return ClosedFormBranch("TSq", True, state, (p.D * c, 0.0))


def dtsq_branch(p: ModelParams, sign: float = 1.0) -> ClosedFormBranch:
    """Diagonally travelling squares (equal shear in x and y)."""
    if p.gamma == 0:
        return ClosedFormBranch("DTSq", False, reason="gamma = 0: shear amplitude undefined")
    r2 = 1 + p.Q
    c2 = (p.mu - (2 + p.beta) * r2) / p.gamma
    if c2 < 0:
        return ClosedFormBranch("DTSq", False, reason="negative squared amplitude")
    c = math.copysign(math.sqrt(c2), sign)
    r = math.sqrt(r2)
    state = np.array([r, c, c, r, c, c, 0.0, 0.0])
    return ClosedFormBranch("DTSq", True, state, (p.D * c, p.D * c))


@dataclass(frozen=True)
class NFBranch:
    label: str
    amp2: float
    exists: bool
    degenerate: bool = False
    frequency: float | None = None
    coefficient: complex = 0j

    def state(self, phase: float = 0.0) -> np.ndarray:
        """A point on the branch (drift phases zero)."""
        if not self.exists:
            raise ValueError(f"{self.label} branch does not exist")
        a = math.sqrt(self.amp2)
        if self.label in ("TSq", "DTSq"):
            return np.array([a, a if self.label == "DTSq" else 0.0, 0.0, 0.0])
        z = cmath.rect(a, phase)
        vx, vy = {
            "PSq": (z, 0j),
            "DPSq": (z, z),
            "APW": (1j * z, z),
        }[self.label]
        return np.array([vx.real, vx.imag, vy.real, vy.imag, 0.0, 0.0])


def _nf_branch(label, lam, coeff: complex, omega=None) -> NFBranch:
    if coeff.real == 0:
        return NFBranch(label, math.nan, False, degenerate=True, coefficient=coeff)
    amp2 = -lam / coeff.real
    freq = None if omega is None else omega + coeff.imag * amp2
    return NFBranch(label, amp2, amp2 > 0, False, freq, coeff)


def nf_branches(kind: str, p) -> list[NFBranch]:
    """Closed-form solutions of the pitchfork or Hopf normal form."""
    if kind == "pitchfork":
        return [
            _nf_branch("TSq", p.lam, complex(p.A)),
            _nf_branch("DTSq", p.lam, complex(p.A + p.B)),
        ]
    if kind == "hopf":
        return [
            _nf_branch("PSq", p.lam, p.A + p.B, p.omega),
            _nf_branch("DPSq", p.lam, 2 * p.A + p.B + p.C, p.omega),
            _nf_branch("APW", p.lam, 2 * p.A + p.B - p.C, p.omega),
        ]
    raise ValueError(f"unknown normal form kind {kind!r}")
