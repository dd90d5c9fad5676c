"""Parameter and state containers, with their flat-array and JSON layouts.

Every state has a documented real-coordinate order; numerics work on these
flat ``float64`` arrays and the dataclasses are thin views used at the API
boundary.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, ClassVar

import numpy as np


class ConfigError(ValueError):
    """Invalid or unknown configuration keys/values."""


def _check_keys(data: dict, allowed: tuple[str, ...], required: tuple[str, ...], what: str) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown {what} keys: {', '.join(unknown)}")
    missing = [key for key in required if key not in data]
    if missing:
        raise ConfigError(f"missing {what} keys: {', '.join(missing)}")


def _to_complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"complex value must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def _complex_json(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the magnetoconvection model.

    ``mu`` is the bifurcation parameter, ``beta`` selects rolls or squares,
    ``gamma`` is the shear damping of convection, ``Q`` the imposed field
    strength, ``zeta`` the diffusivity ratio, ``D`` the drift coefficient
    and ``k`` the horizontal wavenumber.
    """

    mu: float
    beta: float
    gamma: float = 1.0
    Q: float = 0.0
    zeta: float = 1.0
    D: float = 1.0
    k: float = 1.0

    KEYS: ClassVar[tuple[str, ...]] = ("mu", "beta", "gamma", "Q", "zeta", "D", "k")

    def __post_init__(self):
        for key in self.KEYS:
            value = float(getattr(self, key))
            if not np.isfinite(value):
                raise ConfigError(f"{key} must be finite")
            object.__setattr__(self, key, value)
        if self.zeta <= 0:
            raise ConfigError("zeta must be positive")
        if self.k <= 0:
            raise ConfigError("k must be positive")

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, float]:
        return {key: getattr(self, key) for key in self.KEYS}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        _check_keys(data, cls.KEYS, ("mu", "beta"), "model parameter")
        return cls(**{key: float(value) for key, value in data.items()})


@dataclass(frozen=True)
class PitchforkNFParams:
    """Real coefficients of the steady D4 normal form with drift."""

    lam: float
    A: float
    B: float
    D: float = 1.0

    KEYS: ClassVar[tuple[str, ...]] = ("lambda", "A", "B", "D")

    def __post_init__(self):
        for name in ("lam", "A", "B", "D"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def replace(self, **changes) -> "PitchforkNFParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, float]:
        return {"lambda": self.lam, "A": self.A, "B": self.B, "D": self.D}

    @classmethod
    def from_dict(cls, data: dict) -> "PitchforkNFParams":
        _check_keys(data, cls.KEYS, ("lambda", "A", "B"), "pitchfork parameter")
        kwargs = {("lam" if key == "lambda" else key): float(v) for key, v in data.items()}
        return cls(**kwargs)


@dataclass(frozen=True)
class HopfNFParams:
    """Coefficients of the oscillatory D4 normal form with drift.

    ``A``, ``B``, ``C`` and ``D`` are complex; JSON stores them as ``[re, im]``.
    """

    lam: float
    omega: float
    A: complex
    B: complex
    C: complex = 0j
    D: complex = 1 + 0j

    KEYS: ClassVar[tuple[str, ...]] = ("lambda", "omega", "A", "B", "C", "D")

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "omega", float(self.omega))
        for name in ("A", "B", "C", "D"):
            object.__setattr__(self, name, _to_complex(getattr(self, name)))

    def replace(self, **changes) -> "HopfNFParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.lam,
            "omega": self.omega,
            "A": _complex_json(self.A),
            "B": _complex_json(self.B),
            "C": _complex_json(self.C),
            "D": _complex_json(self.D),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HopfNFParams":
        _check_keys(data, cls.KEYS, ("lambda", "omega", "A", "B"), "Hopf parameter")
        kwargs = {("lam" if key == "lambda" else key): v for key, v in data.items()}
        return cls(**kwargs)


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class ModeState:
    """Mode amplitudes ``(a_x, c_x, d_x, a_y, c_y, d_y)``; ``a`` complex."""

    ax: complex
    cx: float
    dx: float
    ay: complex
    cy: float
    dy: float

    FIELDS: ClassVar[tuple[str, ...]] = (
        "ax_re", "ax_im", "cx", "dx", "ay_re", "ay_im", "cy", "dy",
    )

    def to_array(self) -> np.ndarray:
        ax, ay = complex(self.ax), complex(self.ay)
        return np.array(
            [ax.real, ax.imag, self.cx, self.dx, ay.real, ay.imag, self.cy, self.dy],
            dtype=float,
        )

    @classmethod
    def from_array(cls, x) -> "ModeState":
        x = np.asarray(x, dtype=float)
        return cls(complex(x[0], x[1]), float(x[2]), float(x[3]),
                   complex(x[4], x[5]), float(x[6]), float(x[7]))


@dataclass(frozen=True)
class PolarState:
    """Polar form: radii, shear and field per direction, then roll phases.

    Array order is ``(r_x, c_x, d_x, r_y, c_y, d_y, theta_x, theta_y)`` so
    that the first six entries form the translation-free core.
    """

    rx: float
    cx: float
    dx: float
    ry: float
    cy: float
    dy: float
    thx: float = 0.0
    thy: float = 0.0

    FIELDS: ClassVar[tuple[str, ...]] = ("rx", "cx", "dx", "ry", "cy", "dy", "thx", "thy")

    def __post_init__(self):
        if self.rx < 0 or self.ry < 0:
            raise ValueError("polar radii must be non-negative")

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in self.FIELDS], dtype=float)

    @classmethod
    def from_array(cls, x) -> "PolarState":
        return cls(*(float(v) for v in np.asarray(x, dtype=float)[:8]))


@dataclass(frozen=True)
class AmplitudeState:
    """Roll amplitudes ``(a_x, a_y)`` of the primary pitchfork."""

    ax: complex
    ay: complex

    FIELDS: ClassVar[tuple[str, ...]] = ("ax_re", "ax_im", "ay_re", "ay_im")

    def to_array(self) -> np.ndarray:
        ax, ay = complex(self.ax), complex(self.ay)
        return np.array([ax.real, ax.imag, ay.real, ay.imag], dtype=float)

    @classmethod
    def from_array(cls, x) -> "AmplitudeState":
        x = np.asarray(x, dtype=float)
        return cls(complex(x[0], x[1]), complex(x[2], x[3]))


@dataclass(frozen=True)
class PitchforkNFState:
    """``(v_x, v_y, phi_x, phi_y)``, all real."""

    vx: float
    vy: float
    phx: float = 0.0
    phy: float = 0.0

    FIELDS: ClassVar[tuple[str, ...]] = ("vx", "vy", "phx", "phy")

    def to_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.phx, self.phy], dtype=float)

    @classmethod
    def from_array(cls, x) -> "PitchforkNFState":
        return cls(*(float(v) for v in np.asarray(x, dtype=float)[:4]))


@dataclass(frozen=True)
class HopfNFState:
    """``(v_x, v_y, phi_x, phi_y)`` with complex amplitudes."""

    vx: complex
    vy: complex
    phx: float = 0.0
    phy: float = 0.0

    FIELDS: ClassVar[tuple[str, ...]] = ("vx_re", "vx_im", "vy_re", "vy_im", "phx", "phy")

    def to_array(self) -> np.ndarray:
        vx, vy = complex(self.vx), complex(self.vy)
        return np.array([vx.real, vx.imag, vy.real, vy.imag, self.phx, self.phy], dtype=float)

    @classmethod
    def from_array(cls, x) -> "HopfNFState":
        x = np.asarray(x, dtype=float)
        return cls(complex(x[0], x[1]), complex(x[2], x[3]), float(x[4]), float(x[5]))


STATE_TYPES = {
    "amplitude": AmplitudeState,
    "full": ModeState,
    "polar": PolarState,
    "pitchfork": PitchforkNFState,
    "hopf": HopfNFState,
}

PARAM_TYPES = {
    "amplitude": ModelParams,
    "full": ModelParams,
    "polar": ModelParams,
    "pitchfork": PitchforkNFParams,
    "hopf": HopfNFParams,
}


def model_of_state(state) -> str:
    for name, cls in STATE_TYPES.items():
        if isinstance(state, cls):
            return name
    raise TypeError(f"not a state object: {type(state).__name__}")


def params_from_dict(model: str, data: dict):
    try:
        cls = PARAM_TYPES[model]
    except KeyError:
        raise ConfigError(f"unknown model {model!r}") from None
    return cls.from_dict(data)
