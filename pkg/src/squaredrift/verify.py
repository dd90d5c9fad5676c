"""Seeded property checks on the vector fields: equivariance, Jacobians, coordinate changes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import MODELS, get_model, modes_array_from_polar
from .states import HopfNFParams, ModelParams, PitchforkNFParams
from .symmetry import GroupElement, act_on_phases, translation, verify_equivariance

GENERATORS = (GroupElement("mx"), GroupElement("md"), translation(0.7, 0.3))
CONVECTION = ("amplitude", "full", "polar")


@dataclass(frozen=True)
class CheckResult:
    name: str
    model: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name} [{self.model}] max={self.value:.3e} tol={self.tol:.1e}"


def random_params(model: str, rng: np.random.Generator):
    """Parameters with every coefficient switched on, drawn from ``rng``."""
    model = get_model(model).name
    if model in CONVECTION:
        u = rng.uniform(-1.0, 1.0, 5)
        return ModelParams(mu=1 + 0.5 * u[0], beta=-1 + 0.5 * u[1], gamma=1 + 0.5 * u[2],
                           Q=1 + 0.5 * u[3], zeta=0.3 + 0.2 * abs(u[4]), D=0.7, k=1.3)
    if model == "pitchfork":
        lam, a, b, d = rng.uniform(-1.0, 1.0, 4)
        return PitchforkNFParams(lam, a, b, d)
    z = rng.uniform(-1.0, 1.0, (5, 2))
    c = [complex(re, im) for re, im in z]
    return HopfNFParams(c[0].real, 1 + c[0].imag, c[1], c[2], c[3], c[4])


def random_state(model: str, rng: np.random.Generator) -> np.ndarray:
    vf = get_model(model)
    x = rng.uniform(-2.0, 2.0, vf.dim)
    if vf.name == "polar":
        x[[0, 3]] = np.abs(x[[0, 3]]) + 0.1
    return x


def equivariance_check(model: str, samples: int, rng: np.random.Generator, tol: float = 1e-12,
                       p=None) -> CheckResult:
    p = p if p is not None else random_params(model, rng)
    worst = 0.0
    for _ in range(samples):
        x = random_state(model, rng)
        for g in GENERATORS:
            worst = max(worst, verify_equivariance(model, g, x, p))
    return CheckResult("equivariance", get_model(model).name, worst, tol)


def fd_jacobian(f, x, p, h: float = 1e-6) -> np.ndarray:
    """Central differences with a step scaled to each coordinate."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(len(x)):
        step = h * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = step
        cols.append((f(x + e, p) - f(x - e, p)) / (2 * step))
    return np.column_stack(cols)


def jacobian_check(model: str, samples: int, rng: np.random.Generator, tol: float = 1e-6, p=None) -> CheckResult:
    """Largest analytic-vs-finite-difference mismatch relative to the Jacobian size."""
    vf = get_model(model)
    p = p if p is not None else random_params(model, rng)
    worst = 0.0
    for _ in range(samples):
        x = random_state(model, rng)
        J = vf.jacobian(x, p)
        F = fd_jacobian(vf.rhs, x, p)
        worst = max(worst, float(np.max(np.abs(J - F)) / max(1.0, np.max(np.abs(J)))))
    return CheckResult("jacobian", vf.name, worst, tol)


def polar_cartesian_check(samples: int, rng: np.random.Generator, tol: float = 1e-12, p=None) -> CheckResult:
    """Chain rule: the Cartesian field equals the polar field pushed through ``a = r e^{i theta}``."""
    p = p if p is not None else random_params("polar", rng)
    polar, full = get_model("polar"), get_model("full")
    worst = 0.0
    for _ in range(samples):
        x = random_state("polar", rng)
        dp = polar.rhs(x, p)
        y = modes_array_from_polar(x)[0]
        pushed = np.empty(8)
        for (r, th), (dr, dth), o in (((x[0], x[6]), (dp[0], dp[6]), 0), ((x[3], x[7]), (dp[3], dp[7]), 4)):
            da = (dr + 1j * r * dth) * np.exp(1j * th)
            pushed[o], pushed[o + 1] = da.real, da.imag
        pushed[[2, 3, 6, 7]] = dp[[1, 2, 4, 5]]
        scale = 1.0 + float(np.max(np.abs(pushed)))
        worst = max(worst, float(np.max(np.abs(full.rhs(y, p) - pushed))) / scale)
    return CheckResult("polar-cartesian", "polar/full", worst, tol)


def drift_parity_check(model: str, samples: int, rng: np.random.Generator, tol: float = 1e-14, p=None) -> CheckResult:
    """Drift components transform like positions: ``f(g V) = P f(V)``."""
    vf = get_model(model)
    if not vf.drift:
        raise ValueError(f"model {vf.name!r} has no drift components")
    p = p if p is not None else random_params(model, rng)
    worst = 0.0
    for _ in range(samples):
        x = random_state(model, rng)
        for name in ("mx", "md"):
            g = GroupElement(name)
            f_img = vf.rhs(vf.act(g, x, 1.0), p)[list(vf.drift)]
            expected = act_on_phases(g, vf.rhs(x, p)[list(vf.drift)], tangent=True)
            worst = max(worst, float(np.max(np.abs(f_img - expected))))
    return CheckResult("drift-parity", vf.name, worst, tol)


def run_suite(models=None, samples: int = 1000, seed: int = 42, tol: float = 1e-12,
              jacobian_samples: int = 100) -> list[CheckResult]:
    """Equivariance and Jacobian checks per model, plus the polar/Cartesian chain rule."""
    rng = np.random.default_rng(seed)
    names = list(models) if models else list(MODELS)
    results = []
    for name in names:
        results.append(equivariance_check(name, samples, rng, tol))
        results.append(jacobian_check(name, min(samples, jacobian_samples), rng))
        if get_model(name).drift:
            results.append(drift_parity_check(name, min(samples, 100), rng))
    if {"polar", "full"} & set(names):
        results.append(polar_cartesian_check(min(samples, 100), rng, tol))
    return results
