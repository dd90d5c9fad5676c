"""Periodic orbits by single shooting, and their Floquet multipliers.

The flow map is a fixed number of classical RK4 steps over the period, so it
is a smooth function of both the initial point and ``T``; Newton on it can
drive the closure residual down to rounding level.  Variational equations
are integrated for the core coordinates only: slaved drift phases never
feed back and would only add trivial unit multipliers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .integrate import IntegratorConfig, integrate, section_crossings
from .linalg import eigenvalues

STABILITY_MARGIN = 1e-6


class OrbitError(RuntimeError):
    """Shooting failed to converge."""


class NotPeriodicError(OrbitError):
    """The iteration collapsed onto (or started at) an equilibrium."""


@dataclass
class PeriodicOrbit:
    """A refined periodic orbit.

    ``states`` holds ``n_samples + 1`` full model states at ``t_i = i T / N``;
    the last row is the image after one period (closure check and net drift).
    """

    model: str
    params: object
    period: float
    states: np.ndarray
    residual: float
    multipliers: np.ndarray
    monodromy: np.ndarray | None
    n_steps: int
    section: tuple[int, float, int] = (0, 0.0, 1)
    basis: np.ndarray | None = None

    @property
    def n_samples(self) -> int:
        return len(self.states) - 1

    @property
    def times(self) -> np.ndarray:
        return self.period * np.arange(self.n_samples + 1) / self.n_samples

    @property
    def vector_field(self):
        from ..models import get_model

        return get_model(self.model)

    @property
    def samples(self) -> np.ndarray:
        """Core coordinates at the ``N`` uniform sample times."""
        return self.states[:-1, : len(self.vector_field.core)]

    @property
    def drift(self) -> np.ndarray:
        """Drift phases at ``N + 1`` sample times, end point included."""
        return self.states[:, list(self.vector_field.drift)]

    @property
    def closure(self) -> float:
        nc = len(self.vector_field.core)
        return float(np.max(np.abs(self.states[-1, :nc] - self.states[0, :nc])))

    @property
    def diameter(self) -> float:
        return float(np.max(np.ptp(self.samples, axis=0)))


def flow(vf, x0, T: float, p, n_steps: int, variational: bool = True, record_every: int = 0):
    """``n_steps`` RK4 steps of length ``T / n_steps`` on the full state.

    Returns ``(x_T, monodromy or None, recorded states)``; the monodromy is
    the derivative of the core part of ``x_T`` w.r.t. the initial core.
    """
    nc = len(vf.core)
    f, jac = vf.rhs, vf.jacobian
    h = T / n_steps
    x = np.array(x0, dtype=float)
    phi = np.eye(nc) if variational else None
    records = [x.copy()] if record_every else []
    half = 0.5 * h
    sixth = h / 6.0
    for i in range(n_steps):
        k1 = f(x, p)
        x2 = x + half * k1
        k2 = f(x2, p)
        x3 = x + half * k2
        k3 = f(x3, p)
        x4 = x + h * k3
        k4 = f(x4, p)
        if variational:
            K1 = jac(x, p)[:nc, :nc] @ phi
            K2 = jac(x2, p)[:nc, :nc] @ (phi + half * K1)
            K3 = jac(x3, p)[:nc, :nc] @ (phi + half * K2)
            K4 = jac(x4, p)[:nc, :nc] @ (phi + h * K3)
            phi = phi + sixth * (K1 + 2.0 * K2 + 2.0 * K3 + K4)
        x = x + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if record_every and (i + 1) % record_every == 0:
            records.append(x.copy())
    return x, phi, records


def monodromy(model, x0, T: float, p, n_steps: int = 2048) -> np.ndarray:
    from ..models import get_model

    _, phi, _ = flow(get_model(model), x0, T, p, n_steps)
    return phi


def _section_index(vf, traj_states, candidates, basis) -> int | None:
    nc = len(vf.core)
    for idx in candidates:
        if basis is not None and np.max(np.abs(basis[idx])) < 1e-12:
            continue
        if np.ptp(traj_states[:, idx]) > 1e-8:
            return idx
    return None


def _as_state(guess) -> np.ndarray:
    return np.array(guess.to_array() if hasattr(guess, "to_array") else guess, dtype=float)


def find_periodic_orbit(
    model,
    p,
    guess,
    T_guess: float,
    section: tuple[int, float, int] | None = None,
    basis: np.ndarray | None = None,
    n_samples: int = 256,
    steps_per_sample: int = 8,
    tol: float = 1e-10,
    max_iter: int = 40,
) -> PeriodicOrbit:
    """Refine a periodic orbit from a nearby state and period estimate.

    Unknowns are the core state on the section and the period; the section
    coordinate is pinned to its offset, which removes the time-translation
    freedom.  ``basis`` (orthonormal columns) restricts the unknowns to an
    invariant subspace of the core.  The ``"full"`` model is refined in
    polar form, where the orbit is translation free; the result then lives
    in the ``"polar"`` model.
    """
    from ..models import get_model, polar_array_from_modes

    if T_guess <= 0:
        raise ValueError("T_guess must be positive")
    vf = get_model(model)
    x = _as_state(guess)
    if vf.name == "full":
        vf = get_model("polar")
        x = polar_array_from_modes(x)[0]
    nc = len(vf.core)
    if basis is not None:
        basis = np.asarray(basis, dtype=float)
        x[:nc] = basis @ (basis.T @ x[:nc])
    B = basis if basis is not None else np.eye(nc)
    m = B.shape[1]

    if np.max(np.abs(vf.rhs(x, p)[:nc])) < 1e-10:
        raise NotPeriodicError("initial state is an equilibrium")

    # move onto the section
    window = integrate(vf, x, (0.0, 2.5 * T_guess), p, IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12))
    if section is None:
        idx = _section_index(vf, window.states, vf.section, basis)
        if idx is None:
            raise NotPeriodicError("no oscillation in any section coordinate")
        section = (idx, 0.0, 1)
    idx, offset, direction = section
    hits = section_crossings(window, section)
    if not hits:
        raise NotPeriodicError(f"trajectory never crosses section {section}")
    x = hits[0][1]
    if basis is not None:
        x[:nc] = B @ (B.T @ x[:nc])
    T = float(T_guess)
    n_steps = n_samples * steps_per_sample

    def merit(xT, xs):
        return max(float(np.max(np.abs(xT[:nc] - xs[:nc]))), abs(xs[idx] - offset))

    xT, M, _ = flow(vf, x, T, p, n_steps)
    res = merit(xT, x)
    it = 0
    while res > tol:
        if it >= max_iter:
            raise OrbitError(f"shooting did not converge: residual {res:.3e} after {it} iterations")
        it += 1
        fT = vf.rhs(xT, p)[:nc]
        A = np.zeros((m + 1, m + 1))
        A[:m, :m] = B.T @ (M - np.eye(nc)) @ B
        A[:m, m] = B.T @ fT
        A[m, :m] = B[idx]
        rhs = -np.concatenate([B.T @ (xT[:nc] - x[:nc]), [x[idx] - offset]])
        try:
            d = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError:
            d, *_ = np.linalg.lstsq(A, rhs, rcond=1e-12)
        lam = 1.0
        for _ in range(12):
            xn = x.copy()
            xn[:nc] += lam * (B @ d[:m])
            Tn = T + lam * d[m]
            if Tn > 0:
                xTn, Mn, _ = flow(vf, xn, Tn, p, n_steps)
                rn = merit(xTn, xn)
                if np.isfinite(rn) and rn < res:
                    break
            lam *= 0.5
        else:
            raise OrbitError(f"shooting stalled at residual {res:.3e}")
        x, T, xT, M, res = xn, Tn, xTn, Mn, rn
        if np.max(np.abs(vf.rhs(x, p)[:nc])) < 1e-8:
            raise NotPeriodicError("shooting converged onto an equilibrium")

    _, _, rec = flow(vf, x, T, p, n_steps, variational=False, record_every=steps_per_sample)
    states = np.array(rec)
    orbit = PeriodicOrbit(
        model=vf.name,
        params=p,
        period=T,
        states=states,
        residual=float(np.max(np.abs(xT[:nc] - x[:nc]))),
        multipliers=eigenvalues(M),
        monodromy=M,
        n_steps=n_steps,
        section=section,
        basis=basis,
    )
    if orbit.diameter < 1e-8:
        raise NotPeriodicError("orbit amplitude below 1e-8")
    return orbit


def floquet_multipliers(orbit: PeriodicOrbit, subspace=None, recompute: bool = False) -> np.ndarray:
    """Eigenvalues of the monodromy matrix of ``orbit``.

    ``subspace`` is ``None``/``"full"`` for the whole core, ``"restricted"``
    for the subspace the orbit was refined in, or an explicit basis.
    """
    M = orbit.monodromy
    if recompute or M is None:
        M = monodromy(orbit.model, orbit.states[0], orbit.period, orbit.params, orbit.n_steps)
    if subspace is None or (isinstance(subspace, str) and subspace == "full"):
        return eigenvalues(M)
    if isinstance(subspace, str):
        if subspace != "restricted":
            raise ValueError(f"unknown subspace mode {subspace!r}")
        if orbit.basis is None:
            return eigenvalues(M)
        basis = orbit.basis
    else:
        basis = np.asarray(subspace, dtype=float)
    return eigenvalues(basis.T @ M @ basis)


def nontrivial_multipliers(multipliers) -> np.ndarray:
    """Drop the multiplier closest to 1 (the flow direction)."""
    mult = np.asarray(multipliers)
    i = int(np.argmin(np.abs(mult - 1.0)))
    return np.delete(mult, i)


def stability_verdict(multipliers, margin: float = STABILITY_MARGIN) -> str:
    rest = np.abs(nontrivial_multipliers(multipliers))
    if np.any(rest > 1 + margin):
        return "unstable"
    if np.all(rest < 1 - margin):
        return "stable"
    return "marginal"


def shift_samples(samples: np.ndarray, shift: float) -> np.ndarray:
    """Periodic samples ``w_i = v(t_i - shift T)``; Fourier interpolation off-grid."""
    n = len(samples)
    k = shift * n
    if abs(k - round(k)) < 1e-12:
        return np.roll(samples, int(round(k)) % n, axis=0)
    freqs = np.fft.fftfreq(n) * n
    spec = np.fft.fft(samples, axis=0)
    phase = np.exp(-2j * math.pi * freqs * shift)
    return np.real(np.fft.ifft(spec * phase[:, None], axis=0))


def with_states(orbit: PeriodicOrbit, states: np.ndarray, basis=None) -> PeriodicOrbit:
    """Copy with new samples; the monodromy is dropped since its base point moved."""
    return replace(orbit, states=states, monodromy=None, basis=basis)
