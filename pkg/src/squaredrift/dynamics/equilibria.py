"""Damped Newton iteration for equilibria of the core dynamics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import eigenvalues


class SingularJacobianError(RuntimeError):
    """Newton matrix is singular where no symmetry explains it."""


@dataclass
class EquilibriumResult:
    state: np.ndarray
    residual_norm: float
    eigenvalues: np.ndarray
    converged: bool
    iterations: int
    model: str = ""
    neutral: int = 0  # eigenvalues pinned at zero by translations

    @property
    def core(self) -> np.ndarray:
        from ..models import get_model

        return self.state[list(get_model(self.model).core)]

    def reduced_eigenvalues(self) -> np.ndarray:
        from ..models import drop_neutral

        return drop_neutral(self.eigenvalues, self.neutral)

    @property
    def stable(self) -> bool:
        return bool(np.all(self.reduced_eigenvalues().real < 0))


def core_residual(vf, x, p) -> np.ndarray:
    return vf.rhs(x, p)[: len(vf.core)]


def find_equilibrium(
    model,
    guess,
    p,
    tol: float = 1e-12,
    max_iter: int = 50,
    basis: np.ndarray | None = None,
) -> EquilibriumResult:
    """Solve ``F_core(x) = 0`` by Newton with step halving.

    Only the core coordinates are unknowns; drift phases keep their initial
    values.  When translations make the Jacobian singular (Cartesian roll
    amplitudes), or it is singular at the seed, the minimum-norm
    least-squares step is taken; a singular Jacobian that admits no
    descent step raises :class:`SingularJacobianError`.  ``basis``
    restricts the iteration to an invariant linear subspace of the core.
    """
    from ..models import get_model

    vf = get_model(model)
    nc = len(vf.core)
    x = np.array(guess.to_array() if hasattr(guess, "to_array") else guess, dtype=float)
    if basis is not None:
        x[:nc] = basis @ (basis.T @ x[:nc])

    def resid(z):
        return core_residual(vf, z, p)

    r = resid(x)
    rn = float(np.max(np.abs(r)))
    it = 0
    while rn > tol and it < max_iter:
        it += 1
        J = vf.jacobian(x, p)[:nc, :nc]
        neutral = vf.translation_modes(x)
        if basis is not None:
            A, b = basis.T @ J @ basis, basis.T @ r
        else:
            A, b = J, r
        singular = not neutral and np.linalg.cond(A) > 1e14
        if neutral or singular:
            step, *_ = np.linalg.lstsq(A, -b, rcond=1e-12)
        else:
            step = np.linalg.solve(A, -b)
        if basis is not None:
            step = basis @ step
        lam = 1.0
        for _ in range(30):
            trial = x.copy()
            trial[:nc] += lam * step
            rt = resid(trial)
            rtn = float(np.max(np.abs(rt)))
            if np.isfinite(rtn) and rtn < rn:
                break
            lam *= 0.5
        else:
            if singular:
                raise SingularJacobianError(f"singular Jacobian at iteration {it} (residual {rn:.3e})")
            break
        x, r, rn = trial, rt, rtn

    converged = bool(rn <= tol)
    eigs = eigenvalues(vf.jacobian(x, p)[:nc, :nc]) if np.all(np.isfinite(x)) else np.array([])
    return EquilibriumResult(x, rn, eigs, converged, it, vf.name, vf.translation_modes(x))
