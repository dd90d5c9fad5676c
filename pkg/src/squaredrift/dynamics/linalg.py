"""Dense eigenvalues of small real matrices.

Balancing, Householder reduction to upper Hessenberg form, then the Francis
double-shift QR iteration with deflation.  Aimed at the 2x2..16x16 Jacobians
and monodromy matrices met in this package.
"""

from __future__ import annotations

import math

import numpy as np

MAX_DIM = 16
_RADIX = 2.0


class EigenvalueError(RuntimeError):
    """QR iteration failed to converge."""


def balance(a: np.ndarray) -> np.ndarray:
    """Diagonal similarity scaling with powers of two to equalise row/column norms."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    sqrdx = _RADIX * _RADIX
    done = False
    while not done:
        done = True
        for i in range(n):
            c = float(np.sum(np.abs(a[:, i])) - abs(a[i, i]))
            r = float(np.sum(np.abs(a[i, :])) - abs(a[i, i]))
            if c == 0.0 or r == 0.0:
                continue
            g = r / _RADIX
            f = 1.0
            s = c + r
            while c < g:
                f *= _RADIX
                c *= sqrdx
            g = r * _RADIX
            while c > g:
                f /= _RADIX
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                a[i, :] /= f
                a[:, i] *= f
    return a


def hessenberg(a: np.ndarray) -> np.ndarray:
    """Upper Hessenberg matrix similar to ``a`` (Householder reflections)."""
    h = np.array(a, dtype=float)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        h[k + 1:, k:] -= 2.0 * np.outer(v, v @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def _hqr(h: np.ndarray, max_iter: int) -> list[complex]:
    """Eigenvalues of an upper Hessenberg matrix (Francis double shift)."""
    n = h.shape[0]
    # 1-based working copy keeps the index bookkeeping of the classical algorithm
    a = [[0.0] * (n + 1)] + [[0.0] + row for row in np.asarray(h, dtype=float).tolist()]
    wr = [0.0] * (n + 1)
    wi = [0.0] * (n + 1)
    anorm = 0.0
    for i in range(1, n + 1):
        for j in range(max(i - 1, 1), n + 1):
            anorm += abs(a[i][j])
    nn = n
    t = 0.0
    while nn >= 1:
        its = 0
        while True:
            l = 1
            for ll in range(nn, 1, -1):
                s = abs(a[ll - 1][ll - 1]) + abs(a[ll][ll])
                if s == 0.0:
                    s = anorm
                if abs(a[ll][ll - 1]) + s == s:
                    a[ll][ll - 1] = 0.0
                    l = ll
                    break
            x = a[nn][nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1][nn - 1]
            w = a[nn][nn - 1] * a[nn - 1][nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if its == max_iter:
                raise EigenvalueError("QR iteration did not converge")
            if its and its % 10 == 0:
                # exceptional shift
                t += x
                for i in range(1, nn + 1):
                    a[i][i] -= x
                s = abs(a[nn][nn - 1]) + abs(a[nn - 1][nn - 2])
                y = x = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            m = nn - 2
            while m >= l:
                z = a[m][m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1][m] + a[m][m + 1]
                q = a[m + 1][m + 1] - z - r - s
                r = a[m + 2][m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m][m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1][m - 1]) + abs(z) + abs(a[m + 1][m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i][i - 2] = 0.0
                if i != m + 2:
                    a[i][i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k][k - 1]
                    q = a[k + 1][k - 1]
                    r = a[k + 2][k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k][k - 1] = -a[k][k - 1]
                else:
                    a[k][k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                for j in range(k, nn + 1):
                    p = a[k][j] + q * a[k + 1][j]
                    if k != nn - 1:
                        p += r * a[k + 2][j]
                        a[k + 2][j] -= p * z
                    a[k + 1][j] -= p * y
                    a[k][j] -= p * x
                mmin = nn if nn < k + 3 else k + 3
                for i in range(l, mmin + 1):
                    p = x * a[i][k] + y * a[i][k + 1]
                    if k != nn - 1:
                        p += z * a[i][k + 2]
                        a[i][k + 2] -= p * r
                    a[i][k + 1] -= p * q
                    a[i][k] -= p
            if l >= nn - 1:
                break
    return [complex(wr[i], wi[i]) for i in range(1, n + 1)]


def sort_eigenvalues(eigs) -> np.ndarray:
    """Descending real part, ties broken by descending imaginary part."""
    eigs = np.asarray(eigs, dtype=complex)
    order = np.lexsort((-eigs.imag, -eigs.real))
    return eigs[order]


def eigenvalues(m, max_iter: int = 60) -> np.ndarray:
    """All eigenvalues of a real square matrix, sorted by descending real part."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    n = m.shape[0]
    if n > MAX_DIM:
        raise ValueError(f"dimension {n} exceeds {MAX_DIM}")
    if n == 0:
        return np.zeros(0, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise EigenvalueError("matrix has non-finite entries")
    if n == 1:
        return np.array([complex(m[0, 0])])
    return sort_eigenvalues(_hqr(hessenberg(balance(m)), max_iter))


def eigenvector(m, lam: complex, iterations: int = 3) -> np.ndarray:
    """Unit eigenvector for an (approximate) eigenvalue by inverse iteration."""
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    scale = max(np.linalg.norm(m, np.inf), 1.0)
    shift = lam + 1e-10 * scale
    a = m - shift * np.eye(n)
    v = np.ones(n, dtype=complex) / math.sqrt(n)
    for _ in range(iterations):
        try:
            v = np.linalg.solve(a, v)
        except np.linalg.LinAlgError:
            a = a + 1e-12 * scale * np.eye(n)
            v = np.linalg.solve(a, v)
        v /= np.linalg.norm(v)
    return v


def eigenpair_residuals(m, eigs=None) -> np.ndarray:
    """``|M v - lam v| / |M|`` for each eigenvalue, with ``v`` from inverse iteration."""
    m = np.asarray(m, dtype=float)
    if eigs is None:
        eigs = eigenvalues(m)
    norm = max(np.linalg.norm(m, 2), np.finfo(float).tiny)
    out = []
    for lam in eigs:
        v = eigenvector(m, lam)
        out.append(np.linalg.norm(m @ v - lam * v) / norm)
    return np.array(out)
