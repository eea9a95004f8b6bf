"""Dense Hermitian eigensolver and LU determinant, self-contained.

The eigensolver reduces a complex Hermitian matrix to real symmetric
tridiagonal form by Householder reflections (with a diagonal phase
transform absorbing complex off-diagonals), then runs the implicit-shift QL
iteration on the tridiagonal. Eigenvectors are accumulated on request.

Accuracy contract: for every returned pair, ||A v - lambda v|| is a small
multiple of machine epsilon times ||A||. Intended for the dense matrices
this package produces (dimension up to ~1000); no attempt at blocking.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

_MAX_QL_ITER = 50


def _hermiticity_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T)))


def householder_tridiagonalize(
    a: np.ndarray, vectors: bool = False
) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    """Reduce Hermitian a to real tridiagonal (d, e); optionally return Q.

    Returns (d, e, q) with d the diagonal, e the n-1 subdiagonal entries and
    q unitary such that q @ T @ q^H = a (None unless vectors=True).
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    q = np.eye(n, dtype=complex) if vectors else None
    e_complex = np.zeros(n - 1, dtype=complex) if n > 1 else np.zeros(0, dtype=complex)

    for k in range(n - 2):
        x = a[k + 1 :, k].copy()
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            e_complex[k] = 0.0
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0.0 else 1.0
        alpha = -phase * norm_x
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            e_complex[k] = alpha
            continue
        v /= vnorm
        # apply P = I - 2 v v^H from both sides of the trailing block
        sub = a[k + 1 :, k + 1 :]
        u = sub @ v
        kappa = np.vdot(v, u)
        sub -= 2.0 * np.outer(v, u.conj())
        sub -= 2.0 * np.outer(u, v.conj())
        sub += 4.0 * kappa * np.outer(v, v.conj())
        a[k + 1 :, k + 1 :] = 0.5 * (sub + sub.conj().T)  # keep Hermitian exactly
        a[k + 1 :, k] = 0.0
        a[k, k + 1 :] = 0.0
        a[k + 1, k] = alpha
        a[k, k + 1] = np.conj(alpha)
        e_complex[k] = alpha
        if q is not None:
            q[:, k + 1 :] -= 2.0 * np.outer(q[:, k + 1 :] @ v, v.conj())
    if n > 1:
        e_complex[n - 2] = a[n - 1, n - 2]

    d = np.diag(a).real.copy()
    # absorb the phases of e into a diagonal unitary so the tridiagonal is real
    e = np.abs(e_complex)
    if q is not None and n > 1:
        phases = np.ones(n, dtype=complex)
        for k in range(n - 1):
            ek = e_complex[k]
            rot = ek / abs(ek) if abs(ek) != 0.0 else 1.0
            phases[k + 1] = phases[k] * rot
        q = q * phases[None, :]
    return d, e, q


def tridiagonal_eigen(
    d: np.ndarray, e: np.ndarray, q: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Implicit-shift QL iteration on a real symmetric tridiagonal matrix.

    d and e are consumed. If q is given its columns are rotated alongside,
    turning tridiagonal eigenvectors into eigenvectors of the original
    matrix. Eigenvalues are returned unsorted.
    """
    d = np.asarray(d, dtype=float).copy()
    n = d.size
    if n == 0:
        return d, q
    e = np.concatenate([np.asarray(e, dtype=float), [0.0]])
    eps = np.finfo(float).eps
    # absolute deflation floor: dropping |e| <= eps*norm is backward stable,
    # and a purely relative test never fires inside noise-level null spaces
    norm = float(np.max(np.abs(d))) + (float(np.max(np.abs(e))) if n > 1 else 0.0)
    floor = eps * norm

    for l in range(n):
        for iteration in range(_MAX_QL_ITER + 1):
            if iteration == _MAX_QL_ITER:
                raise RuntimeError("QL iteration failed to converge")
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= max(eps * dd, floor):
                    break
                m += 1
            if m == l:
                break
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            sign_r = r if g >= 0 else -r
            g = d[m] - d[l] + e[l] / (g + sign_r)
            s = c = 1.0
            p = 0.0
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if q is not None:
                    col_i1 = q[:, i + 1].copy()
                    q[:, i + 1] = s * q[:, i] + c * col_i1
                    q[:, i] = c * q[:, i] - s * col_i1
            else:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return d, q


def hermitian_eigenvalues(a: np.ndarray, hermiticity_tol: float = 1e-10) -> np.ndarray:
    """Sorted eigenvalues of a Hermitian matrix."""
    a = np.asarray(a)
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
    if _hermiticity_defect(a) > hermiticity_tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    d, e, _ = householder_tridiagonalize(a, vectors=False)
    vals, _ = tridiagonal_eigen(d, e)
    return np.sort(vals)


def hermitian_eigensystem(a: np.ndarray, hermiticity_tol: float = 1e-10):
    """Sorted eigenvalues and matching eigenvector columns."""
    a = np.asarray(a)
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
    if _hermiticity_defect(a) > hermiticity_tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    d, e, q = householder_tridiagonalize(a, vectors=True)
    vals, q = tridiagonal_eigen(d, e, q)
    order = np.argsort(vals)
    return vals[order], q[:, order]


def trace_norm(a: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(hermitian_eigenvalues(a))))


def lu_det(a: np.ndarray) -> float:
    """Determinant of a real square matrix via LU with partial pivoting."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    sign = 1.0
    for k in range(n - 1):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if a[piv, k] == 0.0:
            return 0.0
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            sign = -sign
        factors = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k + 1 :] -= np.outer(factors, a[k, k + 1 :])
        a[k + 1 :, k] = 0.0
    return sign * float(np.prod(np.diag(a)))
