"""Eigenvalues of Hermitian matrices.

The native path reduces the matrix to real symmetric tridiagonal form with
complex Householder reflectors and then runs implicit-shift QL iterations on
the tridiagonal.  Both kernels are compiled with numba.  Each reflector's
rank-2 update is fused with the next matrix-vector product, so the trailing
block is streamed once per step.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

__all__ = ["ConvergenceError", "tridiagonalize", "tridiagonal_eigenvalues", "eigvalsh", "MAX_SWEEPS"]

#: QL iterations allowed per eigenvalue before giving up
MAX_SWEEPS = 60


class ConvergenceError(ArithmeticError):
    pass


@nb.njit(cache=True, nogil=True, fastmath={'contract', 'reassoc', 'nsz', 'arcp'})
def _tridiagonalize(A):
    # A: complex128, Fortran order, lower triangle read; overwritten
    n = A.shape[0]
    d = np.zeros(n)
    e = np.zeros(max(n - 1, 0))
    if n == 1:
        d[0] = A[0, 0].real
        return d, e
    v = np.zeros(n, np.complex128)
    p = np.zeros(n, np.complex128)
    vo = np.zeros(n, np.complex128)
    qo = np.zeros(n, np.complex128)
    pending = False
    for k in range(n - 1):
        if pending:
            vkc = vo[k].conjugate()
            qkc = qo[k].conjugate()
            for i in range(k, n):
                A[i, k] -= vo[i] * qkc + qo[i] * vkc
        d[k] = A[k, k].real
        m0 = k + 1
        if k == n - 2:
            e[k] = abs(A[n - 1, k])
            if pending:
                A[n - 1, n - 1] -= 2.0 * (vo[n - 1] * qo[n - 1].conjugate()).real
            d[n - 1] = A[n - 1, n - 1].real
            break

        nx2 = 0.0
        for i in range(m0, n):
            nx2 += A[i, k].real ** 2 + A[i, k].imag ** 2
        for i in range(m0, n):
            v[i] = 0.0
            p[i] = 0.0
        if nx2 > 0.0:
            nx = math.sqrt(nx2)
            x0 = A[m0, k]
            ax0 = abs(x0)
            ph = x0 / ax0 if ax0 > 0.0 else 1.0 + 0.0j
            alpha = -ph * nx
            for i in range(m0, n):
                v[i] = A[i, k]
            v[m0] -= alpha
            nv2 = 0.0
            for i in range(m0, n):
                nv2 += v[i].real ** 2 + v[i].imag ** 2
            s = 1.0 / math.sqrt(nv2)
            for i in range(m0, n):
                v[i] *= s
            e[k] = nx
        else:
            e[k] = 0.0

        # one sweep: finish the previous rank-2 update, accumulate p = A22 v
        for j in range(m0, n):
            vj = v[j]
            acc = 0.0 + 0.0j
            if pending:
                vjc = vo[j].conjugate()
                qjc = qo[j].conjugate()
                A[j, j] -= vo[j] * qjc + qo[j] * vjc
                for i in range(j + 1, n):
                    a = A[i, j] - (vo[i] * qjc + qo[i] * vjc)
                    A[i, j] = a
                    p[i] += a * vj
                    acc += a.conjugate() * v[i]
            else:
                for i in range(j + 1, n):
                    a = A[i, j]
                    p[i] += a * vj
                    acc += a.conjugate() * v[i]
            p[j] += A[j, j].real * vj + acc

        K = 0.0
        for i in range(m0, n):
            K += (v[i].conjugate() * p[i]).real
        for i in range(m0, n):
            vo[i] = v[i]
            qo[i] = 2.0 * (p[i] - K * v[i])
        pending = True
    return d, e


@nb.njit(cache=True, nogil=True)
def _ql_implicit(d, e, max_sweeps):
    # d: diagonal (n), e: subdiagonal padded to length n; both overwritten.
    # Returns -1 on success, else the index that failed to converge.
    n = d.shape[0]
    eps = np.finfo(np.float64).eps
    tiny = np.finfo(np.float64).tiny
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd or abs(e[m]) <= tiny:
                    break
                m += 1
            if m == l:
                break
            if it == max_sweeps:
                return l
            it += 1
            # Wilkinson-type shift from the leading 2x2 block
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            deflated = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


def tridiagonalize(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Real symmetric tridiagonal (diagonal, off-diagonal) unitarily similar to A."""
    A = np.array(A, dtype=np.complex128, order="F", copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return _tridiagonalize(A)


def tridiagonal_eigenvalues(d, e, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    d = np.array(d, dtype=np.float64, copy=True)
    n = d.shape[0]
    ee = np.zeros(n)
    ee[: n - 1] = e
    failed = _ql_implicit(d, ee, max_sweeps)
    if failed >= 0:
        raise ConvergenceError(
            f"QL iteration did not converge for eigenvalue {failed} within {max_sweeps} sweeps"
        )
    d.sort()
    return d


def eigvalsh(A: np.ndarray, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix (lower triangle is read)."""
    A = np.asarray(A)
    if A.shape == (0, 0):
        return np.zeros(0)
    d, e = tridiagonalize(A)
    return tridiagonal_eigenvalues(d, e, max_sweeps)
