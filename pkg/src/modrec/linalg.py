"""Dependency-free Hermitian eigendecomposition via cyclic Jacobi rotations.

Each rotation zeroes one off-diagonal entry with a complex plane rotation;
sweeps repeat until the off-diagonal Frobenius mass falls below
1e-14 * ||A||_F.  Intended for the moderate sizes this package certifies
(a few hundred at most); accuracy is near machine precision, which matters
because rank decisions hinge on eigenvalues close to zero.
"""

from __future__ import annotations

import numpy as np


def _offdiag_frobenius(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def hermitian_eig(A: np.ndarray, tol_scale: float = 1e-14, max_sweeps: int = 100):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Returns (w, V) with A @ V[:, k] = w[k] * V[:, k].  Raises ValueError if A
    is not Hermitian within 1e-12 (relative to its largest entry) and
    RuntimeError if the sweep limit is exhausted, which does not happen for
    genuinely Hermitian input.
    """
    a = np.asarray(A, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
    if float(np.max(np.abs(a - a.conj().T))) > 1e-12 * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    if n == 1:
        return np.array([a[0, 0].real]), v

    norm_f = float(np.linalg.norm(a))
    if norm_f == 0.0:
        return np.zeros(n), v
    threshold = tol_scale * norm_f

    for _ in range(max_sweeps):
        if _offdiag_frobenius(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if tau == 0.0:
                    t = 1.0
                else:
                    t = -np.sign(tau) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # Columns: [p] <- c*[p] + s*conj(phase)*[q]; [q] <- -s*phase*[p] + c*[q]
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p + s * np.conj(phase) * col_q
                a[:, q] = -s * phase * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p + s * phase * row_q
                a[q, :] = -s * np.conj(phase) * row_p + c * row_q
                app = a[p, p].real
                aqq = a[q, q].real
                a[p, p] = app
                a[q, q] = aqq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vc_p = v[:, p].copy()
                vc_q = v[:, q].copy()
                v[:, p] = c * vc_p + s * np.conj(phase) * vc_q
                v[:, q] = -s * phase * vc_p + c * vc_q
    else:
        raise RuntimeError("Jacobi sweeps did not converge")

    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]
