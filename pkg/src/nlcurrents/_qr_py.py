"""Pure-Python kernel of the shifted Hessenberg QR eigenvalue iteration.

Operates in place on a complex upper-Hessenberg matrix and returns its
eigenvalues (unordered).  A compiled drop-in replacement lives in
``_qr_core``; this module is the fallback and the reference implementation.
"""

from __future__ import annotations

import cmath

import numpy as np


class NonConvergenceError(RuntimeError):
    """QR iteration failed to deflate within the iteration budget."""


def _wilkinson_shift(h11: complex, h12: complex, h21: complex,
                     h22: complex) -> complex:
    """Eigenvalue of the trailing 2x2 block closest to h22."""
    tr = h11 + h22
    det = h11 * h22 - h12 * h21
    disc = cmath.sqrt(tr * tr - 4.0 * det)
    r1 = (tr + disc) / 2.0
    r2 = (tr - disc) / 2.0
    return r1 if abs(r1 - h22) <= abs(r2 - h22) else r2


def qr_eigenvalues(H: np.ndarray, max_sweeps: int = 40) -> np.ndarray:
    """Eigenvalues of an upper-Hessenberg complex matrix (destroys H).

    Single-shift QR with Wilkinson shifts, deflation of negligible
    subdiagonals, and an exceptional ad-hoc shift every tenth stalled sweep.
    """
    n = H.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.complex128)
    eps = np.finfo(np.float64).eps
    # Givens coefficients reused between the row and column passes.
    cs = np.zeros(n, dtype=np.complex128)
    sn = np.zeros(n, dtype=np.complex128)
    hi = n - 1
    stalled = 0
    while hi > 0:
        # deflate any negligible subdiagonal inside the active block
        lo = hi
        while lo > 0:
            small = eps * (abs(H[lo - 1, lo - 1]) + abs(H[lo, lo]))
            if small == 0.0:
                small = eps * _norm_est(H, n)
            if abs(H[lo, lo - 1]) <= small:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            stalled = 0
            continue
        stalled += 1
        if stalled > max_sweeps * n:
            raise NonConvergenceError(
                f"eigenvalue {hi} not deflated after {stalled} sweeps")
        if stalled % 10 == 0:
            # exceptional shift built from the stuck subdiagonal
            mu = H[hi, hi] + 0.75 * abs(H[hi, hi - 1])
        else:
            mu = _wilkinson_shift(H[hi - 1, hi - 1], H[hi - 1, hi],
                                  H[hi, hi - 1], H[hi, hi])
        _shifted_qr_sweep(H, lo, hi, mu, cs, sn)
    return np.diag(H).astype(np.complex128, copy=True)


def _norm_est(H: np.ndarray, n: int) -> float:
    return float(np.max(np.abs(H))) if n else 0.0


def _shifted_qr_sweep(H: np.ndarray, lo: int, hi: int, mu: complex,
                      cs: np.ndarray, sn: np.ndarray) -> None:
    """One explicit QR step H - mu*I = QR, H <- RQ + mu*I on the active
    block [lo, hi], using complex Givens rotations."""
    for k in range(lo, hi + 1):
        H[k, k] -= mu
    # row pass: zero the subdiagonal of H - mu*I
    for k in range(lo, hi):
        a = H[k, k]
        b = H[k + 1, k]
        d = np.hypot(abs(a), abs(b))
        if d == 0.0:
            cs[k] = 1.0
            sn[k] = 0.0
            continue
        c = np.conj(a) / d
        s = np.conj(b) / d
        cs[k] = c
        sn[k] = s
        for j in range(k, hi + 1):
            t1 = H[k, j]
            t2 = H[k + 1, j]
            H[k, j] = c * t1 + s * t2
            H[k + 1, j] = -np.conj(s) * t1 + np.conj(c) * t2
    # column pass: multiply by Q on the right
    for k in range(lo, hi):
        c = cs[k]
        s = sn[k]
        top = min(k + 2, hi)
        for i in range(lo, top + 1):
            t1 = H[i, k]
            t2 = H[i, k + 1]
            H[i, k] = t1 * np.conj(c) + t2 * np.conj(s)
            H[i, k + 1] = -t1 * s + t2 * c
    for k in range(lo, hi + 1):
        H[k, k] += mu
