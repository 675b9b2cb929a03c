# cython: language_level=3
"""Compiled kernel of the shifted Hessenberg QR eigenvalue iteration.

Same algorithm and semantics as ``_qr_py.qr_eigenvalues``; selected at
import time when the extension is available.
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport hypot, sqrt

cnp.import_array()


class NonConvergenceError(RuntimeError):
    """QR iteration failed to deflate within the iteration budget."""


cdef inline double cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef double complex _csqrt(double complex z):
    cdef double r = hypot(z.real, z.imag)
    cdef double re, im
    if r == 0.0:
        return 0.0
    re = sqrt((r + z.real) / 2.0)
    im = sqrt((r - z.real) / 2.0)
    if z.imag < 0.0:
        im = -im
    return complex(re, im)


cdef double complex _wilkinson_shift(double complex h11, double complex h12,
                                     double complex h21, double complex h22):
    cdef double complex tr = h11 + h22
    cdef double complex det = h11 * h22 - h12 * h21
    cdef double complex disc = _csqrt(tr * tr - 4.0 * det)
    cdef double complex r1 = (tr + disc) / 2.0
    cdef double complex r2 = (tr - disc) / 2.0
    if cabs2(r1 - h22) <= cabs2(r2 - h22):
        return r1
    return r2


@cython.boundscheck(False)
@cython.wraparound(False)
cdef void _shifted_qr_sweep(double complex[:, ::1] H, Py_ssize_t lo,
                            Py_ssize_t hi, double complex mu,
                            double complex[::1] cs,
                            double complex[::1] sn) nogil:
    cdef Py_ssize_t k, j, i, top
    cdef double complex a, b, c, s, t1, t2
    cdef double d
    for k in range(lo, hi + 1):
        H[k, k] = H[k, k] - mu
    for k in range(lo, hi):
        a = H[k, k]
        b = H[k + 1, k]
        d = hypot(hypot(a.real, a.imag), hypot(b.real, b.imag))
        if d == 0.0:
            cs[k] = 1.0
            sn[k] = 0.0
            continue
        c = a.conjugate() / d
        s = b.conjugate() / d
        cs[k] = c
        sn[k] = s
        for j in range(k, hi + 1):
            t1 = H[k, j]
            t2 = H[k + 1, j]
            H[k, j] = c * t1 + s * t2
            H[k + 1, j] = -s.conjugate() * t1 + c.conjugate() * t2
    for k in range(lo, hi):
        c = cs[k]
        s = sn[k]
        top = k + 2
        if top > hi:
            top = hi
        for i in range(lo, top + 1):
            t1 = H[i, k]
            t2 = H[i, k + 1]
            H[i, k] = t1 * c.conjugate() + t2 * s.conjugate()
            H[i, k + 1] = -t1 * s + t2 * c
    for k in range(lo, hi + 1):
        H[k, k] = H[k, k] + mu


@cython.boundscheck(False)
@cython.wraparound(False)
def qr_eigenvalues(cnp.ndarray[double complex, ndim=2] Harr,
                   int max_sweeps=40):
    """Eigenvalues of an upper-Hessenberg complex matrix (destroys Harr)."""
    cdef Py_ssize_t n = Harr.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.complex128)
    cdef double complex[:, ::1] H = np.ascontiguousarray(Harr)
    cdef double eps = np.finfo(np.float64).eps
    cdef cnp.ndarray cs_arr = np.zeros(n, dtype=np.complex128)
    cdef cnp.ndarray sn_arr = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] cs = cs_arr
    cdef double complex[::1] sn = sn_arr
    cdef Py_ssize_t hi = n - 1
    cdef Py_ssize_t lo, i, j
    cdef long stalled = 0
    cdef double small, norm
    cdef double complex mu
    while hi > 0:
        lo = hi
        while lo > 0:
            small = eps * (abs(H[lo - 1, lo - 1]) + abs(H[lo, lo]))
            if small == 0.0:
                norm = 0.0
                for i in range(n):
                    for j in range(n):
                        if abs(H[i, j]) > norm:
                            norm = abs(H[i, j])
                small = eps * norm
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
                "eigenvalue %d not deflated after %d sweeps" % (hi, stalled))
        if stalled % 10 == 0:
            mu = H[hi, hi] + 0.75 * abs(H[hi, hi - 1])
        else:
            mu = _wilkinson_shift(H[hi - 1, hi - 1], H[hi - 1, hi],
                                  H[hi, hi - 1], H[hi, hi])
        with nogil:
            _shifted_qr_sweep(H, lo, hi, mu, cs, sn)
    out = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        out[i] = H[i, i]
    return out
