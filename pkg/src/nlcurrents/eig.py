"""In-house dense complex eigensolver.

Pipeline: Householder reduction to upper-Hessenberg form, shifted QR
iteration for the eigenvalues (compiled kernel when available, pure-Python
fallback otherwise), inverse iteration for the eigenvectors, Rayleigh
refinement, and an infinity-norm residual check.
"""

from __future__ import annotations

import numpy as np

from ._qr_py import NonConvergenceError
from ._qr_py import qr_eigenvalues as _qr_python

try:  # compiled kernel, built from _qr_core.pyx
    from ._qr_core import qr_eigenvalues as _qr_compiled
    USING_COMPILED = True
except ImportError:  # pragma: no cover - depends on the build
    _qr_compiled = None
    USING_COMPILED = False

__all__ = ["eig", "eigvals", "hessenberg", "NonConvergenceError",
           "ResidualError", "USING_COMPILED", "qr_kernel_name"]

RESIDUAL_FACTOR = 1e-10
DEGENERACY_GAP = 1e-9


class ResidualError(RuntimeError):
    """Eigenpair residual exceeded the guaranteed bound."""


def qr_kernel_name() -> str:
    return "compiled" if USING_COMPILED else "python"


def hessenberg(A: np.ndarray) -> np.ndarray:
    """Upper-Hessenberg form of A (similar matrix) via complex Householder
    reflectors; the orthogonal factor is not accumulated."""
    H = np.array(A, dtype=np.complex128, copy=True)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k]
        nx = np.linalg.norm(x)
        if nx == 0.0:
            continue
        alpha = -np.exp(1j * np.angle(x[0])) * nx if x[0] != 0 else -nx
        v = x.copy()
        v[0] -= alpha
        nv = np.linalg.norm(v)
        if nv < np.finfo(float).eps * nx:
            continue
        v /= nv
        # H <- P H P with P = I - 2 v v^dagger acting on rows/cols k+1..n
        H[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, k:])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0.0
    return H


def _qr_values(H: np.ndarray, use_compiled: bool | None = None) -> np.ndarray:
    kernel = _qr_compiled if (USING_COMPILED if use_compiled is None
                              else use_compiled) else _qr_python
    if kernel is None:
        kernel = _qr_python
    return kernel(np.ascontiguousarray(H, dtype=np.complex128))


def eigvals(A: np.ndarray, use_compiled: bool | None = None) -> np.ndarray:
    """Unordered eigenvalues of a dense complex matrix."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if A.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128)
    if A.shape[0] == 1:
        return A.ravel().copy()
    return _qr_values(hessenberg(A), use_compiled)


def _sort_spectrum(values: np.ndarray) -> np.ndarray:
    """Indices sorting eigenvalues by ascending real part, then imaginary."""
    return np.lexsort((values.imag, values.real))


def _inverse_iteration(A: np.ndarray, lam: complex, norm_a: float,
                       avoid: list[np.ndarray], rng) -> np.ndarray:
    """Right eigenvector for an approximate eigenvalue lam via inverse
    iteration with a perturbed shift; re-orthogonalized against `avoid`
    (vectors already found for nearly equal eigenvalues)."""
    n = A.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    base_pert = 1e-12 * max(norm_a, 1.0)
    for attempt in range(6):
        pert = base_pert * (10.0 ** attempt)
        shift = lam + pert * (1.0 + 0.7j)
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        for v in avoid:
            x -= (v.conj() @ x) * v
        x /= np.linalg.norm(x)
        try:
            for _ in range(4):
                y = np.linalg.solve(A - shift * eye, x)
                for v in avoid:
                    y -= (v.conj() @ y) * v
                ny = np.linalg.norm(y)
                if not np.isfinite(ny) or ny == 0.0:
                    raise np.linalg.LinAlgError
                x = y / ny
        except np.linalg.LinAlgError:
            continue
        if np.all(np.isfinite(x)):
            return x
    raise ResidualError(f"inverse iteration failed near eigenvalue {lam}")


def eig(A: np.ndarray, use_compiled: bool | None = None
        ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(values, vectors, degenerate_flags) with values sorted by real part
    (ties by imaginary part), columns of `vectors` holding unit-norm right
    eigenvectors with the first significant entry rotated to the positive
    real axis, and a boolean flag per eigenvalue marking near-degeneracy.

    Raises ResidualError unless every pair satisfies
    ||A a - E a||_inf <= 1e-10 * ||A||_inf.
    """
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    n = A.shape[0]
    values = eigvals(A, use_compiled)
    order = _sort_spectrum(values)
    values = values[order]
    norm_a = float(np.max(np.sum(np.abs(A), axis=1))) if n else 0.0
    vectors = np.zeros((n, n), dtype=np.complex128)
    rng = np.random.default_rng(20170623)
    degenerate = np.zeros(n, dtype=bool)
    for i in range(n):
        for j in range(n):
            if i != j and abs(values[i] - values[j]) < DEGENERACY_GAP:
                degenerate[i] = True
                break
    for i in range(n):
        avoid = [vectors[:, j] for j in range(i)
                 if abs(values[i] - values[j]) < DEGENERACY_GAP]
        x = _inverse_iteration(A, values[i], norm_a, avoid, rng)
        # Rayleigh refinement of the eigenvalue
        lam = complex(x.conj() @ (A @ x))
        res = np.max(np.abs(A @ x - lam * x))
        if res > RESIDUAL_FACTOR * max(norm_a, 1e-300):
            # one extra refinement pass with the improved shift
            x = _inverse_iteration(A, lam, norm_a, avoid, rng)
            lam = complex(x.conj() @ (A @ x))
            res = np.max(np.abs(A @ x - lam * x))
            if res > RESIDUAL_FACTOR * max(norm_a, 1e-300):
                raise ResidualError(
                    f"eigenpair residual {res:.3e} exceeds bound")
        values[i] = lam
        vectors[:, i] = _fix_gauge(x)
    order = _sort_spectrum(values)
    return values[order], vectors[:, order], degenerate[order]


def _fix_gauge(x: np.ndarray) -> np.ndarray:
    """Unit norm; the first entry with magnitude above 1e-8 of the max is
    rotated to the positive real axis."""
    x = x / np.linalg.norm(x)
    mags = np.abs(x)
    idx = int(np.argmax(mags > 1e-8 * mags.max()))
    phase = x[idx] / abs(x[idx])
    return x / phase
