"""Floquet modes of harmonically driven arrays and period-averaged NLCs.

The driven Hamiltonian H(t) = H0 + H1 sin(wt) is expanded in Fourier
blocks; quasienergies and Floquet modes come from the block-tridiagonal
extended eigenproblem truncated at |m| <= M, solved with the in-house
eigensolver.  Period averages use composite Simpson quadrature on a uniform
grid over one period.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import eig as _eig
from .currents import StateVector, nlc_field
from .lattice import (DrivenModel, LatticeModel, drive_fourier_block,
                      hamiltonian_matrix, model_at_time)
from .symmetry import SymmetryTransform


class UnconvergedTruncationError(RuntimeError):
    """Quasienergies changed beyond tolerance when enlarging the Fourier
    truncation; increase harmonics."""


@dataclass(frozen=True)
class FloquetSolution:
    """N Floquet modes of a driven model.

    quasienergies are folded into (-w/2, w/2]; fourier_modes[k] has shape
    (2M+1, N) holding the components phi^m (m = -M..M) of mode k."""

    frequency: float
    harmonics: int
    quasienergies: np.ndarray
    fourier_modes: np.ndarray
    zero_weights: np.ndarray  # ||phi^0||^2 per selected mode

    @property
    def n_modes(self) -> int:
        return self.quasienergies.size

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.frequency

    def sample(self, k: int, n_times: int = 256) -> tuple[np.ndarray,
                                                          np.ndarray]:
        """(times, states) of the periodic part phi_k(t) on a uniform grid
        t_j = j*T/n_times, j = 0..n_times (endpoint included)."""
        M = self.harmonics
        T = self.period
        times = np.arange(n_times + 1) * (T / n_times)
        ms = np.arange(-M, M + 1)
        phases = np.exp(1j * np.outer(times, ms) * self.frequency)
        states = phases @ self.fourier_modes[k]
        return times, states


def extended_matrix(driven: DrivenModel, harmonics: int) -> np.ndarray:
    """Block-tridiagonal quasienergy matrix of size (2M+1)*N: diagonal
    blocks H0 + m*w*1, off-diagonal blocks H1/(2i) (lower) and -H1/(2i)
    (upper) from sin(wt) = (e^{iwt} - e^{-iwt})/(2i)."""
    H0 = hamiltonian_matrix(driven.base)
    H1 = drive_fourier_block(driven)
    N = driven.base.n_sites
    M = harmonics
    w = driven.frequency
    dim = (2 * M + 1) * N
    K = np.zeros((dim, dim), dtype=np.complex128)
    up = -H1 / 2j
    dn = H1 / 2j
    for b, m in enumerate(range(-M, M + 1)):
        sl = slice(b * N, (b + 1) * N)
        K[sl, sl] = H0 + m * w * np.eye(N)
        if b > 0:
            K[sl, slice((b - 1) * N, b * N)] = dn
        if b < 2 * M:
            K[sl, slice((b + 1) * N, (b + 2) * N)] = up
    return K


def fold_quasienergy(eps: float, w: float) -> float:
    """Fold a real quasienergy into the first zone (-w/2, w/2]."""
    folded = eps - w * np.floor(eps / w + 0.5)
    if folded <= -w / 2:
        folded += w
    return float(folded)


def _solve_truncated(driven: DrivenModel, M: int):
    K = extended_matrix(driven, M)
    values, vectors, _ = _eig.eig(K)
    N = driven.base.n_sites
    comps = vectors.T.reshape(values.size, 2 * M + 1, N)
    weights = np.sum(np.abs(comps[:, M, :]) ** 2, axis=1)
    picked = np.argsort(-weights)[:N]
    # deterministic ordering of the representatives by folded quasienergy
    eps = np.array([fold_quasienergy(values[i].real, driven.frequency)
                    + 1j * values[i].imag for i in picked])
    order = np.lexsort((eps.imag, eps.real))
    picked = picked[order]
    eps = eps[order]
    return eps, comps[picked], weights[picked]


def floquet_modes(driven: DrivenModel, harmonics: int = 6,
                  check_convergence: bool = True,
                  convergence_tol: float = 1e-9) -> FloquetSolution:
    """Floquet modes at truncation M = harmonics; when check_convergence is
    set the quasienergies are recomputed at M+2 and must agree to
    convergence_tol."""
    if harmonics < 1:
        raise ValueError("need at least one harmonic")
    eps, comps, weights = _solve_truncated(driven, harmonics)
    if check_convergence:
        eps2, _, _ = _solve_truncated(driven, harmonics + 2)
        drift = float(np.max(np.abs(eps - eps2)))
        if drift > convergence_tol:
            raise UnconvergedTruncationError(
                f"quasienergy drift {drift:.3e} between truncations "
                f"M={harmonics} and M={harmonics + 2}")
    return FloquetSolution(frequency=driven.frequency, harmonics=harmonics,
                           quasienergies=eps, fourier_modes=comps,
                           zero_weights=weights)


def simpson_weights(n_intervals: int) -> np.ndarray:
    """Composite Simpson weights for n_intervals (even) uniform intervals,
    including both endpoints; weights sum to n_intervals."""
    if n_intervals % 2 != 0 or n_intervals < 2:
        raise ValueError("Simpson rule needs an even number of intervals")
    w = np.ones(n_intervals + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


def period_averaged_nlc(driven: DrivenModel, solution: FloquetSolution,
                        mode_index: int, transform: SymmetryTransform,
                        n_times: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Period averages (q_plus_bar, q_minus_bar) of the NLC of one Floquet
    mode; the global phase e^{-i eps t} cancels in the bilinears, so the
    periodic part is used directly."""
    times, states = solution.sample(mode_index, n_times)
    w = simpson_weights(n_times) / n_times
    qp = np.zeros(driven.base.n_sites, dtype=np.complex128)
    qm = np.zeros_like(qp)
    for j, t in enumerate(times):
        field = nlc_field(model_at_time(driven, float(t)),
                          StateVector(states[j], time=float(t)), transform)
        qp += w[j] * field.q_plus
        qm += w[j] * field.q_minus
    return qp, qm


def zero_sum_check(q_plus_bar: np.ndarray, q_minus_bar: np.ndarray,
                   domain: tuple[int, int] | None = None) -> float:
    """max_n |q_plus_bar + q_minus_bar| over the domain: the period-averaged
    upper and lower NLCs of a Floquet mode cancel sitewise."""
    s = np.abs(q_plus_bar + q_minus_bar)
    if domain is not None:
        lo, hi = domain
        s = s[lo - 1:hi]
    return float(np.max(s)) if s.size else 0.0


def monodromy_matrix(driven: DrivenModel, n_steps: int = 4096) -> np.ndarray:
    """One-period propagator U(T, 0) by RK4, column by column; its
    eigenvalues are e^{-i eps T} (used as an independent cross-check of the
    extended-matrix quasienergies)."""
    N = driven.base.n_sites
    T = driven.period
    dt = T / n_steps

    def rhs(t, psi):
        H = hamiltonian_matrix(model_at_time(driven, t))
        return -1j * (H @ psi)

    U = np.eye(N, dtype=np.complex128)
    t = 0.0
    for _ in range(n_steps):
        k1 = rhs(t, U)
        k2 = rhs(t + dt / 2, U + dt / 2 * k1)
        k3 = rhs(t + dt / 2, U + dt / 2 * k2)
        k4 = rhs(t + dt, U + dt * k3)
        U = U + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    return U
