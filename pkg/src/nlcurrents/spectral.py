"""Stationary states, time evolution and per-mode invariance reports.

Energies are sorted by ascending real part (ties by imaginary part) and
eigenvectors are gauge-fixed to unit norm with the first significant entry
positive real.  Time evolution of a static model is exact (spectral
propagation); driven models are integrated with classical RK4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import eig as _eig
from .currents import (LinkCurrentField, StateVector, constancy_deviation,
                       net_nlc_domain, nlc_field)
from .lattice import (DrivenModel, LatticeModel, hamiltonian_matrix,
                      model_at_time)
from .symmetry import SymmetryTransform


@dataclass(frozen=True)
class EigenSolution:
    """Spectrum of a closed model: energies[k] pairs with modes[:, k]."""

    energies: np.ndarray
    modes: np.ndarray
    degenerate: np.ndarray
    residual: float

    @property
    def n_sites(self) -> int:
        return self.modes.shape[0]

    def state(self, k: int) -> StateVector:
        """Stationary state of the k-th mode (0-based index)."""
        return StateVector(self.modes[:, k])

    def real_energy_indices(self, tol: float = 1e-10) -> list[int]:
        return [k for k in range(self.energies.size)
                if abs(self.energies[k].imag) <= tol]


def eigenmodes(model: LatticeModel) -> EigenSolution:
    """Diagonalize a closed model with the in-house solver."""
    H = hamiltonian_matrix(model)
    values, vectors, degenerate = _eig.eig(H)
    res = float(np.max(np.abs(H @ vectors - vectors * values[None, :]))) \
        if model.n_sites else 0.0
    return EigenSolution(energies=values, modes=vectors,
                         degenerate=degenerate, residual=res)


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled states psi(t_i); times increase with constant
    step."""

    states: tuple[StateVector, ...]

    def __post_init__(self):
        if len(self.states) < 1:
            raise ValueError("trajectory needs at least one sample")

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])

    @property
    def dt(self) -> float:
        t = self.times
        return float(t[1] - t[0]) if t.size > 1 else 0.0

    def norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(s.amplitudes) for s in self.states])


def time_evolve(model: LatticeModel | DrivenModel, initial: StateVector,
                t_final: float, n_steps: int) -> Trajectory:
    """Evolve i d(psi)/dt = H(t) psi from t=0, returning n_steps+1 samples.

    Static models propagate exactly through the eigenbasis; driven models
    use fixed-step RK4 (local error O(dt^5), global O(dt^4))."""
    if n_steps < 1:
        raise ValueError("need at least one step")
    dt = t_final / n_steps
    if isinstance(model, DrivenModel):
        return _evolve_rk4(model, initial, dt, n_steps)
    return _evolve_exact(model, initial, dt, n_steps)


def _evolve_exact(model: LatticeModel, initial: StateVector, dt: float,
                  n_steps: int) -> Trajectory:
    sol = eigenmodes(model)
    coeff = np.linalg.solve(sol.modes, initial.amplitudes)
    states = []
    for i in range(n_steps + 1):
        t = initial.time + i * dt
        phases = np.exp(-1j * sol.energies * (t - initial.time))
        states.append(StateVector(sol.modes @ (coeff * phases), time=t))
    return Trajectory(tuple(states))


def _evolve_rk4(driven: DrivenModel, initial: StateVector, dt: float,
                n_steps: int) -> Trajectory:
    def rhs(t, psi):
        H = hamiltonian_matrix(model_at_time(driven, t))
        return -1j * (H @ psi)

    psi = initial.amplitudes.copy()
    t = initial.time
    states = [StateVector(psi.copy(), time=t)]
    for _ in range(n_steps):
        k1 = rhs(t, psi)
        k2 = rhs(t + dt / 2, psi + dt / 2 * k1)
        k3 = rhs(t + dt / 2, psi + dt / 2 * k2)
        k4 = rhs(t + dt, psi + dt * k3)
        psi = psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
        states.append(StateVector(psi.copy(), time=t))
    return Trajectory(tuple(states))


# -- per-mode invariance ----------------------------------------------------

@dataclass(frozen=True)
class ModeInvariance:
    """Constancy of the NLC of one stationary state over one domain."""

    mode_index: int
    energy: complex
    q_plus_value: complex
    q_minus_value: complex
    constancy_plus: float
    constancy_minus: float
    net_domain: complex


def invariance_report(model: LatticeModel, transform: SymmetryTransform,
                      solution: EigenSolution | None = None
                      ) -> list[ModeInvariance]:
    """For every eigenmode: representative NLC values (medians over links
    interior to D), their constancy deviation, and the net domain sum."""
    if solution is None:
        solution = eigenmodes(model)
    lo, hi = transform.d_lo, transform.d_hi
    out = []
    for k in range(solution.energies.size):
        field = nlc_field(model, solution.state(k), transform)
        # links with both endpoints inside D
        qp = field.q_plus[lo - 1:hi - 1] if hi > lo else field.q_plus[lo - 1:lo]
        qm = field.q_minus[lo:hi] if hi > lo else field.q_minus[lo - 1:lo]
        med = (lambda v: complex(np.median(v.real), np.median(v.imag))
               if v.size else 0j)
        out.append(ModeInvariance(
            mode_index=k,
            energy=complex(solution.energies[k]),
            q_plus_value=med(qp),
            q_minus_value=med(qm),
            constancy_plus=constancy_deviation(qp) if qp.size else 0.0,
            constancy_minus=constancy_deviation(qm) if qm.size else 0.0,
            net_domain=net_nlc_domain(field, (lo, hi)),
        ))
    return out


def mixed_mode_nlc(model: LatticeModel, transform: SymmetryTransform,
                   bra_state: StateVector, ket_state: StateVector
                   ) -> LinkCurrentField:
    """NLC field of the bilinear mixing two states: bra amplitudes occupy
    the conjugated slots, ket amplitudes the transformed slots.  Used to
    pair modes whose energies are mutual complex conjugates."""
    from .currents import _amp, _hop, _site_images  # shared kernels
    phi = bra_state.amplitudes
    psi = ket_state.amplitudes
    if phi.size != psi.size or psi.size != model.n_sites:
        raise ValueError("state sizes must match the model")
    sbar, up, dn = _site_images(transform, model.n_sites)
    n = np.arange(1, model.n_sites + 1)
    vals = {}
    for name, s, img in (("plus", +1, up), ("minus", -1, dn)):
        h_img = _hop(model, sbar[n], img[n])
        h_loc = _hop(model, n, n + s)
        vals["q_" + name] = (np.conj(_amp(phi, n)) * h_img * _amp(psi, img[n])
                             - np.conj(_amp(phi, n + s)) * np.conj(h_loc)
                             * _amp(psi, sbar[n])) / 1j
        vals["dual_" + name] = (_amp(phi, n) * h_img * _amp(psi, img[n])
                                - _amp(phi, n + s) * h_loc
                                * _amp(psi, sbar[n])) / 1j
        vals["j_" + name] = (np.conj(_amp(phi, n)) * h_loc * _amp(psi, n + s)
                             - np.conj(_amp(phi, n + s)) * np.conj(h_loc)
                             * _amp(psi, n)) / 1j
    return LinkCurrentField(transform=transform,
                            q_plus=vals["q_plus"], q_minus=vals["q_minus"],
                            dual_plus=vals["dual_plus"],
                            dual_minus=vals["dual_minus"],
                            j_plus=vals["j_plus"], j_minus=vals["j_minus"])


# -- antisymmetry (PT-style) transition sweeps ------------------------------

@dataclass(frozen=True)
class SweepPoint:
    parameter: float
    energies: np.ndarray
    n_real: int
    max_imag: float


def pt_transition_sweep(model_family, parameters,
                        real_tol: float = 1e-10) -> list[SweepPoint]:
    """Diagonalize model_family(p) for each parameter and report how many
    energies are real; locates symmetric/broken phase windows of gain-loss
    families."""
    points = []
    for p in parameters:
        sol = eigenmodes(model_family(p))
        imag = np.abs(sol.energies.imag)
        points.append(SweepPoint(
            parameter=float(p),
            energies=sol.energies.copy(),
            n_real=int(np.sum(imag <= real_tol)),
            max_imag=float(np.max(imag)) if imag.size else 0.0,
        ))
    return points


def find_transition(model_family, p_lo: float, p_hi: float,
                    real_tol: float = 1e-10, iters: int = 60) -> float:
    """Bisect the smallest parameter in [p_lo, p_hi] where the spectrum
    stops being entirely real (exceptional-point estimate)."""
    def all_real(p):
        sol = eigenmodes(model_family(p))
        return float(np.max(np.abs(sol.energies.imag))) <= real_tol

    if not all_real(p_lo):
        raise ValueError("spectrum already complex at the lower endpoint")
    if all_real(p_hi):
        raise ValueError("spectrum still real at the upper endpoint")
    for _ in range(iters):
        mid = 0.5 * (p_lo + p_hi)
        if all_real(mid):
            p_lo = mid
        else:
            p_hi = mid
    return 0.5 * (p_lo + p_hi)
