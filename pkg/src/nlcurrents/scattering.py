"""Plane-wave scattering on an array coupled to uniform semi-infinite leads.

The scatterer occupies sites 1..N; lead sites n <= 0 and n >= N+1 carry
plane waves with dispersion E = v_lead + 2 h_lead cos k, k in (0, pi).  The
interior amplitudes and the two outgoing coefficients solve an (N+2)-row
linear system obtained by eliminating the leads exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .currents import StateVector, nlc_field
from .lattice import LatticeModel, LeadSpec, ModelError
from .symmetry import SymmetryTransform


class SingularSystemError(RuntimeError):
    """Scattering linear system is singular at this energy."""


class ResonantDenominatorError(ZeroDivisionError):
    """Composition denominator 1 - r2*r1' vanished (perfect resonance)."""


class ZeroTransmissionError(ZeroDivisionError):
    """Operation undefined at a transmission zero."""


def _lead(model: LatticeModel) -> LeadSpec:
    if model.boundary is None:
        raise ModelError("scattering requires a model with leads")
    return model.boundary


def lead_dispersion(lead: LeadSpec, k: float) -> float:
    """Lead band energy E(k) = v + 2 h cos k."""
    if not 0.0 < k < math.pi:
        raise ValueError("wavenumber must lie in (0, pi)")
    return lead.v + 2.0 * lead.h * math.cos(k)


@dataclass(frozen=True)
class ScatteringState:
    """Solution of one scattering problem: interior amplitudes plus the
    outgoing coefficients (incoming ones are inputs)."""

    k: float
    energy: float
    amplitudes: np.ndarray  # a_1..a_N
    c_in_left: complex
    c_in_right: complex
    c_out_left: complex   # coefficient of zeta^-n in the left lead
    c_out_right: complex  # coefficient of zeta^+n in the right lead

    def lead_amplitude(self, n: int, n_sites: int) -> complex:
        """Amplitude at a lead site (n <= 0 or n >= n_sites + 1)."""
        z = cmath.exp(1j * self.k)
        if n <= 0:
            return self.c_in_left * z ** n + self.c_out_left * z ** (-n)
        if n >= n_sites + 1:
            return self.c_out_right * z ** n + self.c_in_right * z ** (-n)
        raise ValueError(f"site {n} is not a lead site")


def solve_scattering(model: LatticeModel, k: float,
                     c_in_left: complex = 1.0,
                     c_in_right: complex = 0.0) -> ScatteringState:
    """Stationary scattering state at wavenumber k for given incoming
    coefficients from the two leads."""
    lead = _lead(model)
    E = lead_dispersion(lead, k)
    N = model.n_sites
    h = lead.h
    z = cmath.exp(1j * k)
    dim = N + 2
    A = np.zeros((dim, dim), dtype=np.complex128)
    b = np.zeros(dim, dtype=np.complex128)
    # unknowns x = [c_out_left, a_1, ..., a_N, c_out_right]
    A[0, 0] = -h / z
    A[0, 1] = h
    b[0] = h * z * c_in_left
    for n in range(1, N + 1):
        row = n
        A[row, n] = model.v(n) - E
        if n > 1:
            A[row, n - 1] = model.h(n, n - 1)
        else:
            A[row, 0] = h
            b[row] += -h * c_in_left
        if n < N:
            A[row, n + 1] = model.h(n, n + 1)
        else:
            A[row, N + 1] = h * z ** (N + 1)
            b[row] += -h * z ** (-(N + 1)) * c_in_right
    A[N + 1, N] = h
    A[N + 1, N + 1] = -h * z ** N
    b[N + 1] = h * z ** (-N) * c_in_right
    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"singular scattering system at k={k}") \
            from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystemError(f"non-finite scattering solution at k={k}")
    return ScatteringState(k=k, energy=E, amplitudes=x[1:N + 1],
                           c_in_left=complex(c_in_left),
                           c_in_right=complex(c_in_right),
                           c_out_left=complex(x[0]),
                           c_out_right=complex(x[N + 1]))


@dataclass(frozen=True)
class SMatrix:
    """2x2 scattering matrix in the (left, right) basis at fixed k."""

    k: float
    r: complex
    t: complex
    r_prime: complex
    t_prime: complex

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.r, self.t_prime],
                         [self.t, self.r_prime]], dtype=np.complex128)

    def unitarity_residual(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - np.eye(2))))

    def transmittance(self) -> float:
        return abs(self.t) ** 2

    def reflectances(self) -> tuple[float, float]:
        return abs(self.r) ** 2, abs(self.r_prime) ** 2


def s_matrix(model: LatticeModel, k: float) -> SMatrix:
    """S-matrix from two solves with unit input from each side (reciprocal
    nearest-neighbor chains give t = t')."""
    left = solve_scattering(model, k, 1.0, 0.0)
    right = solve_scattering(model, k, 0.0, 1.0)
    return SMatrix(k=k, r=left.c_out_left, t=left.c_out_right,
                   r_prime=right.c_out_right, t_prime=right.c_out_left)


def shift_smatrix(s: SMatrix, d: int) -> SMatrix:
    """S-matrix of the same scatterer translated d sites to the right:
    r picks up zeta^{2d}, r' picks up zeta^{-2d}, t is unchanged."""
    z2d = cmath.exp(2j * s.k * d)
    return SMatrix(k=s.k, r=s.r * z2d, t=s.t,
                   r_prime=s.r_prime / z2d, t_prime=s.t_prime)


def compose_smatrices(s1: SMatrix, s2: SMatrix,
                      tol: float = 1e-12) -> SMatrix:
    """S-matrix of two scatterers in series (s2 to the right of s1, with
    its own coordinate offset already folded in via shift_smatrix)."""
    if abs(s1.k - s2.k) > 1e-12:
        raise ValueError("cannot compose S-matrices at different k")
    denom = 1.0 - s2.r * s1.r_prime
    if abs(denom) <= tol:
        raise ResonantDenominatorError(
            "multiple-reflection series diverges (resonant denominator)")
    p = 1.0 / denom
    return SMatrix(
        k=s1.k,
        r=s1.r + s1.t_prime * s2.r * s1.t * p,
        t=s2.t * s1.t * p,
        r_prime=s2.r_prime + s2.t * s1.r_prime * s2.t_prime * p,
        t_prime=s1.t_prime * s2.t_prime * p,
    )


# -- NLC of scattering states ----------------------------------------------

def scattering_nlc(state: ScatteringState, alpha2: int,
                   lead: LeadSpec) -> complex:
    """Invariant NLC of a scattering state for a global inversion about the
    doubled center alpha2 (sites n -> alpha2 - n):

        q = 2 h sin k (zeta^{-2a} c_in_L^* c_in_R - zeta^{2a} c_out_L^* c_out_R)

    evaluated from the asymptotic coefficients alone."""
    z2a = cmath.exp(1j * state.k * alpha2)
    pref = 2.0 * lead.h * math.sin(state.k)
    return pref * (np.conj(state.c_in_left) * state.c_in_right / z2a
                   - np.conj(state.c_out_left) * state.c_out_right * z2a)


def embedded_state(model: LatticeModel, state: ScatteringState,
                   pad: int) -> tuple[LatticeModel, StateVector]:
    """Closed chain of N + 2*pad sites with explicit lead sites carrying
    the plane-wave amplitudes; used to evaluate NLC fields of scattering
    states site by site."""
    lead = _lead(model)
    N = model.n_sites
    onsite = ((complex(lead.v),) * pad + model.onsite
              + (complex(lead.v),) * pad)
    hop_up = ((complex(lead.h),) * pad + model.hop_up
              + (complex(lead.h),) * pad)
    hop_down = ((complex(lead.h),) * pad + model.hop_down
                + (complex(lead.h),) * pad)
    big = LatticeModel(N + 2 * pad, onsite, hop_up, hop_down)
    amps = np.zeros(N + 2 * pad, dtype=np.complex128)
    for i in range(pad):
        amps[i] = state.lead_amplitude(i - pad + 1, N)
        amps[pad + N + i] = state.lead_amplitude(N + 1 + i, N)
    amps[pad:pad + N] = state.amplitudes
    return big, StateVector(amps)


def embedded_nlc_field(model: LatticeModel, state: ScatteringState,
                       transform: SymmetryTransform, pad: int):
    """NLC field on the padded chain; the transform's site indices refer to
    the padded numbering (original site n is at n + pad)."""
    big, psi = embedded_state(model, state, pad)
    return nlc_field(big, psi, transform)


# -- perfect transmission resonances ---------------------------------------

def pt_unitarity_residual(s: SMatrix) -> float:
    """Generalized-unitarity defect | |T - 1| - sqrt(R R') | from the
    transmittance and the two reflectances."""
    T = s.transmittance()
    R, Rp = s.reflectances()
    return abs(abs(T - 1.0) - math.sqrt(R * Rp))


@dataclass(frozen=True)
class Resonance:
    k: float
    energy: float
    transmission_defect: float  # 1 - |t|^2 at the resonance
    symmetric: bool             # True for an sPTR, False for an aPTR


def find_ptr(model: LatticeModel, k_lo: float = 1e-3,
             k_hi: float = math.pi - 1e-3, n_scan: int = 2000,
             defect_tol: float = 1e-12,
             polish_center2: int | None = None) -> list[Resonance]:
    """Perfect transmission resonances |t| = 1 inside (k_lo, k_hi), located
    by a coarse scan of g(k) = 1 - |t|^2 followed by golden-section
    refinement of each local minimum.  For a scatterer that is globally
    inversion-symmetric about polish_center2/2, each resonance is polished
    further through the signed transparency condition (the defect itself is
    quadratic at the resonance and stalls near sqrt(eps))."""
    ks = np.linspace(k_lo, k_hi, n_scan)
    g = np.array([_transmission_defect(model, k) for k in ks])
    out = []
    for i in range(1, n_scan - 1):
        if g[i] <= g[i - 1] and g[i] <= g[i + 1] and g[i] < 1e-3:
            k_star, g_star = _golden_min(
                lambda k: _transmission_defect(model, k),
                ks[i - 1], ks[i + 1])
            if polish_center2 is not None and g_star < defect_tol:
                k_star = refine_transparency(model, polish_center2, k_star)
                g_star = _transmission_defect(model, k_star)
            if g_star < defect_tol and not any(
                    abs(k_star - r.k) < 1e-8 for r in out):
                out.append(Resonance(
                    k=k_star,
                    energy=lead_dispersion(_lead(model), k_star),
                    transmission_defect=g_star,
                    symmetric=False,
                ))
    return out


def _transmission_defect(model: LatticeModel, k: float) -> float:
    s = s_matrix(model, k)
    return abs(1.0 - abs(s.t) ** 2)


def _golden_min(f, a: float, b: float, iters: int = 200):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
        if b - a < 1e-15:
            break
    return (c, fc) if fc < fd else (d, fd)


def refine_ptr(sub_left: LatticeModel, sub_right: LatticeModel,
               offset: int, k_guess: float,
               window: float = 5e-4) -> float:
    """Polish a PTR wavenumber of a two-scatterer composite.

    At a PTR the multiple-reflection phase closes: Im[r2 * r1'] = 0 with
    Re[r2 * r1'] >= 0, which crosses zero transversally in k and can be
    bisected to machine precision (the transmission defect itself is
    quadratic around the resonance and stalls near 1e-8)."""
    def h(k):
        s1 = s_matrix(sub_left, k)
        s2 = shift_smatrix(s_matrix(sub_right, k), offset)
        return (s2.r * s1.r_prime).imag

    lo, hi = k_guess - window, k_guess + window
    f_lo, f_hi = h(lo), h(hi)
    if f_lo * f_hi > 0:
        return k_guess
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = h(mid)
        if f_mid == 0.0 or hi - lo < 1e-15:
            return mid
        if f_lo * f_mid <= 0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def refine_transparency(model: LatticeModel, alpha2: int, k_guess: float,
                        window: float = 5e-4) -> float:
    """Polish a transparency point |r| = 0 of a single scatterer that is
    inversion-symmetric about alpha2/2: the signed scalar
    Im[conj(r zeta^{-2 alpha}) t] carries |r t| with a sign and changes
    sign at a simple transmission resonance."""
    def g(k):
        s = s_matrix(model, k)
        ring_r = s.r * cmath.exp(-1j * k * alpha2)
        return (np.conj(ring_r) * s.t).imag

    lo, hi = k_guess - window, k_guess + window
    f_lo, f_hi = g(lo), g(hi)
    if f_lo * f_hi > 0:
        return k_guess
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = g(mid)
        if f_mid == 0.0 or hi - lo < 1e-15:
            return mid
        if f_lo * f_mid <= 0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def classify_resonance(model: LatticeModel, resonance: Resonance,
                       domains: list[tuple[int, int, int]],
                       pad: int = 2) -> Resonance:
    """Re-tag a resonance as symmetric (sPTR) when the invariant NLCs of
    all listed inversion domains (d_lo, d_hi, center2) vanish for the
    unit-left-input state at resonance."""
    lead = _lead(model)
    state = solve_scattering(model, resonance.k, 1.0, 0.0)
    scale = 2.0 * abs(lead.h) * math.sin(resonance.k)
    symmetric = True
    for d_lo, d_hi, center2 in domains:
        t = SymmetryTransform("inversion", d_lo + pad, d_hi + pad,
                              center2=center2 + 2 * pad)
        field = embedded_nlc_field(model, state, t, pad)
        links = field.q_plus[t.d_lo - 1:t.d_hi - 1]
        q = complex(np.median(links.real), np.median(links.imag))
        if abs(q) >= 1e-8 * max(scale, 1e-300):
            symmetric = False
    return Resonance(k=resonance.k, energy=resonance.energy,
                     transmission_defect=resonance.transmission_defect,
                     symmetric=symmetric)
