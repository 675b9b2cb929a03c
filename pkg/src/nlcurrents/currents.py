"""Local and nonlocal link currents, nonlocal charges, continuity residuals,
amplitude mapping relations and the current connection.

The nonlocal current (NLC) attached to site n couples the link (n, n+1) (or
(n, n-1)) with its image under a symmetry transform:

    i q_n^+- = psi_n^* h_{S(n),S(n+-1)} psi_{S(n+-1)}
               - psi_{n+-1}^* h_{n,n+-1}^* psi_{S(n)}

with neighbor images S(n+-1) = n̄ -+ 1 for an inversion and n̄ +- 1 for a
translation.  Any index falling outside [1, N] contributes zero (currents
"flow on nonexisting links").  The dual NLC drops all complex conjugations;
the bitemporal NLC replaces the conjugated amplitudes by the state at -t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeModel
from .symmetry import (INVERSION, TRANSLATION, SymmetryTransform,
                       TransformError)


class SingularCurrentError(ZeroDivisionError):
    """Local current too small for the current-based amplitude mapping."""


class ZeroAmplitudeOnPathError(ZeroDivisionError):
    """Summation mapping path contains a vanishing amplitude."""


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes psi_1..psi_N at one instant (time is metadata,
    no normalization is imposed)."""

    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError("state must be a nonempty 1D complex array")
        if not np.all(np.isfinite(amps)):
            raise ValueError("state amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_sites(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class LinkCurrentField:
    """Per-site values of the six current fields for one state/transform."""

    transform: SymmetryTransform
    q_plus: np.ndarray
    q_minus: np.ndarray
    dual_plus: np.ndarray
    dual_minus: np.ndarray
    j_plus: np.ndarray
    j_minus: np.ndarray

    @property
    def n_sites(self) -> int:
        return self.q_plus.size


# -- index bookkeeping ------------------------------------------------------

def _site_images(transform: SymmetryTransform, n_sites: int):
    """Arrays (sbar, up_img, dn_img), 1-based with entry 0 unused:
    sbar[n] = S(n); up_img[n] = S(n+1); dn_img[n] = S(n-1).
    Identity outside D; indexes may leave [1, N] (handled as zero later)."""
    transform.validate_for(n_sites)
    sbar = np.arange(n_sites + 1)
    up = np.arange(n_sites + 1) + 1
    dn = np.arange(n_sites + 1) - 1
    inv = transform.kind == INVERSION
    for n in transform.domain:
        nbar = (transform.center2 - n) if inv else (n + transform.shift)
        sbar[n] = nbar
        up[n] = nbar - 1 if inv else nbar + 1
        dn[n] = nbar + 1 if inv else nbar - 1
    return sbar, up, dn


def _amp(psi: np.ndarray, idx) -> np.ndarray:
    """psi at 1-based indices, zero outside [1, N]."""
    idx = np.asarray(idx)
    n = psi.size
    ok = (idx >= 1) & (idx <= n)
    out = np.zeros(idx.shape, dtype=np.complex128)
    out[ok] = psi[idx[ok] - 1]
    return out


def _hop(model: LatticeModel, m, n) -> np.ndarray:
    """h_{m,n} at 1-based index arrays (|m-n| = 1 assumed), zero outside."""
    m = np.asarray(m)
    n = np.asarray(n)
    lo = np.minimum(m, n)
    ok = (lo >= 1) & (lo + 1 <= model.n_sites)
    out = np.zeros(m.shape, dtype=np.complex128)
    up = np.asarray(model.hop_up, dtype=np.complex128)
    down = np.asarray(model.hop_down, dtype=np.complex128)
    sel_up = ok & (m < n)
    sel_dn = ok & (m > n)
    out[sel_up] = up[lo[sel_up] - 1]
    out[sel_dn] = down[lo[sel_dn] - 1]
    return out


# -- current fields ---------------------------------------------------------

def local_current(model: LatticeModel, state: StateVector, n: int,
                  direction: int) -> complex:
    """j_n^+- = (1/i)(psi_n^* h_{n,n+-1} psi_{n+-1} - c.c.-like term);
    0 when the link leaves the array."""
    return complex(local_current_field(model, state)[0 if direction > 0 else 1][n - 1])


def local_current_field(model: LatticeModel, state: StateVector):
    """(j_plus, j_minus) arrays for all sites."""
    psi = state.amplitudes
    n = np.arange(1, model.n_sites + 1)
    out = []
    for s in (+1, -1):
        h = _hop(model, n, n + s)
        term = (np.conj(_amp(psi, n)) * h * _amp(psi, n + s)
                - np.conj(_amp(psi, n + s)) * np.conj(h) * _amp(psi, n))
        out.append(term / 1j)
    return out[0], out[1]


def nlc(model: LatticeModel, state: StateVector,
        transform: SymmetryTransform, n: int, direction: int) -> complex:
    """NLC q_n^+- for one site from the defining bilinear form."""
    return _single_current(model, state, state, transform, n, direction,
                           conj_first=True, conj_hop=True)


def dual_nlc(model: LatticeModel, state: StateVector,
             transform: SymmetryTransform, n: int, direction: int) -> complex:
    """Dual NLC q̊_n^+- (no complex conjugations)."""
    return _single_current(model, state, state, transform, n, direction,
                           conj_first=False, conj_hop=False)


def bitemporal_nlc(model: LatticeModel, state_plus: StateVector,
                   state_minus: StateVector, transform: SymmetryTransform,
                   n: int, direction: int) -> complex:
    """Bitemporal NLC q^T built from psi(-t) (first slots) and psi(t)."""
    if state_plus.n_sites != state_minus.n_sites:
        raise ValueError("state pair size mismatch")
    return _single_current(model, state_minus, state_plus, transform, n,
                           direction, conj_first=False, conj_hop=False)


def _single_current(model, first_state, second_state, transform, n,
                    direction, conj_first, conj_hop):
    if not 1 <= n <= model.n_sites:
        raise ValueError(f"site {n} outside [1, {model.n_sites}]")
    sbar, up, dn = _site_images(transform, model.n_sites)
    s = 1 if direction > 0 else -1
    img = up if s > 0 else dn
    phi = first_state.amplitudes  # conjugated slot (or psi(-t))
    psi = second_state.amplitudes
    a_n = _amp(phi, np.array([n]))[0]
    a_nb = _amp(phi, np.array([n + s]))[0]
    if conj_first:
        a_n = np.conj(a_n)
        a_nb = np.conj(a_nb)
    h_img = _hop(model, np.array([sbar[n]]), np.array([img[n]]))[0]
    h_loc = _hop(model, np.array([n]), np.array([n + s]))[0]
    if conj_hop:
        h_loc = np.conj(h_loc)
    iq = (a_n * h_img * _amp(psi, np.array([img[n]]))[0]
          - a_nb * h_loc * _amp(psi, np.array([sbar[n]]))[0])
    return complex(iq / 1j)


def nlc_field(model: LatticeModel, state: StateVector,
              transform: SymmetryTransform,
              state_minus: StateVector | None = None) -> LinkCurrentField:
    """All six per-site current fields, computed in vectorized (gather)
    form; entrywise identical to the per-link definitions."""
    psi = state.amplitudes
    if psi.size != model.n_sites:
        raise ValueError("state length does not match model")
    sbar, up, dn = _site_images(transform, model.n_sites)
    n = np.arange(1, model.n_sites + 1)
    fields = {}
    for name, s, img in (("plus", +1, up), ("minus", -1, dn)):
        h_img = _hop(model, sbar[n], img[n])
        h_loc = _hop(model, n, n + s)
        psi_img = _amp(psi, img[n])
        psi_bar = _amp(psi, sbar[n])
        a_n = _amp(psi, n)
        a_nb = _amp(psi, n + s)
        fields["q_" + name] = (np.conj(a_n) * h_img * psi_img
                               - np.conj(a_nb) * np.conj(h_loc) * psi_bar) / 1j
        fields["dual_" + name] = (a_n * h_img * psi_img
                                  - a_nb * h_loc * psi_bar) / 1j
        fields["j_" + name] = (np.conj(a_n) * h_loc * a_nb
                               - np.conj(a_nb) * np.conj(h_loc) * a_n) / 1j
    return LinkCurrentField(transform=transform,
                            q_plus=fields["q_plus"], q_minus=fields["q_minus"],
                            dual_plus=fields["dual_plus"],
                            dual_minus=fields["dual_minus"],
                            j_plus=fields["j_plus"], j_minus=fields["j_minus"])


def nlc_operator(model: LatticeModel, transform: SymmetryTransform, n: int,
                 direction: int) -> np.ndarray:
    """Matrix of the NLC operator q̂_n^+-, so that q_n^+- = <psi| q̂ |psi>.

    Generalized commutator form q̂ = (sigma_n A - B^dagger sigma_n)/i where
    sigma_n = |n><S(n)|, A is the hopping block pointing from S(n) towards
    S(n+-1) (so a translation keeps the link direction while an inversion
    reverses it on its domain) and B is the hopping block of the local link
    (n, n+-1).  For Hermitian hoppings B^dagger equals the opposite block
    and the form reduces to the plain commutator with sigma_n."""
    N = model.n_sites
    if not 1 <= n <= N:
        raise ValueError(f"site {n} outside [1, {N}]")
    idx = np.arange(N - 1)
    Hup = np.zeros((N, N), dtype=np.complex128)
    Hdn = np.zeros((N, N), dtype=np.complex128)
    Hup[idx, idx + 1] = model.hop_up
    Hdn[idx + 1, idx] = model.hop_down
    sbar, up, dn = _site_images(transform, N)
    s = 1 if direction > 0 else -1
    img = (up if s > 0 else dn)[n]
    sig = np.zeros((N, N), dtype=np.complex128)
    if 1 <= sbar[n] <= N:
        sig[n - 1, sbar[n] - 1] = 1.0
    A = Hup if img - sbar[n] == 1 else Hdn
    B = Hup if s > 0 else Hdn
    return (sig @ A - B.conj().T @ sig) / 1j


# -- charges, sums, continuity ---------------------------------------------

def nonlocal_density(state: StateVector, transform: SymmetryTransform
                     ) -> np.ndarray:
    """sigma_n = psi_n^* psi_{n̄} per site (identity map outside D)."""
    psi = state.amplitudes
    sbar, _, _ = _site_images(transform, psi.size)
    n = np.arange(1, psi.size + 1)
    return np.conj(_amp(psi, n)) * _amp(psi, sbar[n])


def nonlocal_charge(state: StateVector, transform: SymmetryTransform,
                    domain: tuple[int, int] | None = None) -> complex:
    """Sum of psi_n^* psi_{n̄} over the domain (default the whole array)."""
    sigma = nonlocal_density(state, transform)
    if domain is None:
        return complex(sigma.sum())
    lo, hi = domain
    return complex(sigma[lo - 1:hi].sum())


def net_nlc_domain(field: LinkCurrentField,
                   domain: tuple[int, int] | None = None) -> complex:
    """Q_D = sum over the domain of (q_n^+ + q_n^-)."""
    q = field.q_plus + field.q_minus
    if domain is None:
        return complex(q.sum())
    lo, hi = domain
    return complex(q[lo - 1:hi].sum())


def boundary_nlc_sum(field: LinkCurrentField, domain: tuple[int, int]
                     ) -> complex:
    """Boundary reduction of Q_D for equidirectional ST-symmetric hoppings:
    q_hi^+ + q_lo^-."""
    lo, hi = domain
    return complex(field.q_plus[hi - 1] + field.q_minus[lo - 1])


def onsite_asymmetry(model: LatticeModel, transform: SymmetryTransform
                     ) -> np.ndarray:
    """beta_n = (v_{n̄} - v_n^*)/i per site."""
    sbar, _, _ = _site_images(transform, model.n_sites)
    n = np.arange(1, model.n_sites + 1)
    v = np.asarray(model.onsite, dtype=np.complex128)
    v_bar = np.array([model.v(int(m)) if 1 <= m <= model.n_sites else 0.0
                      for m in sbar[n]])
    return (v_bar - np.conj(v)) / 1j


def continuity_residual(model: LatticeModel, trajectory,
                        transform: SymmetryTransform) -> np.ndarray:
    """Per-site max residual of the nonlocal continuity law along a
    uniformly sampled trajectory, using central differences:

        r_n(t) = d(sigma_n)/dt - q_n - beta_n sigma_n.
    """
    states = list(trajectory.states) if hasattr(trajectory, "states") \
        else list(trajectory)
    if len(states) < 3:
        raise ValueError("need at least three samples for central differences")
    times = np.array([s.time for s in states])
    dts = np.diff(times)
    if not np.allclose(dts, dts[0], rtol=1e-9, atol=1e-12):
        raise ValueError("trajectory grid is not uniform")
    dt = dts[0]
    beta = onsite_asymmetry(model, transform)
    sigma = np.array([nonlocal_density(s, transform) for s in states])
    worst = np.zeros(model.n_sites)
    for i in range(1, len(states) - 1):
        field = nlc_field(model, states[i], transform)
        q = field.q_plus + field.q_minus
        r = (sigma[i + 1] - sigma[i - 1]) / (2 * dt) - q - beta * sigma[i]
        worst = np.maximum(worst, np.abs(r))
    return worst


# -- mapping relations ------------------------------------------------------

def singular_current_threshold(model: LatticeModel,
                               state: StateVector) -> float:
    hops = [abs(h) for h in model.hop_up] + [abs(h) for h in model.hop_down]
    amax = float(np.max(np.abs(state.amplitudes))) if state.n_sites else 0.0
    return 1e-10 * max(hops, default=0.0) * amax * amax


def amplitude_map_current(j: complex, q: complex, q_dual: complex,
                          psi_n: complex,
                          threshold: float = 0.0) -> complex:
    """Predicted image amplitude psi_{S(n)} = (q psi_n - q̊ psi_n^*)/j."""
    if abs(j) <= threshold or j == 0:
        raise SingularCurrentError(
            "local current below threshold; use the summation mapping")
    return (q * psi_n - q_dual * np.conj(psi_n)) / j


def amplitude_map_summation(model: LatticeModel, state: StateVector,
                            transform: SymmetryTransform, n: int,
                            anchor: int, anchor_ratio: complex) -> complex:
    """Summation mapping: image amplitude from a path of NLCs,

        psi_{n̄} = psi_n^* (ratio - i sum_m q_m^+- / (psi_m^* h_{m,m+-1}^*
                                                     psi_{m+-1}^*)),

    summed from n towards the anchor n0 (ratio = psi_{n̄0}/psi_{n0}^*)."""
    psi = state.amplitudes
    s = +1 if n <= anchor else -1
    total = 0.0 + 0.0j
    for m in range(n, anchor, s):
        a_m = psi[m - 1]
        a_mb = psi[m + s - 1]
        if a_m == 0 or a_mb == 0:
            raise ZeroAmplitudeOnPathError(f"zero amplitude at site {m}")
        q_m = nlc(model, state, transform, m, s)
        h = model.h(m, m + s)
        total += q_m / (np.conj(a_m) * np.conj(h) * np.conj(a_mb))
    if psi[anchor - 1] == 0:
        raise ZeroAmplitudeOnPathError("zero amplitude at the anchor")
    return np.conj(psi[n - 1]) * (anchor_ratio - 1j * total)


def current_connection_residual(field: LinkCurrentField, n: int,
                                direction: int) -> float:
    """| |q|^2 - |q̊|^2 - j_n^+- j_{S(n)}^{+-s} | with s = -,+ for
    inversion, translation."""
    transform = field.transform
    sbar, _, _ = _site_images(transform, field.n_sites)
    s = 1 if direction > 0 else -1
    q = field.q_plus if s > 0 else field.q_minus
    qd = field.dual_plus if s > 0 else field.dual_minus
    j = field.j_plus if s > 0 else field.j_minus
    flip = transform.kind == INVERSION
    img_dir = -s if flip else s
    nbar = int(sbar[n])
    if 1 <= nbar <= field.n_sites:
        j_img = field.j_plus[nbar - 1] if img_dir > 0 \
            else field.j_minus[nbar - 1]
    else:
        j_img = 0.0
    lhs = abs(q[n - 1]) ** 2 - abs(qd[n - 1]) ** 2
    return float(abs(lhs - j[n - 1] * j_img))


def backward_assignment(model: LatticeModel, state: StateVector,
                        transform: SymmetryTransform) -> np.ndarray:
    """Extend the forward-translation NLC invariants past the domain D:
    sites n > d_hi receive -conj(q_{n,K^-}^{-+}) of the backward shift
    n -> n - L, producing a field defined on all of [d_lo, N].

    Returns an (N,)-array of the extended upper NLC (NaN below d_lo)."""
    if transform.kind != TRANSLATION:
        raise TransformError("backward assignment needs a translation")
    L = transform.shift
    N = model.n_sites
    field = nlc_field(model, state, transform)
    out = np.full(N, np.nan, dtype=np.complex128)
    for n in transform.domain:
        out[n - 1] = field.q_plus[n - 1]
    back_lo = transform.d_hi + 1
    if back_lo + L - 1 <= N + L - 1 and back_lo <= N:
        backward = _BackwardShift(back_lo, N, L)
        bfield = nlc_field(model, state, backward)
        for n in range(back_lo, N + 1):
            out[n - 1] = -np.conj(bfield.q_minus[n - 1])
    return out


class _BackwardShift(SymmetryTransform):
    """Translation by -L on [d_lo, d_hi]; only used to evaluate backward
    NLCs, never exposed for domain detection."""

    def __init__(self, d_lo: int, d_hi: int, L: int):
        object.__setattr__(self, "kind", TRANSLATION)
        object.__setattr__(self, "d_lo", d_lo)
        object.__setattr__(self, "d_hi", d_hi)
        object.__setattr__(self, "center2", None)
        object.__setattr__(self, "shift", -L)
        object.__setattr__(self, "with_time_reversal", False)

    @property
    def union(self):
        return range(self.d_lo - abs(self.shift), self.d_hi + 1)

    def validate_for(self, n_sites: int) -> None:
        if self.d_lo - abs(self.shift) < 1 or self.d_hi > n_sites:
            raise TransformError("backward shift leaves the array")


# -- constancy metric -------------------------------------------------------

def constancy_deviation(values: np.ndarray, eps_abs: float = 1e-14) -> float:
    """max_n |v_n - median(v)| / max(|median(v)|, eps_abs); medians of real
    and imaginary parts are taken separately."""
    v = np.asarray(values, dtype=np.complex128)
    if v.size == 0:
        return 0.0
    med = complex(np.median(v.real), np.median(v.imag))
    return float(np.max(np.abs(v - med)) / max(abs(med), eps_abs))


def field_to_rows(field: LinkCurrentField) -> list[dict]:
    """Rows for CSV export: site plus re/im of all six fields."""
    rows = []
    for i in range(field.n_sites):
        rows.append({
            "site": i + 1,
            "re_q_plus": field.q_plus[i].real, "im_q_plus": field.q_plus[i].imag,
            "re_q_minus": field.q_minus[i].real, "im_q_minus": field.q_minus[i].imag,
            "re_dual_plus": field.dual_plus[i].real, "im_dual_plus": field.dual_plus[i].imag,
            "re_dual_minus": field.dual_minus[i].real, "im_dual_minus": field.dual_minus[i].imag,
            "re_j_plus": field.j_plus[i].real, "im_j_plus": field.j_plus[i].imag,
            "re_j_minus": field.j_minus[i].real, "im_j_minus": field.j_minus[i].imag,
        })
    return rows
