"""Local inversion/translation transforms, permutation matrices, symmetry
residuals and detection of maximal symmetry domains.

Inversion centers are stored doubled (center2 = 2*alpha) so half-integer
centers stay exact: the site map is n -> center2 - n.  A translation maps
n -> n + shift on its domain D; the permutation matrix additionally wraps the
last `shift` sites of U = D + image back to the front (cyclic shift on U).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeModel

INVERSION = "inversion"
TRANSLATION = "translation"


class TransformError(ValueError):
    """Transform inconsistent with the lattice it is applied to."""


@dataclass(frozen=True)
class SymmetryTransform:
    kind: str
    d_lo: int
    d_hi: int
    center2: int | None = None  # inversion only, 2*alpha
    shift: int | None = None    # translation only, L > 0
    with_time_reversal: bool = False

    def __post_init__(self):
        if self.kind not in (INVERSION, TRANSLATION):
            raise TransformError(f"unknown transform kind {self.kind!r}")
        if self.d_lo > self.d_hi + 1:
            raise TransformError("empty domain must have d_hi = d_lo - 1")
        if self.kind == INVERSION:
            if self.center2 is None:
                raise TransformError("inversion needs center2")
            if not self.is_empty and self.d_lo + self.d_hi != self.center2:
                raise TransformError("inversion domain must be symmetric "
                                     "about its center")
        else:
            if self.shift is None or self.shift < 1:
                raise TransformError("translation needs positive shift")
            if not self.is_empty and self.size < self.shift:
                raise TransformError(
                    "translation with shift larger than the domain is not "
                    "defined; enlarge the domain")

    @property
    def is_empty(self) -> bool:
        return self.d_hi < self.d_lo

    @property
    def size(self) -> int:
        return max(0, self.d_hi - self.d_lo + 1)

    @property
    def domain(self) -> range:
        """Sites of D (1-based, inclusive)."""
        return range(self.d_lo, self.d_hi + 1)

    @property
    def union(self) -> range:
        """Sites of U = D united with its image (inversion: U = D)."""
        if self.is_empty:
            return range(self.d_lo, self.d_lo)
        if self.kind == INVERSION:
            return self.domain
        return range(self.d_lo, self.d_hi + self.shift + 1)

    def validate_for(self, n_sites: int) -> None:
        u = self.union
        if not self.is_empty and (u.start < 1 or u[-1] > n_sites):
            raise TransformError(
                f"transform domain {u.start}..{u[-1]} exceeds [1, {n_sites}]")

    def as_dict(self) -> dict:
        d = {"kind": self.kind, "d_lo": self.d_lo, "d_hi": self.d_hi,
             "with_T": self.with_time_reversal}
        if self.kind == INVERSION:
            d["center2"] = self.center2
        else:
            d["shift"] = self.shift
        return d


def map_site(transform: SymmetryTransform, n: int) -> int:
    """Image of site n under the transform's analytic site map (domain D
    only; the permutation-matrix wrap is applied in sigma_matrix)."""
    if n not in transform.domain:
        raise TransformError(f"site {n} outside domain "
                             f"[{transform.d_lo}, {transform.d_hi}]")
    if transform.kind == INVERSION:
        return transform.center2 - n
    return n + transform.shift


def extended_map(transform: SymmetryTransform, n_sites: int) -> np.ndarray:
    """Site map extended to the whole array: transform on D, identity
    elsewhere.  Returns a 1-based int array of length n_sites + 1 (entry 0
    unused)."""
    transform.validate_for(n_sites)
    img = np.arange(n_sites + 1)
    for n in transform.domain:
        img[n] = map_site(transform, n)
    return img


def sigma_matrix(transform: SymmetryTransform, n_sites: int) -> np.ndarray:
    """Permutation matrix with [S]_{mn} = delta_{m̄,n}: (S psi)_m = psi_{m̄}.

    Identity outside U; mirror permutation of U for an inversion; cyclic
    shift by L on U for a translation (the last L sites of U map to the
    first L)."""
    transform.validate_for(n_sites)
    image = np.arange(1, n_sites + 1)
    u = transform.union
    if not transform.is_empty:
        if transform.kind == INVERSION:
            for m in u:
                image[m - 1] = transform.center2 - m
        else:
            L = transform.shift
            span = len(u)
            for m in u:
                mbar = m + L
                if mbar > u[-1]:
                    mbar -= span
                image[m - 1] = mbar
    mat = np.zeros((n_sites, n_sites), dtype=np.complex128)
    mat[np.arange(n_sites), image - 1] = 1.0
    return mat


def permutation_image(transform: SymmetryTransform, n_sites: int) -> np.ndarray:
    """1-based image list of the permutation in sigma_matrix (image[m-1] is
    the column carrying the 1 in row m)."""
    mat = sigma_matrix(transform, n_sites)
    return np.argmax(mat.real, axis=1) + 1


def symmetry_residual(model: LatticeModel,
                      transform: SymmetryTransform) -> float:
    """max over m, n in D of |H_{m̄n̄} - H_{mn}| (with time reversal:
    |H_{m̄n̄} - H*_{mn}|).  0 means exact symmetry."""
    transform.validate_for(model.n_sites)
    if transform.is_empty:
        return 0.0
    conj = transform.with_time_reversal
    worst = 0.0
    for m in transform.domain:
        mbar = map_site(transform, m)
        for n in (m - 1, m, m + 1):
            if n not in transform.domain:
                continue
            nbar = map_site(transform, n)
            ref = model.element(m, n)
            if conj:
                ref = ref.conjugate()
            worst = max(worst, abs(model.element(mbar, nbar) - ref))
    return worst


def default_tolerance(model: LatticeModel) -> float:
    scale = max([abs(v) for v in model.onsite]
                + [abs(h) for h in model.hop_up]
                + [abs(h) for h in model.hop_down] + [1.0])
    return 1e-12 * scale


def detect_maximal_domains(model: LatticeModel, kind: str,
                           with_time_reversal: bool = False,
                           tol: float | None = None
                           ) -> list[SymmetryTransform]:
    """All maximal symmetry domains of the model for the given transform
    kind: per center (inversion) or shift (translation), the largest
    contiguous domains with symmetry residual <= tol.  Trivial domains
    (|U| <= 1 for inversion, |D| < L for translation) are dropped."""
    if tol is None:
        tol = default_tolerance(model)
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    if kind == INVERSION:
        return _maximal_inversions(model, with_time_reversal, tol)
    if kind == TRANSLATION:
        return _maximal_translations(model, with_time_reversal, tol)
    raise TransformError(f"unknown transform kind {kind!r}")


def _maximal_inversions(model, with_t, tol):
    N = model.n_sites
    found = []
    for center2 in range(3, 2 * N):
        lo_min = max(1, center2 - N)
        hi_max = center2 - lo_min
        # innermost admissible domain for this center
        if center2 % 2 == 0:
            lo, hi = center2 // 2, center2 // 2
        else:
            lo, hi = (center2 - 1) // 2, (center2 + 1) // 2
        best = None
        while lo >= lo_min and hi <= hi_max:
            t = SymmetryTransform(INVERSION, lo, hi, center2=center2,
                                  with_time_reversal=with_t)
            if symmetry_residual(model, t) <= tol:
                best = t
                lo -= 1
                hi += 1
            else:
                break
        if best is not None and best.size > 1:
            found.append(best)
    return found


def _maximal_translations(model, with_t, tol):
    N = model.n_sites
    found = []
    for L in range(1, N):
        # per-site / per-link comparison flags under n -> n+L
        site_ok = []
        for n in range(1, N - L + 1):
            ref = model.v(n).conjugate() if with_t else model.v(n)
            site_ok.append(abs(model.v(n + L) - ref) <= tol)
        link_ok = []
        for n in range(1, N - L):
            up = model.h(n, n + 1)
            dn = model.h(n + 1, n)
            if with_t:
                up, dn = up.conjugate(), dn.conjugate()
            link_ok.append(abs(model.h(n + L, n + L + 1) - up) <= tol
                           and abs(model.h(n + L + 1, n + L) - dn) <= tol)
        # maximal runs of consecutive sites passing all checks
        n = 1
        while n <= N - L:
            if not site_ok[n - 1]:
                n += 1
                continue
            m = n
            while (m < N - L and link_ok[m - 1] and site_ok[m]):
                m += 1
            if m - n + 1 >= L:
                found.append(SymmetryTransform(
                    TRANSLATION, n, m, shift=L, with_time_reversal=with_t))
            n = m + 1
    return found


class NoDecomposition:
    """Returned when no cover of [1, N] by maximal domains exists."""

    def __repr__(self):
        return "NoDecomposition"

    def __eq__(self, other):
        return isinstance(other, NoDecomposition)

    def __bool__(self):
        return False


def decompose_cls(model: LatticeModel, kind: str,
                  with_time_reversal: bool = False,
                  tol: float | None = None):
    """Cover [1, N] by non-overlapping maximal symmetry domains (their U
    extents), greedily left-to-right preferring the longest domain and
    backtracking on failure; NoDecomposition if no cover exists."""
    domains = detect_maximal_domains(model, kind, with_time_reversal, tol)
    N = model.n_sites
    by_start: dict[int, list[SymmetryTransform]] = {}
    for t in domains:
        by_start.setdefault(t.union.start, []).append(t)
    for ts in by_start.values():
        ts.sort(key=lambda t: -len(t.union))

    def cover(pos: int):
        if pos > N:
            return []
        for t in by_start.get(pos, []):
            rest = cover(t.union[-1] + 1)
            if rest is not None:
                return [t] + rest
        return None

    result = cover(1)
    return result if result is not None else NoDecomposition()
