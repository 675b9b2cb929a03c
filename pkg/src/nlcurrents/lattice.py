"""1D tight-binding models with complex onsite energies and directed hoppings.

Sites are labeled 1..N throughout the public API.  A model stores the onsite
elements v_n = u_n + i*gamma_n/2, the upper hoppings h_{n,n+1} and the lower
hoppings h_{n+1,n}; the boundary is either closed (isolated array) or a pair
of identical semi-infinite uniform leads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json
import math

import numpy as np


class ModelError(ValueError):
    """Invalid model description (length mismatch, non-finite entries, ...)."""


class SingularRatioError(ZeroDivisionError):
    """Hopping ratio requested on a link with vanishing denominator hopping."""


@dataclass(frozen=True)
class LeadSpec:
    """Uniform semi-infinite leads: real onsite v and real hopping h != 0,
    equal on both sides (unbiased setup)."""

    v: float
    h: float

    def __post_init__(self):
        if self.h == 0.0:
            raise ModelError("lead hopping must be nonzero")
        if not (math.isfinite(self.v) and math.isfinite(self.h)):
            raise ModelError("lead parameters must be finite")


@dataclass(frozen=True)
class LatticeModel:
    """An N-site chain with nearest-neighbor couplings.

    onsite[n-1] is v_n; hop_up[n-1] is h_{n,n+1}; hop_down[n-1] is h_{n+1,n}.
    Immutable after construction; arrays are stored as tuples of complex.
    """

    n_sites: int
    onsite: tuple[complex, ...]
    hop_up: tuple[complex, ...]
    hop_down: tuple[complex, ...]
    boundary: LeadSpec | None = None  # None means closed

    def __post_init__(self):
        n = self.n_sites
        if n < 1:
            raise ModelError("model needs at least one site")
        if len(self.onsite) != n:
            raise ModelError(f"onsite has length {len(self.onsite)}, expected {n}")
        if len(self.hop_up) != n - 1 or len(self.hop_down) != n - 1:
            raise ModelError("hop lists must have length N-1")
        for seq in (self.onsite, self.hop_up, self.hop_down):
            for z in seq:
                if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                    raise ModelError("model entries must be finite")

    # -- predicates ---------------------------------------------------------

    @property
    def is_hermitian(self) -> bool:
        return all(v.imag == 0.0 for v in self.onsite) and all(
            d == u.conjugate() for u, d in zip(self.hop_up, self.hop_down)
        )

    @property
    def is_equidirectional(self) -> bool:
        return all(d == u for u, d in zip(self.hop_up, self.hop_down))

    @property
    def has_leads(self) -> bool:
        return self.boundary is not None

    # -- element access (1-based, out-of-range reads give 0) ----------------

    def v(self, n: int) -> complex:
        """Onsite element v_n."""
        return complex(self.onsite[n - 1])

    def h(self, m: int, n: int) -> complex:
        """Hopping element h_{m,n} = H[m][n]; 0 for nonexistent links."""
        if abs(m - n) != 1:
            raise ModelError(f"({m},{n}) is not a nearest-neighbor link")
        lo = min(m, n)
        if not (1 <= lo and lo + 1 <= self.n_sites):
            return 0.0 + 0.0j
        if m < n:
            return complex(self.hop_up[lo - 1])
        return complex(self.hop_down[lo - 1])

    def element(self, m: int, n: int) -> complex:
        """Hamiltonian element H_{mn}; 0 outside the tridiagonal band or the
        array."""
        if m == n:
            if 1 <= n <= self.n_sites:
                return self.v(n)
            return 0.0 + 0.0j
        if abs(m - n) == 1:
            return self.h(m, n)
        return 0.0 + 0.0j


def build_model(config: dict | str) -> LatticeModel:
    """Build and validate a LatticeModel from a JSON-compatible description.

    Keys: n_sites, onsite, hop_up, hop_down (optional, defaults to the
    conjugate of hop_up), boundary {"type": "closed"|"leads", "v", "h"}.
    Complex numbers are given as [re, im] pairs (bare reals accepted).
    """
    if isinstance(config, str):
        config = json.loads(config)
    try:
        n = int(config["n_sites"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError("config must declare integer n_sites") from exc
    onsite = tuple(_as_complex(z) for z in config.get("onsite", [0.0] * n))
    hop_up = tuple(_as_complex(z) for z in config["hop_up"])
    if "hop_down" in config and config["hop_down"] is not None:
        hop_down = tuple(_as_complex(z) for z in config["hop_down"])
    else:
        hop_down = tuple(z.conjugate() for z in hop_up)
    boundary = None
    spec = config.get("boundary")
    if spec is not None and spec.get("type", "closed") != "closed":
        if spec["type"] != "leads":
            raise ModelError(f"unknown boundary type {spec['type']!r}")
        boundary = LeadSpec(v=float(spec["v"]), h=float(spec["h"]))
    return LatticeModel(n_sites=n, onsite=onsite, hop_up=hop_up,
                        hop_down=hop_down, boundary=boundary)


def _as_complex(z) -> complex:
    if isinstance(z, (list, tuple)):
        if len(z) != 2:
            raise ModelError(f"complex entries are [re, im] pairs, got {z!r}")
        return complex(float(z[0]), float(z[1]))
    if isinstance(z, complex):
        return z
    return complex(float(z), 0.0)


def hamiltonian_matrix(model: LatticeModel) -> np.ndarray:
    """Dense N x N complex matrix of the model (tridiagonal)."""
    n = model.n_sites
    H = np.zeros((n, n), dtype=np.complex128)
    H[np.arange(n), np.arange(n)] = model.onsite
    if n > 1:
        idx = np.arange(n - 1)
        H[idx, idx + 1] = model.hop_up
        H[idx + 1, idx] = model.hop_down
    return H


def hopping_ratio(model: LatticeModel, frm: int, to: int) -> complex:
    """Ratio eta = h_{to,frm} / h_{frm,to} of opposite-direction hoppings on
    the link between adjacent sites `frm` and `to`."""
    if abs(frm - to) != 1:
        raise ModelError("hopping ratio requires adjacent sites")
    denom = model.h(frm, to)
    if denom == 0:
        raise SingularRatioError(f"h_({frm},{to}) vanishes")
    return model.h(to, frm) / denom


@dataclass(frozen=True)
class DrivenModel:
    """Harmonic in-phase modulation of selected elements of a base model:
    masked elements are scaled by (1 + f*sin(omega*t))."""

    base: LatticeModel
    target: str  # "hoppings" | "onsite"
    relative_amplitude: float
    frequency: float
    per_element_mask: tuple[bool, ...] = field(default=None)

    def __post_init__(self):
        if self.target not in ("hoppings", "onsite"):
            raise ModelError(f"unknown drive target {self.target!r}")
        if not 0.0 <= self.relative_amplitude < 1.0:
            raise ModelError("relative amplitude must lie in [0, 1)")
        if self.frequency <= 0.0:
            raise ModelError("drive frequency must be positive")
        n_elem = (self.base.n_sites - 1 if self.target == "hoppings"
                  else self.base.n_sites)
        mask = self.per_element_mask
        if mask is None:
            mask = (True,) * n_elem
        else:
            mask = tuple(bool(b) for b in mask)
            if len(mask) != n_elem:
                raise ModelError("drive mask length mismatch")
        object.__setattr__(self, "per_element_mask", mask)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.frequency


def model_at_time(driven: DrivenModel, t: float) -> LatticeModel:
    """Instantaneous LatticeModel of a driven model at time t."""
    scale = 1.0 + driven.relative_amplitude * math.sin(driven.frequency * t)
    base = driven.base
    mask = driven.per_element_mask
    if driven.target == "hoppings":
        hop_up = tuple(h * scale if m else h
                       for h, m in zip(base.hop_up, mask))
        hop_down = tuple(h * scale if m else h
                         for h, m in zip(base.hop_down, mask))
        return LatticeModel(base.n_sites, base.onsite, hop_up, hop_down,
                            base.boundary)
    onsite = tuple(v * scale if m else v for v, m in zip(base.onsite, mask))
    return LatticeModel(base.n_sites, onsite, base.hop_up, base.hop_down,
                        base.boundary)


def drive_fourier_block(driven: DrivenModel) -> np.ndarray:
    """Matrix H1 of the modulation so that H(t) = H0 + H1*sin(omega*t)."""
    base = driven.base
    n = base.n_sites
    H1 = np.zeros((n, n), dtype=np.complex128)
    f = driven.relative_amplitude
    mask = driven.per_element_mask
    if driven.target == "hoppings":
        for i in range(n - 1):
            if mask[i]:
                H1[i, i + 1] = f * base.hop_up[i]
                H1[i + 1, i] = f * base.hop_down[i]
    else:
        for i in range(n):
            if mask[i]:
                H1[i, i] = f * base.onsite[i]
    return H1
