"""Ready-made model families used by the bundled experiment configs.

All presets use a base hopping of 0.1 and are parameterized by the
gain/loss strength (or the symmetry-breaking scale) that the batch
experiments sweep.
"""

from __future__ import annotations

import math

import numpy as np

from .lattice import DrivenModel, LatticeModel, LeadSpec
from .symmetry import SymmetryTransform

BASE_HOP = 0.1


def pt_dimer_array(gamma: float, eta: float = 0.06,
                   u: float = 0.06) -> LatticeModel:
    """Closed 5-site chain with balanced gain/loss, globally
    inversion-plus-time-reversal symmetric about its middle site
    (center2 = 6): v = (i*eta, i*gamma, u, -i*gamma, -i*eta)."""
    h = BASE_HOP
    v = (1j * eta, 1j * gamma, complex(u), -1j * gamma, -1j * eta)
    hops = (h, 2 * h, 2 * h, h)
    hops = tuple(complex(x) for x in hops)
    return LatticeModel(5, v, hops, hops)


def pt_dimer_transform(with_time_reversal: bool = True) -> SymmetryTransform:
    return SymmetryTransform("inversion", 1, 5, center2=6,
                             with_time_reversal=with_time_reversal)


def kt_chain_array(gamma: float, u: float = 0.15) -> LatticeModel:
    """Closed 5-site chain with alternating hoppings (h, 2h, h, 2h) and
    v = (0, u+i*gamma, 0, u-i*gamma, 0): translation by 2 with time
    reversal holds on the domain [1, 2]."""
    h = BASE_HOP
    v = (0j, u + 1j * gamma, 0j, u - 1j * gamma, 0j)
    hops = tuple(complex(x) for x in (h, 2 * h, h, 2 * h))
    return LatticeModel(5, v, hops, hops)


def kt_chain_transform() -> SymmetryTransform:
    return SymmetryTransform("translation", 1, 2, shift=2,
                             with_time_reversal=True)


def driven_cls_array(s: float = 1.0, f: float = 0.5,
                     omega: float = math.pi / 8) -> DrivenModel:
    """12-site chain covered by two locally inversion-symmetric domains
    [1, 6] and [7, 12]; all hoppings are modulated harmonically.  The
    scale s multiplies the onsite energies of sites 4, 5, 6 and 10, so
    s = 1 keeps both local symmetries exact and s != 1 breaks them."""
    u = np.array([0.3, 0.1, 0.5, 0.5, 0.1, 0.3,
                  0.2, 0.4, 0.6, 0.6, 0.4, 0.2])
    for site in (4, 5, 6, 10):
        u[site - 1] *= s
    hops = np.array([0.5, 0.7, 0.9, 0.7, 0.5,
                     0.6,
                     0.8, 0.6, 0.4, 0.6, 0.8]) * BASE_HOP
    base = LatticeModel(12, tuple(complex(x) for x in u * BASE_HOP),
                        tuple(complex(x) for x in hops),
                        tuple(complex(x) for x in hops))
    return DrivenModel(base=base, target="hoppings", relative_amplitude=f,
                       frequency=omega)


def driven_cls_transforms() -> tuple[SymmetryTransform, SymmetryTransform]:
    d1 = SymmetryTransform("inversion", 1, 6, center2=7)
    d2 = SymmetryTransform("inversion", 7, 12, center2=19)
    return d1, d2


def local_pt_scatterer(gamma_a: float = 0.15,
                       gamma_b: float = 0.15) -> LatticeModel:
    """10-site scatterer built from two 5-site gain/loss domains, each
    locally inversion-plus-time-reversal symmetric about its own center
    (centers2 = 6 and 16); uniform leads with v = 0, h = 0.1.

    gamma_b = gamma_a makes the whole scatterer globally symmetric about
    center2 = 11; gamma_b = -gamma_a turns the global symmetry into plain
    inversion.  The inner/outer hopping ratio 0.5 places an exact
    generalized-unitarity contour at gamma_b = gamma_a / 3 for all k."""
    h = BASE_HOP
    v = (0j, -1j * gamma_a, 0j, 1j * gamma_a, 0j,
         0j, -1j * gamma_b, 0j, 1j * gamma_b, 0j)
    dom = [1.0, 0.5, 0.5, 1.0]
    hops = tuple(complex(h * x) for x in dom + [1.0] + dom)
    return LatticeModel(10, v, hops, hops, boundary=LeadSpec(v=0.0, h=h))


def local_pt_domains() -> tuple[SymmetryTransform, SymmetryTransform]:
    d1 = SymmetryTransform("inversion", 1, 5, center2=6,
                           with_time_reversal=True)
    d2 = SymmetryTransform("inversion", 6, 10, center2=16,
                           with_time_reversal=True)
    return d1, d2


def ptr_pair_scatterer(w: float = 0.05, gap: int = 3,
                       identical: bool = False) -> LatticeModel:
    """Two inversion-symmetric Hermitian scatterers in series, separated by
    `gap` free lead-like sites: A = w*(1, 2, 1) and B = w*(2, 1, 1, 2)
    (or a second copy of A when identical=True).  Identical scatterers
    guarantee symmetric perfect-transmission resonances."""
    h = BASE_HOP
    a = [w, 2 * w, w]
    b = list(a) if identical else [2 * w, w, w, 2 * w]
    v = tuple(complex(x) for x in a + [0.0] * gap + b)
    n = len(v)
    hops = (complex(h),) * (n - 1)
    return LatticeModel(n, v, hops, hops, boundary=LeadSpec(v=0.0, h=h))


def ptr_subunits(w: float = 0.05, gap: int = 3, identical: bool = False
                 ) -> tuple[LatticeModel, LatticeModel, int]:
    """The two scatterers of ptr_pair_scatterer as standalone lead-coupled
    models plus the offset (in sites) of the second one."""
    h = BASE_HOP
    lead = LeadSpec(v=0.0, h=h)
    a = [w, 2 * w, w]
    b = list(a) if identical else [2 * w, w, w, 2 * w]
    ma = LatticeModel(len(a), tuple(map(complex, a)),
                      (complex(h),) * (len(a) - 1),
                      (complex(h),) * (len(a) - 1), boundary=lead)
    mb = LatticeModel(len(b), tuple(map(complex, b)),
                      (complex(h),) * (len(b) - 1),
                      (complex(h),) * (len(b) - 1), boundary=lead)
    return ma, mb, len(a) + gap


_REGISTRY = {
    "pt_dimer_array": pt_dimer_array,
    "kt_chain_array": kt_chain_array,
    "driven_cls_array": driven_cls_array,
    "local_pt_scatterer": local_pt_scatterer,
    "ptr_pair_scatterer": ptr_pair_scatterer,
}


def preset(name: str, **kwargs):
    """Look up a preset family by name and build it with the given
    parameters."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: "
                       f"{sorted(_REGISTRY)}") from None
    return factory(**kwargs)
