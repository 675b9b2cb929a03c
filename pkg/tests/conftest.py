"""Shared builders for randomized models, states and transforms."""

from __future__ import annotations

import numpy as np

from nlcurrents.lattice import LatticeModel
from nlcurrents.symmetry import SymmetryTransform


def complex_array(rng, n, scale=1.0):
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def random_model(rng, n, hermitian=False, equidirectional=False, scale=0.5):
    """Random N-site chain; by default non-Hermitian and
    non-equidirectional."""
    v = complex_array(rng, n, scale)
    hu = complex_array(rng, n - 1, scale)
    if hermitian:
        v = v.real.astype(complex)
        hd = np.conj(hu)
    elif equidirectional:
        hd = hu.copy()
    else:
        hd = complex_array(rng, n - 1, scale)
    return LatticeModel(n, tuple(v), tuple(hu), tuple(hd))


def random_state(rng, n, scale=1.0):
    return complex_array(rng, n, scale)


def random_transform(rng, n):
    """Random valid inversion or translation acting inside [1, n]."""
    if n >= 3 and rng.random() < 0.5:
        L = int(rng.integers(1, max(2, n // 2)))
        if n - 2 * L + 1 >= 1:
            d_lo = int(rng.integers(1, n - 2 * L + 2))
            d_hi = int(rng.integers(d_lo + L - 1, n - L + 1))
            return SymmetryTransform("translation", d_lo, d_hi, shift=L)
    d_lo = int(rng.integers(1, n))
    d_hi = int(rng.integers(d_lo, n + 1))
    return SymmetryTransform("inversion", d_lo, d_hi, center2=d_lo + d_hi)


def st_inversion_model(rng, n, scale=0.5):
    """Random chain whose hoppings are exactly symmetric (with complex
    conjugation) under the full-array inversion n -> n+1-bar; the onsite
    elements are arbitrary complex.  Returns (model, transform)."""
    hu = complex_array(rng, n - 1, scale)
    hd = np.conj(hu[::-1])
    v = complex_array(rng, n, scale)
    model = LatticeModel(n, tuple(v), tuple(hu), tuple(hd))
    t = SymmetryTransform("inversion", 1, n, center2=n + 1)
    return model, t


def st_translation_model(rng, n, shift, scale=0.5):
    """Random chain whose hoppings repeat (conjugated) under n -> n+shift
    on the full admissible domain; onsite arbitrary.  Returns
    (model, transform)."""
    hu = np.zeros(n - 1, dtype=np.complex128)
    hd = np.zeros(n - 1, dtype=np.complex128)
    hu[:shift] = complex_array(rng, shift, scale)
    hd[:shift] = complex_array(rng, shift, scale)
    for i in range(shift, n - 1):
        hu[i] = np.conj(hu[i - shift])
        hd[i] = np.conj(hd[i - shift])
    v = complex_array(rng, n, scale)
    model = LatticeModel(n, tuple(v), tuple(hu), tuple(hd))
    t = SymmetryTransform("translation", 1, n - shift, shift=shift)
    return model, t
