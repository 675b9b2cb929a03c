"""Symmetry-adapted nonlocal currents in 1D tight-binding arrays.

Submodules: lattice (models), symmetry (transforms and domain detection),
currents (local/nonlocal current fields), eig (in-house eigensolver),
spectral (bound states and time evolution), scattering (lead-coupled
plane-wave problems), floquet (harmonically driven arrays), presets
(example model families) and cli (batch experiment runner).
"""

from __future__ import annotations

__version__ = "0.1.0"

from .currents import (LinkCurrentField, StateVector, bitemporal_nlc,
                       constancy_deviation, dual_nlc, local_current,
                       net_nlc_domain, nlc, nlc_field, nonlocal_charge)
from .lattice import (DrivenModel, LatticeModel, LeadSpec, build_model,
                      hamiltonian_matrix, hopping_ratio, model_at_time)
from .spectral import Trajectory, eigenmodes, time_evolve
from .symmetry import (SymmetryTransform, decompose_cls,
                       detect_maximal_domains, sigma_matrix,
                       symmetry_residual)

__all__ = [
    "__version__",
    "LatticeModel", "LeadSpec", "DrivenModel", "build_model",
    "hamiltonian_matrix", "hopping_ratio", "model_at_time",
    "SymmetryTransform", "sigma_matrix", "symmetry_residual",
    "detect_maximal_domains", "decompose_cls",
    "StateVector", "LinkCurrentField", "nlc", "dual_nlc", "bitemporal_nlc",
    "nlc_field", "local_current", "nonlocal_charge", "net_nlc_domain",
    "constancy_deviation",
    "eigenmodes", "time_evolve", "Trajectory",
]
