"""Regime approximations for the kernel with series exponent ``k``.

Every function here approximates ``oracle.rho_shifted(k, t)``, i.e. the
kernel for bundle power ``k + 1``.
"""

from .common import LATTICE_TOL, ApproxResult, Regime, lattice_index
from .dispatch import candidates, evaluate, rho_eval, select_regime
from .inside import (
    InteriorMinimum,
    f_b,
    locate_interior_minimum,
    rho_inside_two_term,
    rho_lattice,
    rho_lattice_b1,
    rho_lattice_stirling,
)
from .neck import NeckBounds, gamma_b, reference_profile, rho_neck, rho_neck_bounds
from .outside import log_outside_envelope, poisson_correction, rho_outside

__all__ = [
    "LATTICE_TOL",
    "ApproxResult",
    "InteriorMinimum",
    "NeckBounds",
    "Regime",
    "candidates",
    "evaluate",
    "f_b",
    "gamma_b",
    "lattice_index",
    "locate_interior_minimum",
    "log_outside_envelope",
    "poisson_correction",
    "reference_profile",
    "rho_eval",
    "rho_inside_two_term",
    "rho_lattice",
    "rho_lattice_b1",
    "rho_lattice_stirling",
    "rho_neck",
    "rho_neck_bounds",
    "rho_outside",
    "select_regime",
]
