"""Closed-form dynamics of a dispersively coupled, damped, linearly amplified cavity field."""

from .blocks import (AtomFieldState, ModelParams, OverflowGuardError, evolve_state, solve_rho_ee,
                     solve_rho_eg, solve_rho_ge, solve_rho_gg, to_lab_frame)
from .drive import DriveSpec, eval_f, modulated_integral, prefactor_integral
from .fock import annihilation, coherent_state, displacement, fock_state

__all__ = [
    "AtomFieldState", "DriveSpec", "ModelParams", "OverflowGuardError", "annihilation",
    "coherent_state", "displacement", "eval_f", "evolve_state", "fock_state", "modulated_integral",
    "prefactor_integral", "solve_rho_ee", "solve_rho_eg", "solve_rho_ge", "solve_rho_gg",
    "to_lab_frame",
]
