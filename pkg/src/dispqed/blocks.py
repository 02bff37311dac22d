"""Closed-form propagation of the four atomic blocks of the density operator.

In the frame rotating with ``omega/2 sz + chi s_ee + nu n`` the master equation
splits into one equation per block ``rho_ab = <a| rho |b>``:

    ee:  R + S(f_nu) + D        gg: -R + S(f_nu) + D
    eg:  S(f_nu) + D - i chi L  ge:  S(f_nu) + D + i chi L

where ``f_nu(t) = f(t) exp(i nu t)`` and ``D = gamma (J - L)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import drive as drv
from .fock import (TruncationWarning, displacement, hermiticity_residual, nilpotent_exp_lower,
                   nilpotent_exp_raise)
from .superops import SuperopParams, decay_propagator, exp_J

# gamma * t * n_max beyond which the coherence solver refuses
OVERFLOW_GUARD = 60.0

# diagonal of s_ee = (1 - sz)/2 with sz|e> = +|e>: it projects onto |g>
SIGMA_EE_DIAG = {"e": 0.0, "g": 1.0}

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
PSD_TOL = 1e-8


class OverflowGuardError(RuntimeError):
    """The coherence-block closed form would leave double-precision range."""


class InvariantWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ModelParams:
    nu: float = 0.0
    omega: float = 0.0
    chi: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")

    @property
    def beta(self) -> complex:
        return complex(self.gamma, self.chi)

    @property
    def superop(self) -> SuperopParams:
        return SuperopParams(self.chi, self.gamma)


@dataclass(frozen=True)
class AtomFieldState:
    rho_ee: np.ndarray
    rho_eg: np.ndarray
    rho_ge: np.ndarray
    rho_gg: np.ndarray

    @classmethod
    def product(cls, c_e: complex, c_g: complex, psi: np.ndarray) -> AtomFieldState:
        """``(c_e|e> + c_g|g>) (x) psi`` as a pure product state."""
        field = np.outer(psi, psi.conj())
        return cls(abs(c_e) ** 2 * field, c_e * np.conj(c_g) * field,
                   c_g * np.conj(c_e) * field, abs(c_g) ** 2 * field)

    @property
    def n_max(self) -> int:
        return self.rho_ee.shape[0] - 1

    def assemble(self) -> np.ndarray:
        """Full operator in the ordered basis ``{|e>, |g>} (x) {|0>..|n_max>}``."""
        return np.block([[self.rho_ee, self.rho_eg], [self.rho_ge, self.rho_gg]])

    def field(self) -> np.ndarray:
        """Reduced field state (atom traced out)."""
        return self.rho_ee + self.rho_gg

    def total_trace(self) -> complex:
        return complex(np.trace(self.rho_ee) + np.trace(self.rho_gg))

    def residuals(self) -> dict[str, float]:
        return {
            "hermiticity_ee": hermiticity_residual(self.rho_ee),
            "hermiticity_gg": hermiticity_residual(self.rho_gg),
            "adjoint_eg_ge": float(np.max(np.abs(self.rho_ge - self.rho_eg.conj().T))),
            "trace_error": abs(self.total_trace() - 1.0),
            "min_eigenvalue": float(np.linalg.eigvalsh(_hermitian_part(self.assemble()))[0]),
        }

    def violations(self) -> dict[str, float]:
        r = self.residuals()
        bad = {k: v for k, v in r.items()
               if k.startswith(("hermiticity", "adjoint")) and v > HERMITIAN_TOL}
        if r["trace_error"] > TRACE_TOL:
            bad["trace_error"] = r["trace_error"]
        if r["min_eigenvalue"] < -PSD_TOL:
            bad["min_eigenvalue"] = r["min_eigenvalue"]
        return bad


def _hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def _displacement_integral(params: ModelParams, drive: drv.DriveSpec, t: float, sign: int) -> complex:
    # G_pm(t) = int_0^t f(s) exp(i(nu +- chi)s + gamma s) ds
    mu = 1j * (params.nu + sign * params.chi) + params.gamma
    return drv.modulated_integral(drive, mu, t)


def _displace(rho0: np.ndarray, G: complex) -> np.ndarray:
    """``D^dag(iG) rho0 D(iG)``."""
    n_max = rho0.shape[0] - 1
    if abs(G) ** 2 > n_max / 4:
        warnings.warn(f"displacement |G|^2={abs(G) ** 2:.3g} exceeds n_max/4={n_max / 4:.3g}",
                      TruncationWarning, stacklevel=3)
    D = displacement(1j * G, n_max)
    return D.conj().T @ rho0 @ D


def _solve_diagonal(params, drive, rho0, t, sign):
    rho0 = np.asarray(rho0, dtype=complex)
    if t == 0:
        return rho0.copy()
    if drive.is_zero:
        moved = rho0
    else:
        moved = _displace(rho0, _displacement_integral(params, drive, t, sign))
    return decay_propagator(params.superop, t, sign, moved)


def solve_rho_ee(params: ModelParams, drive: drv.DriveSpec, rho0: np.ndarray, t: float) -> np.ndarray:
    """Excited-state block: ``exp((R + D) t) [D^dag(iG+) rho0 D(iG+)]``."""
    return _solve_diagonal(params, drive, rho0, t, +1)


def solve_rho_gg(params: ModelParams, drive: drv.DriveSpec, rho0: np.ndarray, t: float) -> np.ndarray:
    """Ground-state block: ``exp((-R + D) t) [D^dag(iG-) rho0 D(iG-)]``."""
    return _solve_diagonal(params, drive, rho0, t, -1)


def _decayed_raise(c: complex, decay: complex, n_max: int) -> np.ndarray:
    """``exp(-decay n) exp(c a^dag)`` with the growth of ``c`` absorbed entrywise.

    Entry ``(m, j)`` equals ``e^{-decay j} (c e^{-decay})^(m-j) / (m-j)! sqrt(m!/j!)``,
    so no factor ``e^{+decay}`` is ever formed on its own.
    """
    j = np.arange(n_max + 1)
    return nilpotent_exp_raise(c * np.exp(-decay), n_max) * np.exp(-decay * j)[None, :]


def coherence_factors(params: ModelParams, drive: drv.DriveSpec, t: float, n_max: int,
                      conjugate: bool = False):
    """Left and right field operators and the G integrals of the coherence block.

    Returns ``(left, right, G)`` with
    ``left  = e^{-beta t n} e^{-i G1 a^dag} e^{-i G2 a}`` and
    ``right = e^{i G3 a^dag} e^{i G4 a} e^{-beta t n}``.
    """
    beta = params.beta.conjugate() if conjugate else params.beta
    G = drv.coherence_integrals(drive, params.nu, params.gamma, beta, t)
    g1, g2, g3, g4 = G
    bt = beta * t
    left = _decayed_raise(-1j * g1, bt, n_max) @ nilpotent_exp_lower(-1j * g2, n_max)
    right = nilpotent_exp_raise(1j * g3, n_max) @ _decayed_raise(1j * g4, bt, n_max).T
    return left, right, G


def check_overflow_guard(params: ModelParams, t: float, n_max: int) -> None:
    if params.gamma * t * n_max > OVERFLOW_GUARD:
        raise OverflowGuardError(
            f"gamma*t*n_max = {params.gamma * t * n_max:.3g} exceeds {OVERFLOW_GUARD:g}; "
            "use the oracle integrator (method=oracle) for this time range")


def _solve_coherence(params, drive, rho0, t, conjugate, prefactor):
    rho0 = np.asarray(rho0, dtype=complex)
    n_max = rho0.shape[0] - 1
    if t == 0:
        return rho0.copy()
    beta = params.beta.conjugate() if conjugate else params.beta
    if beta == 0:
        # no dissipation, no dispersion: pure displacement by the drive
        if drive.is_zero:
            return rho0.copy()
        return _displace(rho0, drv.modulated_integral(drive, 1j * params.nu, t))
    check_overflow_guard(params, t, n_max)
    x = params.gamma / (2 * beta)
    rho1 = exp_J(x, rho0)
    left, right, _ = coherence_factors(params, drive, t, n_max, conjugate)
    if prefactor == "closed_form":
        scale = np.exp(-drv.prefactor_integral(drive, params.nu, params.gamma, params.chi, t, beta=beta))
    elif prefactor == "magnus":
        scale = np.exp(drv.magnus_scalar(drive, params.nu, params.gamma, params.chi, t, beta=beta))
    else:
        raise ValueError(f"prefactor must be 'closed_form' or 'magnus', got {prefactor!r}")
    return exp_J(-x, scale * (left @ rho1 @ right))


def solve_rho_eg(params: ModelParams, drive: drv.DriveSpec, rho0: np.ndarray, t: float,
                 prefactor: str = "closed_form") -> np.ndarray:
    """Coherence block ``<e|rho|g>``, generator ``S(f_nu) + D - i chi L``.

    The chain is ``rho = exp(-x J) rho1`` with ``x = gamma/(2 beta)``, then
    ``rho1(t) = e^{-Phi} e^{-beta t n} e^{-iG1 a^dag} e^{-iG2 a} rho1(0)
    e^{iG3 a^dag} e^{iG4 a} e^{-beta t n}`` with ``beta = gamma + i chi``.
    ``prefactor="magnus"`` swaps ``-Phi`` for the independently computed
    time-ordering scalar.

    Raises :class:`OverflowGuardError` when ``gamma t n_max > 60``.
    """
    return _solve_coherence(params, drive, rho0, t, False, prefactor)


def solve_rho_ge(params: ModelParams, drive: drv.DriveSpec, rho0: np.ndarray, t: float,
                 prefactor: str = "closed_form") -> np.ndarray:
    """Coherence block ``<g|rho|e>``: :func:`solve_rho_eg` with ``beta -> beta^*``."""
    return _solve_coherence(params, drive, rho0, t, True, prefactor)


def evolve_state(params: ModelParams, drive: drv.DriveSpec, state0: AtomFieldState, t: float,
                 prefactor: str = "closed_form", check: bool = True) -> AtomFieldState:
    out = AtomFieldState(
        solve_rho_ee(params, drive, state0.rho_ee, t),
        solve_rho_eg(params, drive, state0.rho_eg, t, prefactor),
        solve_rho_ge(params, drive, state0.rho_ge, t, prefactor),
        solve_rho_gg(params, drive, state0.rho_gg, t),
    )
    if check:
        bad = out.violations()
        if bad:
            detail = ", ".join(f"{k}={v:.3e}" for k, v in bad.items())
            warnings.warn(f"state invariants violated at t={t}: {detail}", InvariantWarning,
                          stacklevel=2)
    return out


def atomic_energy_gap(params: ModelParams) -> float:
    """``E_e - E_g`` of ``omega/2 sz + chi s_ee``."""
    return params.omega + params.chi * (SIGMA_EE_DIAG["e"] - SIGMA_EE_DIAG["g"])


def to_lab_frame(params: ModelParams, state: AtomFieldState, t: float,
                 inverse: bool = False) -> AtomFieldState:
    """Undo the rotating frame: ``U rho U^dag`` with ``U = exp(-i t H0)``.

    ``H0 = omega/2 sz + chi s_ee + nu n``. ``inverse=True`` maps lab to rotating.
    """
    s = -1.0 if inverse else 1.0
    n = np.arange(state.n_max + 1)
    field_phase = np.exp(-1j * s * params.nu * t * (n[:, None] - n[None, :]))
    atom_phase = np.exp(-1j * s * atomic_energy_gap(params) * t)
    return AtomFieldState(
        field_phase * state.rho_ee,
        atom_phase * field_phase * state.rho_eg,
        np.conj(atom_phase) * field_phase * state.rho_ge,
        field_phase * state.rho_gg,
    )
