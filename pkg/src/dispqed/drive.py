"""Time-dependent amplification amplitude ``f(t)`` and its modulated integrals."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad

QUAD_TOL = 1e-10
KINDS = ("constant", "exponential", "sinusoid", "samples")


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class DriveSpec:
    """Parametric drive.

    * ``constant``:    ``f(t) = f0``
    * ``exponential``: ``f(t) = f0 exp(kappa t)``
    * ``sinusoid``:    ``f(t) = f0 cos(omega t + phase)``
    * ``samples``:     piecewise-linear through ``(times[i], values[i])``
    """

    kind: str = "constant"
    f0: complex = 0.0
    kappa: complex = 0.0
    omega: float = 0.0
    phase: float = 0.0
    times: tuple = field(default=())
    values: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown drive kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "samples":
            t = np.asarray(self.times, dtype=float)
            if t.ndim != 1 or len(t) < 2 or len(t) != len(self.values):
                raise ValueError("sampled drive needs >= 2 times and matching values")
            if np.any(np.diff(t) <= 0):
                raise ValueError("sample times must be strictly increasing")

    @classmethod
    def zero(cls) -> DriveSpec:
        return cls("constant", 0.0)

    @property
    def is_zero(self) -> bool:
        if self.kind == "samples":
            return not np.any(np.asarray(self.values, dtype=complex))
        return self.f0 == 0

    def scale(self, t_end: float = 0.0) -> float:
        """Upper bound on ``|f|`` over ``[0, t_end]``."""
        if self.kind == "samples":
            return float(np.max(np.abs(np.asarray(self.values, dtype=complex))))
        if self.kind == "exponential":
            return abs(self.f0) * max(1.0, float(np.exp(complex(self.kappa).real * t_end)))
        return abs(self.f0)

    def shifted(self, t0: float, nu: float = 0.0) -> DriveSpec:
        """Drive seen by a clock restarted at ``t0`` in the frame rotating at ``nu``.

        Returns ``f'(s) = f(s + t0) exp(i nu t0)``, so that ``f'_nu(s) = f_nu(s + t0)``.
        """
        ph = np.exp(1j * nu * t0)
        if self.kind == "constant":
            return DriveSpec("constant", self.f0 * ph)
        if self.kind == "exponential":
            return DriveSpec("exponential", self.f0 * ph * np.exp(self.kappa * t0), kappa=self.kappa)
        if self.kind == "sinusoid":
            return DriveSpec("sinusoid", self.f0 * ph, omega=self.omega,
                             phase=self.phase + self.omega * t0)
        t = np.asarray(self.times, dtype=float)
        keep = t > t0
        new_t = np.concatenate([[0.0], t[keep] - t0])
        new_v = np.concatenate([[eval_f(self, t0)], np.asarray(self.values, complex)[keep]]) * ph
        return DriveSpec("samples", times=tuple(new_t), values=tuple(new_v))


def eval_f(spec: DriveSpec, t: float) -> complex:
    if spec.kind == "constant":
        return complex(spec.f0)
    if spec.kind == "exponential":
        return complex(spec.f0 * np.exp(spec.kappa * t))
    if spec.kind == "sinusoid":
        return complex(spec.f0 * np.cos(spec.omega * t + spec.phase))
    times = np.asarray(spec.times, dtype=float)
    if t < times[0] or t > times[-1]:
        raise ValueError(f"t={t} outside the sampled drive domain [{times[0]}, {times[-1]}]")
    vals = np.asarray(spec.values, dtype=complex)
    return complex(np.interp(t, times, vals.real) + 1j * np.interp(t, times, vals.imag))


def _phi1(z: complex) -> complex:
    """``(e^z - 1) / z`` with the removable singularity at 0."""
    if abs(z) < 1e-3:
        return 1 + z / 2 + z * z / 6 + z ** 3 / 24 + z ** 4 / 120
    return np.expm1(z) / z


def _phi2(z: complex) -> complex:
    """``int_0^1 v e^(z v) dv = (z e^z - e^z + 1) / z^2``."""
    if abs(z) < 0.5:
        total, term = 0.0, 1.0
        for k in range(30):
            total += term / (k + 2)
            term *= z / (k + 1)
        return total
    return (z * np.exp(z) - np.expm1(z)) / (z * z)


def exp_integral(mu: complex, t: float) -> complex:
    """``int_0^t exp(mu s) ds``."""
    return t * _phi1(mu * t)


def quad_complex(fn, a: float, b: float, tol: float = QUAD_TOL, points=None) -> complex:
    """Adaptive Gauss-Kronrod quadrature of a complex integrand; raises on non-convergence."""
    if b == a:
        return 0.0j
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = quad(fn, a, b, complex_func=True, epsabs=tol * 1e-2, epsrel=1e-13,
                            limit=400, points=points)
        except IntegrationWarning as exc:
            raise QuadratureError(f"quadrature on [{a}, {b}] did not converge: {exc}") from exc
    err = abs(err[0]) + abs(err[1]) if isinstance(err, tuple) else abs(err)
    if err > tol:
        raise QuadratureError(f"quadrature error estimate {err:.2e} exceeds {tol:.0e}")
    return complex(val)


def _samples_integral(spec: DriveSpec, mu: complex, conjugate_f: bool, t: float) -> complex:
    times = np.asarray(spec.times, dtype=float)
    vals = np.asarray(spec.values, dtype=complex)
    if conjugate_f:
        vals = vals.conj()
    if t < times[0] or t > times[-1]:
        raise ValueError(f"t={t} outside the sampled drive domain [{times[0]}, {times[-1]}]")
    if times[0] > 0:
        raise ValueError("sampled drive must start at or before t=0")
    total = 0.0j
    for i in range(len(times) - 1):
        lo, hi = max(times[i], 0.0), min(times[i + 1], t)
        if hi <= lo:
            continue
        slope = (vals[i + 1] - vals[i]) / (times[i + 1] - times[i])
        start = vals[i] + slope * (lo - times[i])
        h = hi - lo
        z = mu * h
        total += np.exp(mu * lo) * (start * h * _phi1(z) + slope * h * h * _phi2(z))
    return complex(total)


def modulated_integral(spec: DriveSpec, mu: complex, t: float, conjugate_f: bool = False,
                       method: str = "auto") -> complex:
    """``int_0^t g(s) exp(mu s) ds`` with ``g = f`` or ``g = f^*``.

    ``method="auto"`` uses the antiderivative for constant and exponential drives,
    exact segment integration for sampled drives, and quadrature for sinusoids.
    ``method="quad"`` forces quadrature for any kind.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    mu = complex(mu)
    if method not in ("auto", "quad"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        if spec.kind in ("constant", "exponential"):
            f0 = complex(spec.f0)
            kappa = complex(spec.kappa) if spec.kind == "exponential" else 0.0
            if conjugate_f:
                f0, kappa = f0.conjugate(), kappa.conjugate()
            return f0 * exp_integral(kappa + mu, t)
        if spec.kind == "samples":
            return _samples_integral(spec, mu, conjugate_f, t)

    def integrand(s):
        v = eval_f(spec, s)
        return (v.conjugate() if conjugate_f else v) * np.exp(mu * s)

    return quad_complex(integrand, 0.0, t, points=_breakpoints(spec, t))


def _breakpoints(spec: DriveSpec, t: float):
    if spec.kind != "samples":
        return None
    inner = [s for s in spec.times if 0 < s < t]
    return inner or None


def coherence_integrals(spec: DriveSpec, nu: float, gamma: float, beta: complex, t: float,
                        method: str = "auto") -> tuple[complex, complex, complex, complex]:
    """Definite integrals ``G_j = int_0^t F_j`` for the coherence-block drive terms.

        F1 = f_nu e^{beta s},          F2 = (1 - gamma/beta) f_nu^* e^{-beta s}
        F3 = (1 - gamma/beta) f_nu e^{-beta s},  F4 = f_nu^* e^{beta s}
    """
    k = 1 - gamma / beta
    g1 = modulated_integral(spec, 1j * nu + beta, t, method=method)
    g2 = k * modulated_integral(spec, -1j * nu - beta, t, conjugate_f=True, method=method)
    g3 = k * modulated_integral(spec, 1j * nu - beta, t, method=method)
    g4 = modulated_integral(spec, -1j * nu + beta, t, conjugate_f=True, method=method)
    return g1, g2, g3, g4


def _F(spec: DriveSpec, nu: float, gamma: float, beta: complex, s: float):
    fnu = eval_f(spec, s) * np.exp(1j * nu * s)
    k = 1 - gamma / beta
    eb = np.exp(beta * s)
    return (fnu * eb, k * fnu.conjugate() / eb, k * fnu / eb, fnu.conjugate() * eb)


def _weighted_exp_integral(p: complex, q: complex, t: float) -> complex:
    """``int_0^t [int_0^s e^{p u} du] e^{q s} ds``."""
    if abs(p * t) < 1e-3:
        # the closed form cancels catastrophically here
        return quad_complex(lambda s: s * _phi1(p * s) * np.exp(q * s), 0.0, t, tol=1e-13)
    return (exp_integral(p + q, t) - exp_integral(q, t)) / p


def prefactor_integral(spec: DriveSpec, nu: float, gamma: float, chi: float, t: float,
                       beta: complex | None = None, method: str = "auto") -> complex:
    """``Phi(t) = int_0^t (F2 G1 + F3 G4) ds`` for the coherence block.

    ``beta`` defaults to ``gamma + i chi``; pass its conjugate for the ``ge`` block.
    The coherence block is scaled by ``exp(-Phi(t))``.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if beta is None:
        beta = complex(gamma, chi)
    beta = complex(beta)
    if beta == 0:
        raise ValueError("beta = gamma + i chi is zero; the coherence block needs no prefactor")
    k = 1 - gamma / beta
    if spec.is_zero or k == 0 or t == 0:
        return 0.0j
    if method == "auto" and spec.kind in ("constant", "exponential"):
        f0 = complex(spec.f0)
        kappa = complex(spec.kappa) if spec.kind == "exponential" else 0.0
        # F2 G1: G1 = f0 int e^{p1 u}, F2 = k f0^* e^{q1 s}
        p1 = kappa + 1j * nu + beta
        q1 = kappa.conjugate() - 1j * nu - beta
        # F3 G4: G4 = f0^* int e^{p4 u}, F3 = k f0 e^{q4 s}
        p4 = kappa.conjugate() - 1j * nu + beta
        q4 = kappa + 1j * nu - beta
        return k * abs(f0) ** 2 * (_weighted_exp_integral(p1, q1, t)
                                   + _weighted_exp_integral(p4, q4, t))

    def integrand(s):
        _, f2, f3, _ = _F(spec, nu, gamma, beta, s)
        g1 = modulated_integral(spec, 1j * nu + beta, s)
        g4 = modulated_integral(spec, -1j * nu + beta, s, conjugate_f=True)
        return f2 * g1 + f3 * g4

    return quad_complex(integrand, 0.0, t, points=_breakpoints(spec, t))


def magnus_scalar(spec: DriveSpec, nu: float, gamma: float, chi: float, t: float,
                  beta: complex | None = None) -> complex:
    """Scalar log-weight of the ordered exponentials, from second-order Magnus terms.

    For the left factor ``exp(-i(G1 a^dag + G2 a))`` the time-ordering correction is
    ``1/2 iint_{s'<s} (F1(s)F2(s') - F2(s)F1(s'))``; for the right factor it is
    ``-1/2 iint_{s'<s} (F3(s)F4(s') - F4(s)F3(s'))``. Splitting each symmetric
    exponential into the normal-ordered pair contributes ``-G1 G2/2`` and ``-G3 G4/2``.
    The result should equal ``-prefactor_integral(...)``; it is computed by nested
    quadrature so the two paths share nothing beyond ``eval_f``.
    """
    if beta is None:
        beta = complex(gamma, chi)
    beta = complex(beta)
    if beta == 0:
        raise ValueError("beta = gamma + i chi is zero")
    if t == 0 or spec.is_zero:
        return 0.0j

    def inner(s):
        # int_0^s F_j(s') ds' for j = 1..4, by quadrature
        return [quad_complex(lambda u, j=j: _F(spec, nu, gamma, beta, u)[j], 0.0, s,
                             points=_breakpoints(spec, s)) for j in range(4)]

    def outer(s):
        F = _F(spec, nu, gamma, beta, s)
        G = inner(s)
        left = 0.5 * (F[0] * G[1] - F[1] * G[0])
        right = -0.5 * (F[2] * G[3] - F[3] * G[2])
        return left + right

    omega2 = quad_complex(outer, 0.0, t, points=_breakpoints(spec, t))
    G = inner(t)
    return omega2 - 0.5 * G[0] * G[1] - 0.5 * G[2] * G[3]
