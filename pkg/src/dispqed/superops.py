"""Superoperators of the dispersive, damped, driven field.

All maps act on matrices directly (``rho -> rho'``); nothing here builds the
``(n_max+1)^2``-dimensional superoperator matrix. Conventions:

    L rho   = n rho + rho n                  (n = a^dag a)
    J rho   = 2 a rho a^dag
    D rho   = gamma (J - L) rho              (the Lindblad dissipator)
    R rho   = -i chi [n, rho]
    S(e)rho = -i [e a^dag + e^* a, rho]
    S1(f)rho = -2i (f rho a^dag - f^* a rho)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .fock import annihilation


@dataclass(frozen=True)
class SuperopParams:
    chi: float
    gamma: float = 0.0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")


def _dim(rho: np.ndarray) -> int:
    return rho.shape[0] - 1


def _mn(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = np.arange(rho.shape[0])
    return n[:, None], n[None, :]


def apply_L(rho: np.ndarray) -> np.ndarray:
    m, n = _mn(rho)
    return (m + n) * rho


def apply_J(rho: np.ndarray) -> np.ndarray:
    a = annihilation(_dim(rho))
    return 2.0 * a @ rho @ a.conj().T


def apply_lindblad(p: SuperopParams, rho: np.ndarray) -> np.ndarray:
    return p.gamma * (apply_J(rho) - apply_L(rho))


def apply_R(p: SuperopParams, rho: np.ndarray) -> np.ndarray:
    m, n = _mn(rho)
    return -1j * p.chi * (m - n) * rho


def apply_S(eps: complex, rho: np.ndarray) -> np.ndarray:
    a = annihilation(_dim(rho))
    k = eps * a.conj().T + np.conj(eps) * a
    return -1j * (k @ rho - rho @ k)


def apply_S1(f: complex, rho: np.ndarray) -> np.ndarray:
    a = annihilation(_dim(rho))
    return -2j * (f * rho @ a.conj().T - np.conj(f) * a @ rho)


def exp_R(chi: float, t: float, rho: np.ndarray) -> np.ndarray:
    """``exp(R t)``: entry ``(m, n)`` picks up ``exp(-i chi t (m - n))``."""
    m, n = _mn(rho)
    return np.exp(-1j * chi * t * (m - n)) * rho


def exp_L_decay(gamma: float, t: float, rho: np.ndarray) -> np.ndarray:
    """``exp(-gamma t L)``: entry ``(m, n)`` is damped by ``exp(-gamma t (m + n))``."""
    m, n = _mn(rho)
    return np.exp(-gamma * t * (m + n)) * rho


def exp_J(c: complex, rho: np.ndarray) -> np.ndarray:
    """``exp(c J)`` as the exact finite sum over powers of ``J``.

    ``(J^k rho)_{mn} = 2^k sqrt((m+k)!/m!) sqrt((n+k)!/n!) rho_{m+k, n+k}``, and
    ``J^k`` vanishes once ``k`` exceeds the truncation.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    c = complex(c)
    out = rho.copy()
    if c == 0:
        return out
    idx = np.arange(dim)
    lg = gammaln(idx + 1)
    for k in range(1, dim):
        size = dim - k
        m = idx[:size]
        # sqrt((m+k)!/m!) along each axis, scaled by (2c)^k / k!
        w = np.exp(0.5 * (lg[m + k] - lg[m]))
        coef = (2 * c) ** k * np.exp(-gammaln(k + 1))
        out[:size, :size] += coef * (w[:, None] * w[None, :]) * rho[k:, k:]
    return out


def decay_coefficient(gamma: float, t: float) -> float:
    """Weight ``c`` in ``exp(gamma t (J - L)) = exp(-gamma t L) exp(c J)``."""
    return -0.5 * np.expm1(-2.0 * gamma * t)


def decay_propagator(p: SuperopParams, t: float, sign: int, rho: np.ndarray) -> np.ndarray:
    """``exp((sign R + D) t) rho`` for ``sign`` in ``{+1, -1}``.

    Factorized as ``exp(sign R t) exp(-gamma t L) exp(c J)`` with
    ``c = (1 - exp(-2 gamma t)) / 2``; ``R`` commutes with both ``J`` and ``L``.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    out = exp_J(decay_coefficient(p.gamma, t), rho)
    out = exp_L_decay(p.gamma, t, out)
    return exp_R(sign * p.chi, t, out)


def commutator(A, B, rho: np.ndarray) -> np.ndarray:
    """``[A, B] rho`` for two superoperators given as callables."""
    return A(B(rho)) - B(A(rho))
