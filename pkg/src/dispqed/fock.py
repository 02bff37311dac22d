"""Truncated Fock-space linear algebra.

Every field operator and density block is a dense ``(n_max + 1) x (n_max + 1)``
complex ndarray indexed by Fock levels ``(m, n)``.
"""

from __future__ import annotations

import warnings
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

DEFAULT_N_MAX = 32
TRUNCATION_LOSS_TOL = 1e-10


class TruncationWarning(UserWarning):
    """Raised (as a warning) when a state leaks past the highest Fock level."""


def check_n_max(n_max: int) -> int:
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    return n_max


def annihilation(n_max: int) -> np.ndarray:
    """Read-only ladder matrix with ``(n-1, n)`` entry ``sqrt(n)``."""
    return _annihilation(check_n_max(n_max))


@lru_cache(maxsize=32)
def _annihilation(n_max: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)
    a.flags.writeable = False
    return a


def creation(n_max: int) -> np.ndarray:
    return annihilation(n_max).conj().T


def number_op(n_max: int) -> np.ndarray:
    n_max = check_n_max(n_max)
    return np.diag(np.arange(n_max + 1, dtype=float)).astype(complex)


def levels(n_max: int) -> np.ndarray:
    return np.arange(check_n_max(n_max) + 1)


def fock_state(n: int, n_max: int) -> np.ndarray:
    n_max = check_n_max(n_max)
    if not 0 <= n <= n_max:
        raise ValueError(f"Fock level {n} outside 0..{n_max}")
    v = np.zeros(n_max + 1, dtype=complex)
    v[n] = 1.0
    return v


def coherent_state(alpha: complex, n_max: int, warn: bool = True) -> np.ndarray:
    """Amplitudes ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)`` for ``n <= n_max``.

    The vector is not renormalized; a :class:`TruncationWarning` is emitted
    when more than ``1e-10`` of the probability falls above ``n_max``.
    """
    n = levels(n_max)
    alpha = complex(alpha)
    if alpha == 0:
        return fock_state(0, n_max)
    # log-space keeps alpha^n / sqrt(n!) finite for large n
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    v = np.exp(log_mag) * np.exp(1j * np.angle(alpha) * n)
    loss = 1.0 - float(np.vdot(v, v).real)
    if warn and loss > TRUNCATION_LOSS_TOL:
        warnings.warn(
            f"coherent state alpha={alpha:.4g} loses {loss:.3e} of its norm above n_max={n_max}",
            TruncationWarning,
            stacklevel=2,
        )
    return v


def ket2dm(v: np.ndarray) -> np.ndarray:
    return np.outer(v, v.conj())


def displacement(alpha: complex, n_max: int) -> np.ndarray:
    """Glauber displacement ``exp(alpha a^dag - alpha^* a)`` in the truncated space."""
    a = annihilation(n_max)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    return expm(gen)


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def trace(m: np.ndarray) -> complex:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"trace needs a square matrix, got shape {m.shape}")
    return complex(np.trace(m))


def frobenius_distance(m1: np.ndarray, m2: np.ndarray) -> float:
    m1, m2 = np.asarray(m1), np.asarray(m2)
    if m1.shape != m2.shape:
        raise ValueError(f"dimension mismatch: {m1.shape} vs {m2.shape}")
    return float(np.linalg.norm(m1 - m2))


def expect(op: np.ndarray, rho: np.ndarray) -> complex:
    return complex(np.trace(op @ rho))


def hermiticity_residual(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T), initial=0.0))


def nilpotent_exp_raise(c: complex, n_max: int) -> np.ndarray:
    """Exact ``exp(c a^dag)`` for the truncated creation operator.

    Entry ``(m, j)`` is ``c^(m-j) / (m-j)! * sqrt(m!/j!)`` for ``m >= j``.
    """
    n = levels(n_max)
    m, j = np.meshgrid(n, n, indexing="ij")
    k = m - j
    mask = k >= 0
    kk = np.where(mask, k, 0)
    log_coef = 0.5 * (gammaln(m + 1) - gammaln(j + 1)) - gammaln(kk + 1)
    out = np.where(mask, np.exp(log_coef) * _power(c, kk), 0.0)
    return out.astype(complex)


def nilpotent_exp_lower(c: complex, n_max: int) -> np.ndarray:
    """Exact ``exp(c a)``; the transpose of :func:`nilpotent_exp_raise`."""
    return nilpotent_exp_raise(c, n_max).T.copy()


def _power(c: complex, k: np.ndarray) -> np.ndarray:
    # 0**0 must be 1 so that c=0 gives the identity
    c = complex(c)
    if c == 0:
        return (k == 0).astype(complex)
    return c ** k.astype(complex)
