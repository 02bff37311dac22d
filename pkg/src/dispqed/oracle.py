"""Reference integrators for the block master equations.

Two routes independent of the closed forms: fixed-step RK4 on the block
generators, and dense exponentials of the column-stacked Liouvillian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import drive as drv
from . import superops as so
from .blocks import ModelParams
from .fock import annihilation, number_op

BLOCK_KINDS = ("ee", "gg", "eg", "ge")
DENSE_N_MAX = 48


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    """``dt=None`` picks the default step; ``tol`` enables step halving."""

    dt: float | None = None
    tol: float | None = None
    max_halvings: int = 8

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")


def _check_kind(kind: str) -> None:
    if kind not in BLOCK_KINDS:
        raise ValueError(f"unknown block kind {kind!r}; expected one of {BLOCK_KINDS}")


def f_nu(drive: drv.DriveSpec, nu: float, t: float) -> complex:
    return drv.eval_f(drive, t) * np.exp(1j * nu * t)


def apply_generator(kind: str, params: ModelParams, drive: drv.DriveSpec, t: float,
                    rho: np.ndarray) -> np.ndarray:
    _check_kind(kind)
    p = params.superop
    out = so.apply_lindblad(p, rho)
    if not drive.is_zero:
        out = out + so.apply_S(f_nu(drive, params.nu, t), rho)
    if kind == "ee":
        out = out + so.apply_R(p, rho)
    elif kind == "gg":
        out = out - so.apply_R(p, rho)
    elif kind == "eg":
        out = out - 1j * params.chi * so.apply_L(rho)
    else:
        out = out + 1j * params.chi * so.apply_L(rho)
    return out


def default_dt(params: ModelParams, drive: drv.DriveSpec, n_max: int, t_end: float) -> float:
    rate = max(params.gamma * n_max, abs(params.chi) * n_max,
               drive.scale(t_end) * math.sqrt(n_max), 1e-12)
    return min(1e-3, 1.0 / (50.0 * rate))


# (left, right) signs of chi n in the effective Hamiltonians H_L, H_R of each block:
# rho' = -i (H_L rho - rho H_R) - gamma L rho + gamma J rho
_CHI_SIGNS = {"ee": (1, 1), "gg": (-1, -1), "eg": (1, -1), "ge": (-1, 1)}


class StackedGenerator:
    """Right-hand side for a stack of blocks ``(k, d, d)`` using index shifts only.

    Mathematically identical to :func:`apply_generator` per block, but avoids
    dense matrix products so the reference integration stays cheap.
    """

    def __init__(self, kinds, params: ModelParams, drive: drv.DriveSpec, n_max: int):
        for k in kinds:
            _check_kind(k)
        self.params, self.drive = params, drive
        d = n_max + 1
        n = np.arange(d, dtype=float)
        sl = np.array([_CHI_SIGNS[k][0] for k in kinds], dtype=float)[:, None, None]
        sr = np.array([_CHI_SIGNS[k][1] for k in kinds], dtype=float)[:, None, None]
        m_, n_ = n[None, :, None], n[None, None, :]
        self.diag = (-1j * params.chi * (sl * m_ - sr * n_) - params.gamma * (m_ + n_))
        sq = np.sqrt(n[1:])
        self.jump = 2 * params.gamma * sq[:, None] * sq[None, :]
        self.sq = sq

    def __call__(self, t: float, rho: np.ndarray) -> np.ndarray:
        out = self.diag * rho
        # 2 gamma a rho a^dag: (m, n) <- sqrt(m+1) sqrt(n+1) rho[m+1, n+1]
        out[:, :-1, :-1] += self.jump * rho[:, 1:, 1:]
        if not self.drive.is_zero:
            eps = f_nu(self.drive, self.params.nu, t)
            sq = self.sq
            krho = np.zeros_like(rho)
            # K = eps a^dag + eps^* a, applied from the left then the right
            krho[:, 1:, :] += eps * sq[:, None] * rho[:, :-1, :]
            krho[:, :-1, :] += np.conj(eps) * sq[:, None] * rho[:, 1:, :]
            krho[:, :, :-1] -= eps * sq[None, :] * rho[:, :, 1:]
            krho[:, :, 1:] -= np.conj(eps) * sq[None, :] * rho[:, :, :-1]
            out += -1j * krho
        return out


def _rk4_fixed(rhs, rho0, t_start, t_end, n_steps):
    rho = np.array(rho0, dtype=complex)
    h = (t_end - t_start) / n_steps
    for i in range(n_steps):
        t = t_start + i * h
        k1 = rhs(t, rho)
        k2 = rhs(t + h / 2, rho + (h / 2) * k1)
        k3 = rhs(t + h / 2, rho + (h / 2) * k2)
        k4 = rhs(t + h, rho + h * k3)
        rho = rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(rho)):
            raise OracleError(f"non-finite density block at t={t + h:.6g} (step {i + 1}, dt={h:.3g})")
    return rho


def rk4_stack(kinds, params: ModelParams, drive: drv.DriveSpec, rho0: np.ndarray, t_end: float,
              cfg: IntegratorConfig | None = None, t_start: float = 0.0) -> np.ndarray:
    """Integrate several blocks at once; ``rho0`` has shape ``(len(kinds), d, d)``."""
    cfg = cfg or IntegratorConfig()
    rho0 = np.asarray(rho0, dtype=complex)
    span = t_end - t_start
    if span < 0:
        raise ValueError("t_end must not precede t_start")
    if span == 0:
        return rho0.copy()
    n_max = rho0.shape[-1] - 1
    rhs = StackedGenerator(kinds, params, drive, n_max)
    dt = cfg.dt or default_dt(params, drive, n_max, t_end)
    n_steps = max(1, math.ceil(span / dt - 1e-9))
    rho = _rk4_fixed(rhs, rho0, t_start, t_end, n_steps)
    if cfg.tol is None:
        return rho
    for _ in range(cfg.max_halvings):
        n_steps *= 2
        finer = _rk4_fixed(rhs, rho0, t_start, t_end, n_steps)
        # Richardson estimate of the finer run's error
        err = np.linalg.norm(finer - rho) / 15.0
        rho = finer
        if err <= cfg.tol:
            return rho
    raise OracleError(f"step halving did not reach tol={cfg.tol:g} (last estimate {err:.3g})")


def rk4_integrate(kind: str, params: ModelParams, drive: drv.DriveSpec, rho0: np.ndarray,
                  t_end: float, cfg: IntegratorConfig | None = None,
                  t_start: float = 0.0) -> np.ndarray:
    """Integrate one block from ``t_start`` to ``t_end`` with classical RK4.

    The drive is sampled at ``t``, ``t + dt/2`` and ``t + dt`` of every step. The
    step is shrunk so that a whole number of steps covers the interval.
    """
    _check_kind(kind)
    out = rk4_stack([kind], params, drive, np.asarray(rho0)[None], t_end, cfg, t_start)
    return out[0]


def vec(rho: np.ndarray) -> np.ndarray:
    """Column stacking."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = math.isqrt(v.shape[0])
    return v.reshape(d, d, order="F")


def liouvillian_matrix(kind: str, params: ModelParams, n_max: int, t: float = 0.0,
                       drive: drv.DriveSpec | None = None) -> np.ndarray:
    """Dense generator acting on column-stacked blocks: ``vec(A X B) = (B^T kron A) vec(X)``."""
    _check_kind(kind)
    if n_max > DENSE_N_MAX:
        raise ValueError(f"dense Liouvillian limited to n_max <= {DENSE_N_MAX}, got {n_max}")
    a = annihilation(n_max)
    ad = a.conj().T
    n = number_op(n_max)
    eye = np.eye(n_max + 1)

    def left(A):
        return np.kron(eye, A)

    def right(B):
        return np.kron(B.T, eye)

    L_op = left(n) + right(n)
    out = params.gamma * (2 * np.kron(ad.T, a) - L_op)
    if drive is not None and not drive.is_zero:
        eps = f_nu(drive, params.nu, t)
        K = eps * ad + np.conj(eps) * a
        out = out - 1j * (left(K) - right(K))
    comm_n = -1j * params.chi * (left(n) - right(n))
    if kind == "ee":
        out = out + comm_n
    elif kind == "gg":
        out = out - comm_n
    elif kind == "eg":
        out = out - 1j * params.chi * L_op
    else:
        out = out + 1j * params.chi * L_op
    return out


def superop_matrix(fn, n_max: int) -> np.ndarray:
    """Materialize a linear map on matrices by applying it to every basis element."""
    d = n_max + 1
    cols = []
    for idx in range(d * d):
        e = np.zeros(d * d, dtype=complex)
        e[idx] = 1.0
        cols.append(vec(fn(unvec(e))))
    return np.stack(cols, axis=1)
