"""Observables and phase-space quasiprobabilities (Husimi Q, Wigner W)."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .blocks import AtomFieldState
from .fock import coherent_state

REALITY_TOL = 1e-10


@dataclass
class PhaseSpaceGrid:
    """Rectangular grid; ``values[i, j]`` sits at ``re[i] + 1j * im[j]``."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    n_re: int
    n_im: int
    values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("grid bounds must satisfy min < max")
        if self.n_re < 2 or self.n_im < 2:
            raise ValueError("grid needs at least 2 points per axis")

    @property
    def re(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.n_re)

    @property
    def im(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.n_im)

    def points(self) -> np.ndarray:
        """Complex points in row-major ``(im, re)`` order."""
        re, im = np.meshgrid(self.re, self.im, indexing="xy")
        return (re + 1j * im).ravel()

    def with_values(self, flat: np.ndarray) -> PhaseSpaceGrid:
        vals = np.asarray(flat, dtype=float).reshape(self.n_im, self.n_re).T
        return PhaseSpaceGrid(self.re_min, self.re_max, self.im_min, self.im_max,
                              self.n_re, self.n_im, vals)

    def rows(self):
        """``(re, im, value)`` triples, im-major then re."""
        for j, y in enumerate(self.im):
            for i, x in enumerate(self.re):
                yield x, y, self.values[i, j]


def mean_photon(rho: np.ndarray) -> float:
    n = np.arange(rho.shape[0])
    return float(np.real(np.sum(n * np.diag(rho))))


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.vdot(rho.conj().T, rho)))


def atomic_inversion(state: AtomFieldState) -> float:
    return float(np.real(np.trace(state.rho_ee) - np.trace(state.rho_gg)))


def coherence_magnitude(state: AtomFieldState) -> float:
    return float(abs(np.trace(state.rho_eg)))


def _check_real(vals: np.ndarray, what: str) -> np.ndarray:
    worst = float(np.max(np.abs(vals.imag), initial=0.0))
    if worst > REALITY_TOL:
        raise ArithmeticError(f"{what} has imaginary part {worst:.3e}; is rho Hermitian?")
    return vals.real


def husimi_q(rho: np.ndarray, grid: PhaseSpaceGrid) -> PhaseSpaceGrid:
    """``Q(b) = <b|rho|b> / pi`` using exact coherent amplitudes on the retained levels."""
    n_max = rho.shape[0] - 1
    kets = np.stack([coherent_state(b, n_max, warn=False) for b in grid.points()], axis=1)
    vals = np.einsum("mk,mn,nk->k", kets.conj(), rho, kets) / np.pi
    return grid.with_values(_check_real(vals, "Husimi Q"))


@lru_cache(maxsize=8)
def _quadrature_eig(dim: int):
    # a^dag - a is real antisymmetric, so i(a^dag - a) is Hermitian
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)
    w, V = np.linalg.eigh(1j * (a.T - a))
    return w, V


def padded_dimension(n_max: int, radius: float) -> int:
    """Levels needed so that ``D(alpha)|n>`` for ``n <= n_max`` is exact to rounding."""
    reach = (np.sqrt(n_max) + radius) ** 2 + 10 * (np.sqrt(n_max) + radius) + 20
    return int(max(2 * (n_max + 1), np.ceil(reach)))


def _displacement_columns(alpha: complex, dim: int, cols: int) -> np.ndarray:
    """First ``cols`` columns of ``D(alpha)`` in a ``dim``-level space.

    Uses ``D(r e^{i th}) = e^{i th n} exp(r (a^dag - a)) e^{-i th n}`` and one cached
    eigendecomposition of ``i(a^dag - a)``.
    """
    w, V = _quadrature_eig(dim)
    r, th = abs(alpha), np.angle(alpha)
    # exp(r (a^dag - a)) = V exp(-i r w) V^dag
    core = (V * np.exp(-1j * r * w)) @ V[:cols].conj().T
    n = np.arange(dim)
    return np.exp(1j * th * n)[:, None] * core * np.exp(-1j * th * n[:cols])[None, :]


def wigner_point(rho: np.ndarray, alpha: complex, dim: int) -> complex:
    """``(2/pi) tr[D^dag(alpha) rho D(alpha) P]``, with ``rho`` zero-padded to ``dim`` levels."""
    cols = rho.shape[0]
    # D^dag(alpha) = D(-alpha); only columns on rho's support matter
    Dm = _displacement_columns(-alpha, dim, cols)
    diag = np.einsum("km,mn,kn->k", Dm, rho, Dm.conj())
    parity = 1 - 2 * (np.arange(dim) % 2)
    return 2 / np.pi * np.sum(parity * diag)


def wigner(rho: np.ndarray, grid: PhaseSpaceGrid, workers: int | None = None) -> PhaseSpaceGrid:
    """Wigner function by displaced parity, one displacement per grid point.

    ``workers > 1`` evaluates points on a thread pool; each point is computed the
    same way either way, so the result does not depend on ``workers``.
    """
    pts = grid.points()
    radius = float(np.max(np.abs(pts)))
    dim = padded_dimension(rho.shape[0] - 1, radius)
    rho = np.asarray(rho, dtype=complex)

    def one(p):
        return wigner_point(rho, p, dim)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            vals = np.array(list(ex.map(one, pts)))
    else:
        vals = np.array([one(p) for p in pts])
    return grid.with_values(_check_real(vals, "Wigner W"))
