import numpy as np
import pytest
from scipy.linalg import expm

from conftest import random_block
from dispqed import superops as so
from dispqed.blocks import ModelParams
from dispqed.drive import DriveSpec
from dispqed.fock import coherent_state, ket2dm
from dispqed.oracle import (IntegratorConfig, OracleError, StackedGenerator, apply_generator,
                            default_dt, liouvillian_matrix, rk4_integrate, unvec, vec)

P = ModelParams(nu=1.0, chi=0.2, gamma=0.05)
DRIVE = DriveSpec("constant", 0.1 - 0.02j)


def test_generator_special_cases(rng):
    rho = random_block(rng, 10, 9)
    p0 = ModelParams(chi=0.3, gamma=0.0)
    np.testing.assert_array_equal(apply_generator("ee", p0, DriveSpec.zero(), 0.0, rho),
                                  so.apply_R(p0.superop, rho))
    expected = so.apply_lindblad(P.superop, rho) - 1j * P.chi * so.apply_L(rho)
    np.testing.assert_allclose(apply_generator("eg", P, DriveSpec.zero(), 0.0, rho), expected)


def test_generator_is_sum_of_parts(rng):
    rho = random_block(rng, 10, 9)
    t = 0.37
    eps = DRIVE.f0 * np.exp(1j * P.nu * t)
    parts = so.apply_R(P.superop, rho) + so.apply_S(eps, rho) + so.apply_lindblad(P.superop, rho)
    np.testing.assert_allclose(apply_generator("ee", P, DRIVE, t, rho), parts, atol=1e-15)
    with pytest.raises(ValueError):
        apply_generator("xy", P, DRIVE, t, rho)


@pytest.mark.parametrize("kind", ["ee", "gg", "eg", "ge"])
def test_stacked_generator_matches_superop_form(kind, rng):
    rho = random_block(rng, 12, 12)
    fast = StackedGenerator([kind], P, DRIVE, 12)(0.6, rho[None])[0]
    np.testing.assert_allclose(fast, apply_generator(kind, P, DRIVE, 0.6, rho), atol=1e-12)


def test_diagonal_generator_conserves_trace(rng):
    rho = random_block(rng, 16, 15)
    for kind in ("ee", "gg"):
        assert abs(np.trace(apply_generator(kind, P, DRIVE, 0.2, rho))) < 1e-12


def test_rk4_zero_time_and_kind_check(rng):
    rho = random_block(rng, 8, 8)
    np.testing.assert_array_equal(rk4_integrate("ee", P, DRIVE, rho, 0.0), rho)
    with pytest.raises(ValueError):
        rk4_integrate("ab", P, DRIVE, rho, 1.0)


def test_rk4_matches_decay_propagator():
    p = ModelParams(chi=0.2, gamma=0.1)
    rho = ket2dm(coherent_state(1.0, 32))
    got = rk4_integrate("ee", p, DriveSpec.zero(), rho, 2.0, IntegratorConfig(dt=1e-3))
    assert np.linalg.norm(got - so.decay_propagator(p.superop, 2.0, 1, rho)) < 1e-8


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_rk4_overflow_aborts():
    p = ModelParams(chi=0.0, gamma=0.0)
    rho = ket2dm(coherent_state(0.5, 8))
    huge = DriveSpec("exponential", 1.0, kappa=400.0)
    with pytest.raises(OracleError, match="non-finite"):
        rk4_integrate("ee", p, huge, rho, 2.0, IntegratorConfig(dt=0.1))


def test_rk4_step_halving_control():
    rho = ket2dm(coherent_state(0.8, 16))
    cfg = IntegratorConfig(dt=0.2, tol=1e-10)
    got = rk4_integrate("eg", P, DRIVE, rho, 1.0, cfg)
    ref = rk4_integrate("eg", P, DRIVE, rho, 1.0, IntegratorConfig(dt=1e-3))
    assert np.linalg.norm(got - ref) < 1e-9
    with pytest.raises(OracleError):
        rk4_integrate("eg", P, DRIVE, rho, 1.0, IntegratorConfig(dt=0.5, tol=1e-30, max_halvings=2))


def test_default_dt():
    assert default_dt(P, DRIVE, 32, 1.0) == 1e-3
    fast = ModelParams(chi=5.0, gamma=0.0)
    assert default_dt(fast, DriveSpec.zero(), 32, 1.0) == pytest.approx(1 / (50 * 5 * 32))
    with pytest.raises(ValueError):
        IntegratorConfig(dt=0.0)


def test_rk4_order():
    p = ModelParams(nu=1.0, chi=0.4, gamma=0.1)
    drive = DriveSpec("sinusoid", 0.2, omega=1.5)
    rho = ket2dm(coherent_state(0.7, 12))
    runs = [rk4_integrate("eg", p, drive, rho, 2.0, IntegratorConfig(dt=h)) for h in (0.1, 0.05, 0.025)]
    ratio = np.linalg.norm(runs[0] - runs[1]) / np.linalg.norm(runs[1] - runs[2])
    assert 14 <= ratio <= 18


@pytest.mark.parametrize("kind", ["ee", "gg", "eg", "ge"])
def test_liouvillian_matches_generator(kind, rng):
    n_max = 7
    L = liouvillian_matrix(kind, P, n_max, t=0.45, drive=DRIVE)
    for _ in range(20):
        rho = random_block(rng, n_max, n_max)
        np.testing.assert_allclose(unvec(L @ vec(rho)), apply_generator(kind, P, DRIVE, 0.45, rho),
                                   atol=1e-12)


def test_liouvillian_exponential_reproduces_decay(rng):
    p = ModelParams(chi=0.3, gamma=0.2)
    rho = random_block(rng, 10, 10)
    dense = unvec(expm(1.5 * liouvillian_matrix("ee", p, 10)) @ vec(rho))
    np.testing.assert_allclose(dense, so.decay_propagator(p.superop, 1.5, 1, rho), atol=1e-8)


def test_liouvillian_stationary_vacuum():
    ev = np.linalg.eigvals(liouvillian_matrix("ee", ModelParams(chi=0.2, gamma=0.1), 10))
    assert np.max(ev.real) == pytest.approx(0.0, abs=1e-12)


def test_liouvillian_size_guard():
    with pytest.raises(ValueError):
        liouvillian_matrix("ee", P, 49)


def test_rk4_agrees_with_dense_exponential_time_independent():
    # constant f_nu requires nu = 0
    p = ModelParams(nu=0.0, chi=0.2, gamma=0.05)
    rho = ket2dm(coherent_state(0.6, 14))
    for kind in ("ee", "eg"):
        L = liouvillian_matrix(kind, p, 14, drive=DRIVE)
        dense = unvec(expm(1.2 * L) @ vec(rho))
        assert np.linalg.norm(rk4_integrate(kind, p, DRIVE, rho, 1.2) - dense) < 1e-8
