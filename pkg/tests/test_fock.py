import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispqed.fock import (TruncationWarning, adjoint, annihilation, coherent_state, creation,
                          displacement, fock_state, frobenius_distance, nilpotent_exp_lower,
                          nilpotent_exp_raise, number_op, trace)
from scipy.linalg import expm


def test_annihilation_entries():
    a = annihilation(2)
    expected = np.zeros((3, 3))
    expected[0, 1] = 1.0
    expected[1, 2] = 1.41421356
    np.testing.assert_allclose(a, expected, atol=1e-8)
    np.testing.assert_array_equal(creation(2), a.conj().T)


def test_number_operator_from_ladder():
    a = annihilation(6)
    np.testing.assert_allclose(a.conj().T @ a, np.diag(np.arange(7)), atol=0)


def test_truncated_commutator_artifact():
    n_max = 5
    a = annihilation(n_max)
    comm = a @ a.conj().T - a.conj().T @ a
    expected = np.eye(n_max + 1)
    expected[n_max, n_max] = -n_max
    np.testing.assert_allclose(comm, expected, atol=1e-12)


def test_n_max_must_be_positive():
    with pytest.raises(ValueError):
        annihilation(0)


def test_fock_state():
    v = fock_state(0, 4)
    np.testing.assert_array_equal(v, [1, 0, 0, 0, 0])
    n = number_op(4)
    for k in range(5):
        psi = fock_state(k, 4)
        assert np.vdot(psi, n @ psi).real == k
    assert np.vdot(fock_state(1, 4), fock_state(3, 4)) == 0
    with pytest.raises(ValueError):
        fock_state(5, 4)


def test_coherent_state_values():
    np.testing.assert_array_equal(coherent_state(0, 6), fock_state(0, 6))
    v = coherent_state(1.0, 20)
    assert v[0] == pytest.approx(math.exp(-0.5), abs=1e-15)
    assert v[0] == pytest.approx(0.60653066, abs=1e-8)
    # brute-force mean photon number
    nbar = sum(k * abs(v[k]) ** 2 for k in range(21))
    assert nbar == pytest.approx(1.0, abs=1e-12)


def test_coherent_state_truncation_warning():
    with pytest.warns(TruncationWarning):
        coherent_state(3.0, 8)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        coherent_state(1.0, 32)


def test_coherent_convergence_under_doubling():
    alpha = 0.9 - 0.4j
    small, big = coherent_state(alpha, 32), coherent_state(alpha, 64)
    assert np.max(np.abs(small - big[:33])) < 1e-12


def test_displacement_identity_and_vacuum():
    np.testing.assert_allclose(displacement(0, 8), np.eye(9), atol=1e-15)
    alpha, n_max = 0.7 + 0.3j, 30
    moved = displacement(alpha, n_max) @ fock_state(0, n_max)
    exact = coherent_state(alpha, n_max)
    half = n_max // 2 + 1
    assert np.max(np.abs(moved[:half] - exact[:half])) < 1e-10


def test_displacement_inverse():
    alpha, n_max = 0.7 + 0.3j, 30
    prod = displacement(alpha, n_max) @ displacement(-alpha, n_max)
    half = n_max // 2 + 1
    np.testing.assert_allclose(prod[:half, :half], np.eye(half), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(re=st.floats(-1.5, 1.5), im=st.floats(-1.5, 1.5))
def test_displacement_unitary_on_low_levels(re, im):
    alpha, n_max = complex(re, im), 32
    D = displacement(alpha, n_max)
    keep = n_max - math.ceil(4 * abs(alpha) ** 2) + 1
    if keep <= 0:
        return
    err = D.conj().T @ D - np.eye(n_max + 1)
    assert np.linalg.norm(err[:keep, :keep]) < 1e-8


def test_matrix_utilities(rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert trace(np.eye(4)) == 4
    assert frobenius_distance(m, m) == 0
    np.testing.assert_array_equal(adjoint(adjoint(m)), m)
    assert frobenius_distance(m, np.zeros((4, 4))) == pytest.approx(np.sqrt(np.sum(np.abs(m) ** 2)))
    with pytest.raises(ValueError):
        frobenius_distance(m, np.eye(3))
    with pytest.raises(ValueError):
        trace(np.ones((2, 3)))


@pytest.mark.parametrize("c", [0, 0.3, -0.2 + 0.5j, 2.0j])
def test_nilpotent_exponentials_match_expm(c):
    a = annihilation(10)
    np.testing.assert_allclose(nilpotent_exp_raise(c, 10), expm(c * a.conj().T), atol=1e-12)
    np.testing.assert_allclose(nilpotent_exp_lower(c, 10), expm(c * a), atol=1e-12)
