import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.legendre import leggauss

from dispqed.drive import (DriveSpec, QuadratureError, coherence_integrals, eval_f, magnus_scalar,
                           modulated_integral, prefactor_integral, quad_complex)

GL_X, GL_W = leggauss(80)


def gl(fn, a, b):
    """Independent Gauss-Legendre reference."""
    s = a + (GL_X + 1) * (b - a) / 2
    return np.sum(GL_W * (b - a) / 2 * np.array([fn(x) for x in s]))


def test_eval_f_kinds():
    assert eval_f(DriveSpec("constant", 0.1), 7.3) == 0.1
    assert eval_f(DriveSpec("exponential", 1.0, kappa=-0.5), 2.0) == pytest.approx(0.367879, abs=1e-6)
    assert eval_f(DriveSpec("sinusoid", 1.0, omega=np.pi), 1.0) == pytest.approx(-1.0)
    samp = DriveSpec("samples", times=(0.0, 1.0, 2.0), values=(0.0, 1.0j, 1.0))
    assert eval_f(samp, 0.5) == pytest.approx(0.5j)
    assert eval_f(samp, 1.5) == pytest.approx(0.5 + 0.5j)
    with pytest.raises(ValueError):
        eval_f(samp, 2.5)


def test_sample_validation():
    with pytest.raises(ValueError):
        DriveSpec("samples", times=(0.0, 0.0, 1.0), values=(1, 2, 3))
    with pytest.raises(ValueError):
        DriveSpec("samples", times=(0.0, 1.0), values=(1,))
    with pytest.raises(ValueError):
        DriveSpec("ramp", 1.0)


def test_modulated_integral_examples():
    assert modulated_integral(DriveSpec.zero(), 0.3 + 1j, 2.0) == 0
    assert modulated_integral(DriveSpec("constant", 0.2 - 0.1j), 0.0, 3.0) == pytest.approx(0.6 - 0.3j)
    # frozen from an 80-point Gauss-Legendre evaluation
    got = modulated_integral(DriveSpec("constant", 1.0), 0.5 + 1j, 1.0)
    assert got == pytest.approx(1.0662040507810617 + 0.6422941210974027j, abs=1e-12)
    with pytest.raises(ValueError):
        modulated_integral(DriveSpec("constant", 1.0), 0.0, -1.0)


DRIVES = [
    DriveSpec("constant", 0.3 - 0.2j),
    DriveSpec("exponential", 0.1 + 0.05j, kappa=-0.4 + 0.7j),
    DriveSpec("sinusoid", 0.2j, omega=1.3, phase=0.4),
    DriveSpec("samples", times=(0.0, 0.5, 1.2, 3.0), values=(0.1, 0.3j, -0.2 + 0.1j, 0.05)),
]


@pytest.mark.parametrize("spec", DRIVES, ids=lambda s: s.kind)
@pytest.mark.parametrize("conj", [False, True])
def test_modulated_integral_vs_gauss_legendre(spec, conj):
    mu, t = 0.05 + 1.2j, 2.7

    def g(s):
        v = eval_f(spec, s)
        return (np.conj(v) if conj else v) * np.exp(mu * s)

    if spec.kind == "samples":
        ref = sum(gl(g, a, b) for a, b in [(0, 0.5), (0.5, 1.2), (1.2, 2.7)])
    else:
        ref = gl(g, 0, t)
    assert modulated_integral(spec, mu, t, conjugate_f=conj) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("spec", DRIVES[:2], ids=lambda s: s.kind)
def test_closed_form_matches_quadrature_path(spec):
    for mu in (0.0, 0.5 + 1j, -0.3 - 2j, 1e-9j):
        for t in (0.1, 1.0, 4.0):
            closed = modulated_integral(spec, mu, t)
            quad = modulated_integral(spec, mu, t, method="quad")
            assert abs(closed - quad) < 1e-10


@settings(max_examples=40, deadline=None)
@given(t1=st.floats(0.0, 2.0), t2=st.floats(0.0, 2.0), mu_re=st.floats(-1, 1), mu_im=st.floats(-3, 3),
       which=st.sampled_from(range(len(DRIVES))))
def test_additivity(t1, t2, mu_re, mu_im, which):
    spec, mu = DRIVES[which], complex(mu_re, mu_im)
    t1, t2 = sorted((t1, t2))
    whole = modulated_integral(spec, mu, t2)
    head = modulated_integral(spec, mu, t1)
    tail = quad_complex(lambda s: eval_f(spec, s) * np.exp(mu * s), t1, t2) if t2 > t1 else 0
    assert abs(whole - head - tail) < 1e-10


@pytest.mark.parametrize("spec", [DriveSpec("constant", 0.4), DriveSpec("sinusoid", 0.3, omega=2.0),
                                  DriveSpec("exponential", 0.2, kappa=-0.3)], ids=lambda s: s.kind)
def test_conjugation_symmetry_for_real_drive(spec):
    mu, t = 0.2 - 0.9j, 1.7
    lhs = modulated_integral(spec, mu, t, conjugate_f=True)
    rhs = np.conj(modulated_integral(spec, np.conj(mu), t))
    assert abs(lhs - rhs) < 1e-12


def test_quadrature_error_raised():
    with pytest.raises(QuadratureError):
        quad_complex(lambda s: np.sign(np.sin(1e4 * s)), 0.0, 1.0, tol=1e-14)


def test_prefactor_zero_cases():
    assert prefactor_integral(DriveSpec.zero(), 1.0, 0.1, 0.2, 2.0) == 0
    # chi = 0 makes 1 - gamma/beta vanish, so F2 = F3 = 0
    assert prefactor_integral(DriveSpec("constant", 0.3), 1.0, 0.1, 0.0, 2.0) == 0
    with pytest.raises(ValueError):
        prefactor_integral(DriveSpec("constant", 0.3), 1.0, 0.0, 0.0, 2.0)


def test_prefactor_gamma_zero_vs_nested_quadrature():
    # frozen from nested 80-point Gauss-Legendre sums (f0=0.1, chi=0.2, nu=1, t=1)
    got = prefactor_integral(DriveSpec("constant", 0.1), 1.0, 0.0, 0.2, 1.0)
    assert abs(got - (0.00916702881591808 - 0.000569528601088194j)) < 1e-8


def _nested_prefactor(spec, nu, gamma, chi, t, beta):
    k = 1 - gamma / beta

    def fnu(s):
        return eval_f(spec, s) * np.exp(1j * nu * s)

    def h(s):
        g1 = gl(lambda u: fnu(u) * np.exp(beta * u), 0, s)
        g4 = gl(lambda u: np.conj(fnu(u)) * np.exp(beta * u), 0, s)
        return k * np.conj(fnu(s)) * np.exp(-beta * s) * g1 + k * fnu(s) * np.exp(-beta * s) * g4

    return gl(h, 0, t)


@pytest.mark.parametrize("spec", DRIVES[:3], ids=lambda s: s.kind)
@pytest.mark.parametrize("chi,gamma", [(0.2, 0.05), (1.0, 0.2), (-0.5, 0.0)])
def test_prefactor_vs_nested_reference(spec, chi, gamma):
    nu, t = 1.0, 1.8
    beta = complex(gamma, chi)
    ref = _nested_prefactor(spec, nu, gamma, chi, t, beta)
    assert abs(prefactor_integral(spec, nu, gamma, chi, t) - ref) < 1e-10
    ref_c = _nested_prefactor(spec, nu, gamma, chi, t, np.conj(beta))
    assert abs(prefactor_integral(spec, nu, gamma, chi, t, beta=np.conj(beta)) - ref_c) < 1e-10


@pytest.mark.parametrize("spec", DRIVES, ids=lambda s: s.kind)
def test_magnus_scalar_equals_negative_prefactor(spec):
    nu, gamma, chi, t = 1.0, 0.05, 0.2, 2.0
    assert abs(magnus_scalar(spec, nu, gamma, chi, t) + prefactor_integral(spec, nu, gamma, chi, t)) < 1e-9


def test_prefactor_degenerate_rate_uses_quadrature():
    # kappa + i nu + beta = 0 makes the closed form singular
    gamma, chi, nu = 0.1, 0.3, 0.5
    spec = DriveSpec("exponential", 0.2, kappa=-gamma - 1j * (chi + nu))
    ref = _nested_prefactor(spec, nu, gamma, chi, 1.5, complex(gamma, chi))
    assert abs(prefactor_integral(spec, nu, gamma, chi, 1.5) - ref) < 1e-10


def test_coherence_integrals_definite():
    g = coherence_integrals(DriveSpec("constant", 0.1), 1.0, 0.05, 0.05 + 0.2j, 0.0)
    assert g == (0, 0, 0, 0)


def test_shifted_clock():
    nu = 0.8
    for spec in DRIVES:
        sh = spec.shifted(0.4, nu)
        for s in (0.0, 0.3, 1.1):
            lhs = eval_f(sh, s) * np.exp(1j * nu * s)
            rhs = eval_f(spec, s + 0.4) * np.exp(1j * nu * (s + 0.4))
            assert lhs == pytest.approx(rhs, abs=1e-14)
