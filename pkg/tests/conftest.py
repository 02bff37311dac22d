import numpy as np
import pytest

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def random_block(rng, n_max, support, hermitian=False):
    """Random complex matrix with entries zeroed above Fock level ``support``."""
    rho = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    k = support + 1
    rho[:k, :k] = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    if hermitian:
        rho = rho + rho.conj().T
    return rho


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
