import numpy as np
import pytest

from qipflow import _kernels


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, n=4):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (g + g.conj().T)


def random_unitary(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


JACOBI_IMPLS = [pytest.param(_kernels.jacobi_eigh_numpy, id="numpy")]
VOLTERRA_IMPLS = [pytest.param(_kernels.volterra_numpy, id="numpy")]
OHMIC_IMPLS = [pytest.param(_kernels.ohmic_cumulative_numpy, id="numpy")]
if _kernels.numba is not None:
    JACOBI_IMPLS.append(pytest.param(_kernels.jacobi_eigh_numba, id="numba"))
    VOLTERRA_IMPLS.append(pytest.param(_kernels.volterra_numba, id="numba"))
    OHMIC_IMPLS.append(pytest.param(_kernels.ohmic_cumulative_numba, id="numba"))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
