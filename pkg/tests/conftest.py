import numpy as np
import pytest

from carnot_paths.core import CarnotStructure, J2, heisenberg


def block_diag_rot(coeffs, Q=None):
    """Skew matrix acting as coeffs[i] * J2 on the i-th coordinate plane (rotated by Q)."""
    m = len(coeffs)
    d = 2 * m if Q is None else Q.shape[0]
    M = np.zeros((d, d))
    for i, c in enumerate(coeffs):
        M[2 * i:2 * i + 2, 2 * i:2 * i + 2] = c * J2
    return M if Q is None else Q @ M @ Q.T


def random_structure(rng, d, l):
    while True:
        B = rng.standard_normal((l, d, d))
        try:
            return CarnotStructure.from_list(B - B.transpose(0, 2, 1))
        except ValueError:
            continue


def random_commuting(rng, d):
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    v = rng.standard_normal((2, d // 2))
    return CarnotStructure.from_list([block_diag_rot(v[0], Q), block_diag_rot(v[1], Q)])


@pytest.fixture
def heis():
    return heisenberg()


@pytest.fixture
def commuting():
    return CarnotStructure.from_list([block_diag_rot([1.0, 2.0]), block_diag_rot([2.0, 1.0])])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance reporting ------------------------------------------------

ACCEPTANCE: dict = {}


@pytest.fixture
def report():
    """report(k, ok, detail): record and print the verdict of acceptance criterion k."""

    def _report(k: int, ok: bool, detail: str):
        line = f"criterion {k}: {'PASS' if ok else 'FAIL'} ({detail})"
        ACCEPTANCE[k] = line
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
