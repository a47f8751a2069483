import numpy as np
import pytest

from hpnfft.core import make_index_set, ndft_direct_adjoint, ndft_direct_forward

BENCH_DIMS = (16, 16, 16)
BENCH_POINTS = 4096


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm((a - b).ravel()) / np.linalg.norm(b.ravel()))


@pytest.fixture(scope="session")
def bench_instance():
    """The 3-D benchmark instance (M=4096, N=16^3) with its direct-sum references."""
    rng = np.random.default_rng(2024)
    x = rng.uniform(-0.5, 0.5, size=(BENCH_POINTS, 3))
    f = rng.uniform(size=BENCH_POINTS) + 1j * rng.uniform(size=BENCH_POINTS)
    coeffs = rng.uniform(size=BENCH_DIMS) + 1j * rng.uniform(size=BENCH_DIMS)
    iset = make_index_set(BENCH_DIMS)
    return {
        "x": x,
        "f": f,
        "coeffs": coeffs,
        "fwd": ndft_direct_forward(x, f, iset),
        "adj": ndft_direct_adjoint(coeffs, x, iset),
    }


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, title, status, detail):
    line = f"criterion {number} [{status}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
