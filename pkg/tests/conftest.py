import numpy as np
import pytest

from ttr1svd.tensor import DenseTensor, inverse_sum_tensor, running_example


def random_ensemble(count=50, seed=1234):
    """Seeded Gaussian tensors of order 2..4 with shapes up to 5 x 4 x 3 x 2."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = int(rng.integers(2, 5))
        dims = [int(rng.integers(1, m + 1)) for m in (5, 4, 3, 2)[:d]]
        dims[0] = max(dims[0], 2)
        out.append(DenseTensor(rng.standard_normal(dims)))
    return out


@pytest.fixture(scope="session")
def A():
    return running_example()


@pytest.fixture(scope="session")
def ex6():
    return inverse_sum_tensor(5)


@pytest.fixture(scope="session")
def ensemble():
    return random_ensemble()


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
