import numpy as np
import pytest

from kernlin import _backend
from kernlin.data import Dataset, SparseVector


def random_vector(rng, dim=20, density=0.5, scale=1.0):
    """Nonnegative sparse vector with at least one nonzero."""
    x = scale * rng.random(dim) * (rng.random(dim) < density)
    if not x.any():
        x[rng.integers(dim)] = scale * (0.1 + rng.random())
    return SparseVector.from_dense(x)


def random_dataset(rng, n=10, dim=20, density=0.5, n_classes=2):
    rows = [random_vector(rng, dim, density) for _ in range(n)]
    labels = [int(c) for c in rng.integers(0, n_classes, n)]
    return Dataset(dim, labels, rows)


def _backends():
    names = ["python"]
    try:
        _backend.load("cython")
        names.append("cython")
    except ImportError:
        pass
    return names


BACKENDS = _backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    return _backend.load(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str) -> bool:
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
