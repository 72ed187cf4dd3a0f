from pathlib import Path

import numpy as np
import pytest

from reps.problem import RepsConfig, build_problem
from reps.ranking import compute_ranks

DATA = Path(__file__).parent / "data"

# four points, two classes; each point's nearest neighbor shares its class
WORKED_D = np.array(
    [
        [0.0, 1.0, 4.0, 5.0],
        [1.0, 0.0, 3.0, 6.0],
        [4.0, 3.0, 0.0, 2.0],
        [5.0, 6.0, 2.0, 0.0],
    ]
)
WORKED_LABELS = np.array([0, 0, 1, 1])
WORKED_RANKS = np.array(
    [
        [0, 1, 2, 3],
        [1, 0, 2, 3],
        [3, 2, 0, 1],
        [2, 3, 1, 0],
    ]
)


@pytest.fixture
def worked():
    return WORKED_D.copy(), WORKED_LABELS.copy()


@pytest.fixture
def data_dir():
    return DATA


def random_points(rng, n, d=2, classes=2):
    """Gaussian blobs with at least one member per class."""
    labels = np.arange(n) % classes
    rng.shuffle(labels)
    centers = rng.normal(scale=2.0, size=(classes, d))
    X = centers[labels] + rng.normal(size=(n, d))
    return X, labels


def distances(X):
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def random_problem(rng, n, C=1.0, beta=2.0, **kw):
    X, labels = random_points(rng, n, d=int(rng.integers(1, 4)), classes=int(rng.integers(2, 4)))
    D = distances(X)
    config = RepsConfig(beta=beta, C=C, **kw)
    return build_problem(compute_ranks(D), labels, config)


# acceptance criteria report one line each; printed after the run
ACCEPTANCE = {}


def record_criterion(number, title, ok, detail):
    ACCEPTANCE[number] = (title, bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}: {detail}")
