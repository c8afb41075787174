import numpy as np
import pytest

from cnctuples import corpus
from cnctuples.tuples import validate

FIXTURES = __import__("pathlib").Path(__file__).parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


def scalar(t):
    return validate(np.array([[[t]]], dtype=complex))


def nilpotent_fixtures(count=6, seed=11):
    """Seeded jointly nilpotent tuples, n in {1, 2, 3}, d in {2, 3, 4}."""
    rng = np.random.default_rng(seed)
    shapes = [(1, 3), (2, 2), (2, 3), (3, 2), (2, 4), (1, 4)]
    return [corpus.nilpotent_tuple(rng, n, d) for n, d in shapes[:count]]


def random_fixtures(count=10, seed=5):
    rng = np.random.default_rng(seed)
    return [corpus.random_tuple(rng, 1 + k % 3, 1 + k % 5) for k in range(count)]


def random_point(rng, n, radius=0.9):
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z / np.linalg.norm(z) * radius * rng.random() ** (1 / (2 * n))


# one summary line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
