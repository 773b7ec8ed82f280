import numpy as np
import pytest


def random_spd(rng, p, cond_floor=0.5):
    """Well-conditioned random SPD matrix: A A'/p + cond_floor * I."""
    A = rng.standard_normal((p, p))
    return A @ A.T / p + cond_floor * np.eye(p)


def random_cov(rng, p, n):
    """Empirical (1/n) covariance of n Gaussian draws with a random correlation."""
    L = np.linalg.cholesky(random_spd(rng, p))
    X = rng.standard_normal((n, p)) @ L.T
    X -= X.mean(axis=0)
    S = X.T @ X / n
    return 0.5 * (S + S.T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
