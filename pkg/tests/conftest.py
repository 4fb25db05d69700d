import numpy as np
import pytest

from steerlab.canonical import canonicalize
from steerlab.criterion import CERTIFIED, evaluate_criterion


def random_state(rng, rank=4):
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, dim=2):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_direction(rng, n=None):
    v = rng.normal(size=(3,) if n is None else (n, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def certified_states(rng, count, noise=0.6):
    """Canonical states passing the criterion, from random states mixed with white noise."""
    out = []
    while len(out) < count:
        rho = (1 - noise) * random_state(rng) + noise * np.eye(4) / 4
        state = canonicalize(rho).canonical
        if evaluate_criterion(state, grid_n=2000).verdict == CERTIFIED:
            out.append(state)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
