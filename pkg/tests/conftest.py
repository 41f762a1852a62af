import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from density_fingerprint import lattice as lat

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_set(rng, dim, max_motif=4, min_gap=0.05):
    """Random lattice with a well-separated random motif."""
    while True:
        basis = np.eye(dim) + rng.uniform(-0.35, 0.35, size=(dim, dim))
        if abs(np.linalg.det(basis)) < 0.4:
            continue
        n = int(rng.integers(1, max_motif + 1))
        motif = rng.random((n, dim))
        try:
            pset = lat.PeriodicSet(lat.Lattice(basis), motif)
        except ValueError:
            continue
        if lat.packing_radius(pset) >= min_gap / 2:
            return pset


def random_rotation(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    q = q * np.sign(np.diag(r))
    if rng.random() < 0.5:
        q[:, 0] = -q[:, 0]  # include reflections
    return q


@pytest.fixture
def z2():
    return lat.periodic_set([[1, 0], [0, 1]], [[0, 0]])


@pytest.fixture
def z1():
    return lat.periodic_set([[1]], [[0]])


@pytest.fixture
def z3():
    return lat.periodic_set(np.eye(3), [[0, 0, 0]])


@pytest.fixture
def hexagonal():
    return lat.PeriodicSet(lat.hexagonal_lattice(1.0), [[0, 0]])


def pytest_terminal_summary(terminalreporter):
    from _acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        status, detail = RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status} - {detail}")
