import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("qhgeo", max_examples=60, deadline=None)
settings.load_profile("qhgeo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_unit_imag(rng):
    v = rng.normal(size=3)
    return np.concatenate(([0.0], v / np.linalg.norm(v)))


def random_ball_point(rng, rmax=0.9):
    v = rng.normal(size=4)
    return v / np.linalg.norm(v) * rmax * rng.random() ** 0.25


def slice_complex(q, unit):
    """Complex coordinate of ``q`` in the slice of ``unit`` (q must lie in it)."""
    return complex(q[0], float(np.dot(q[1:], unit[1:])))


def from_complex(z, unit):
    q = z.imag * np.asarray(unit, dtype=float)
    q[0] = z.real
    return q


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
