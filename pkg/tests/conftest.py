import math

import numpy as np
import pytest
from hypothesis import settings

from spinbath import ModelParams

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_hermitian(rng, scale=2.0):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return scale * 0.5 * (a + a.conj().T)


def random_density(rng):
    v = rng.normal(size=3)
    v *= rng.uniform() / np.linalg.norm(v)
    return 0.5 * np.array([[1 + v[2], v[0] - 1j * v[1]], [v[0] + 1j * v[1], 1 - v[2]]])


def random_model(rng, n, theta=1.0, omega_max=4.0):
    return ModelParams(rng.uniform(-2, 2, n), rng.uniform(-2, 2, n),
                       alpha=rng.uniform(-2, 2), beta=rng.uniform(-2, 2),
                       omega_drive=rng.uniform(0, omega_max), theta=theta)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


THETAS = (0.0, 1.0, math.inf)


# one line per acceptance criterion, shown in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def report_criterion(label: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
