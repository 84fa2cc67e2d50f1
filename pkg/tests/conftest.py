import numpy as np
import pytest

from oscturnpike import beam, model, spectral


def toy_system(n: int) -> model.OscillatorSystem:
    """Mild synthetic chain omega_k = k, b_k = 1/k (positive gaps, decaying gains)."""
    k = np.arange(1, n + 1, dtype=float)
    return model.OscillatorSystem(k, 1.0 / k)


@pytest.fixture(scope="session")
def beam_sys_100():
    return beam.build_system(100)


@pytest.fixture(scope="session")
def beam_sys_200():
    return beam.build_system(200)


@pytest.fixture(scope="session")
def beam_quads_100(beam_sys_100):
    return spectral.spectrum(beam_sys_100)


@pytest.fixture(scope="session")
def beam_quads_200(beam_sys_200):
    return spectral.spectrum(beam_sys_200)


@pytest.fixture(scope="session")
def riesz_family_200(beam_sys_200, beam_quads_200):
    return spectral.build_riesz_family(beam_sys_200, beam_quads_200, rho=1.4)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
