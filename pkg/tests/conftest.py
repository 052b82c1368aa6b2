import functools

import pytest

from gkdv_stability import gradients, reconstruct_profile

from _params import make

_ACCEPTANCE_LINES = {}


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    _ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(_ACCEPTANCE_LINES[n])


@functools.lru_cache(maxsize=None)
def wave_bundle(p, a, E, c=1.0, nodes=512):
    """(params, gradients, profile with variational data), cached across tests."""
    params = make(p, a, E, c)
    g = gradients(params)
    prof = reconstruct_profile(params, nodes, with_variational=True, conserved=g.values)
    return params, g, prof


@pytest.fixture(scope="session")
def kdv():
    return wave_bundle(1, 0.0, -0.1)


@pytest.fixture(scope="session")
def p5_long():
    return wave_bundle(5, 0.0, -1e-4)
