import numpy as np
import pytest

from topobound.mode_converter import ModeConverter, ModeConverterConfig


@pytest.fixture(scope="session")
def small_mc():
    """56 x 28 mode converter with a 5 x 5-node design region."""
    return ModeConverter(ModeConverterConfig(nx=56, ny=28, L_d=4 / 14))


@pytest.fixture(scope="session")
def tiny_mc():
    """56 x 28 mode converter with a 3 x 3-node design region."""
    return ModeConverter(ModeConverterConfig(nx=56, ny=28, L_d=2 / 14))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_CRITERIA = {}


@pytest.fixture
def criterion():
    """record(number, passed, detail) for the acceptance summary."""

    def record(number, passed, detail):
        _CRITERIA[number] = (bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
