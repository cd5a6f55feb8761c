import json
import warnings
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from qopo.liouvillian import build_liouvillian
from qopo.model import ModelParams
from qopo.steady import DensityMatrix, SolverOptions, steady_state

ORACLES = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())
G, BETA = 0.5, 0.1


@lru_cache(maxsize=None)
def _solve(h: float, F: float, n_max: int, g: float, beta: float, method: str) -> DensityMatrix:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return steady_state(build_liouvillian(ModelParams(h, g, beta, F, n_max)), SolverOptions(method=method))


def solve(h, F=0.0, n_max=40, g=G, beta=BETA, method="auto") -> DensityMatrix:
    """Cached steady state; shared by every test module in the session."""
    return _solve(float(h), float(F), int(n_max), float(g), float(beta), method)


@pytest.fixture
def vacuum40():
    rho = np.zeros((40, 40), dtype=complex)
    rho[0, 0] = 1.0
    return rho


@pytest.fixture
def oracles():
    return ORACLES


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
