import math
from pathlib import Path

import numpy as np
import pytest

from gratingtd.incidence import IncidentPulse
from gratingtd.medium import build_layered

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_medium():
    return build_layered([(1.0, 1.0, 1.0)], 1.0, 1.0, 0.0, 8, 4)


@pytest.fixture
def two_layer():
    return build_layered([(1.0, 1.0, 1.0), (0.5, 4.0, 1.0)], 1.0, 1.0, 0.0, 8, 8)


@pytest.fixture
def oblique_pulse():
    return IncidentPulse(order=4, sigma=0.2, delay=0.5, theta=math.pi / 3)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: dict[str, str] = {}


def record(key: str, passed: bool, runtime: float, limit: float | None, detail: str) -> str:
    pin = f" runtime={runtime:.2f}s" + (f" limit={limit:g}s" if limit is not None else "")
    line = f"criterion {key} {'pass' if passed else 'FAIL'}{pin} {detail}"
    ACCEPTANCE_LINES[key] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.rstrip("abcd")), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
