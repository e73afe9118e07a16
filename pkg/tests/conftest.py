import numpy as np
import pytest

from brhbc.channel import FrequencySweep, sweep_gain
from brhbc.scenario import bundled_config, load_scenario


@pytest.fixture(scope="session")
def reference():
    return load_scenario(bundled_config("reference_body.cfg"))


@pytest.fixture(scope="session")
def copper():
    return load_scenario(bundled_config("copper_cylinder.cfg"))


@pytest.fixture(scope="session")
def thick():
    return load_scenario(bundled_config("thick_cylinder.cfg"))


@pytest.fixture(scope="session")
def reference_response(reference):
    return sweep_gain(reference.channel, reference.sweep)


@pytest.fixture(scope="session")
def coarse_sweep():
    return FrequencySweep(1e5, 5e8, 256)


def db(x):
    return 20 * np.log10(np.abs(x))


ACCEPTANCE = []


def report(label, ok, detail):
    """Record one acceptance line; the lines are echoed in the terminal summary."""
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
