import math
import re
from collections import OrderedDict

import pytest

from cburgers.colehopf import forward
from cburgers.heatfield import HeatField
from cburgers.scenario import Scenario, bump

TWO_PI = 2.0 * math.pi


def scen(*prims, label=""):
    return Scenario(tuple(prims), label)


@pytest.fixture(scope="session")
def prop22():
    # blow-up family u0 = -i phi with int phi = 2 pi + delta/2, delta = 0.5
    return scen(bump(0.0, 1.0, -1j * (TWO_PI + 0.25)), label="prop22")


@pytest.fixture(scope="session")
def prop22_field(prop22):
    return HeatField(forward(prop22))


@pytest.fixture(scope="session")
def boundary_I0():
    return scen(bump(0.0, 1.0, 1j * TWO_PI), label="boundary-I0")


@pytest.fixture(scope="session")
def boundary_I1():
    return scen(bump(0.0, 1.0, 1.0 + 1j * TWO_PI), label="boundary-I1")


# -- acceptance summary ------------------------------------------------
_results = OrderedDict()
_CRIT = re.compile(r"test_c(\d+)_")


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    m = _CRIT.match(name)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        ok = report.outcome == "passed" and not hasattr(report, "wasxfail")
        _results.setdefault(int(m.group(1)), []).append((name, ok))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_results):
        parts = _results[k]
        verdict = "PASS" if all(ok for _, ok in parts) else "FAIL"
        tr.write_line(f"criterion {k:2d}: {verdict}")
        for name, ok in parts:
            tr.write_line(f"    {'ok  ' if ok else 'FAIL'} {name}")
