import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from irshard import ArrayGeometry, Direction, SystemParams  # noqa: E402

LAM = 1.0
HALF = LAM / 2
AREA = HALF * HALF


def fig1_params(**kw):
    base = dict(
        alpha_d=1 / AREA,
        alpha_s=1 / AREA,
        alpha_r=1 / AREA,
        kappa_r=1.0,
        rho=1.0,
        area_tx_element=AREA,
        area_irs_element=AREA,
        aoa_irs=Direction(math.pi / 6, math.pi / 3),
        aod_irs=Direction(math.pi / 8, 2 * math.pi / 3),
        aod_tx=Direction(math.pi / 7, math.pi / 5),
    )
    base.update(kw)
    return SystemParams(**base)


@pytest.fixture
def params():
    return fig1_params()


@pytest.fixture
def tx():
    return ArrayGeometry(2, 2, HALF, HALF, LAM)


@pytest.fixture
def irs():
    return ArrayGeometry(8, 32, HALF, HALF, LAM)


@pytest.fixture
def rng():
    return np.random.default_rng(20220601)


# -- acceptance summary -------------------------------------------------------------
# Tests tag themselves with record_property("criterion", ...) and optionally
# record_property("measured", ...); one line per criterion is printed at the end.

_criteria = []


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _criteria.append((props["criterion"], report.outcome, props.get("measured", "")))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome, measured in _criteria:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}" + (f"  [{measured}]" if measured else ""))
