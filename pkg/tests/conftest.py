import pytest

from metareactor.circuit import CoilSpec
from metareactor.effmed import Uniform
from metareactor.emfield import SusceptorSpec


@pytest.fixture
def lab_coil():
    # 7 turns of 6 mm copper tube, 48 mm coil diameter, 150 mm long
    return CoilSpec(turns_N=7, coil_radius_Rc=0.024, half_length_Lc=0.075,
                    conductor_radius_ac=0.003, pitch_p=0.0375)


@pytest.fixture
def lab_susceptor():
    return SusceptorSpec(0.019, 0.150, Uniform(400.0))


# one line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
