import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def lp_profile():
    from collapse_lab.acceptance import _lp_profile

    return _lp_profile()[0]


@pytest.fixture(scope="session")
def rel_profile():
    from collapse_lab.relativistic.params import EpsParams
    from collapse_lab.relativistic.shooting import assemble_rel

    return assemble_rel(EpsParams(0.01))


@pytest.fixture(scope="session")
def comoving(rel_profile):
    from collapse_lab.relativistic.comoving import reconstruct_comoving

    return reconstruct_comoving(rel_profile)


@pytest.fixture(scope="session")
def extension(comoving):
    from collapse_lab.relativistic.extension import extend_upper

    return extend_upper(comoving)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
