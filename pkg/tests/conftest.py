import random

import pytest

from tate_transfer.instances import cyclic_over_trivial, s3_over_c3

CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[CRITERIA] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(CRITERIA, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])


@pytest.fixture
def criterion(request):
    """record(k, ok, detail): one PASS/FAIL line per acceptance criterion."""
    table = request.config.stash[CRITERIA]

    def record(k: int, ok: bool, detail: str = ""):
        line = f"criterion {k}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
        table[k] = line
        print(line)

    return record


@pytest.fixture(scope="session")
def c2():
    return cyclic_over_trivial(2, 2)


@pytest.fixture(scope="session")
def c3():
    return cyclic_over_trivial(3, 3)


@pytest.fixture(scope="session")
def s3():
    return s3_over_c3(3)


@pytest.fixture(scope="session")
def suite(c2, c3, s3):
    return [c2, c3, s3]


@pytest.fixture
def rng():
    return random.Random(20240611)
