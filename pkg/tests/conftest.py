import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("pkg", max_examples=60, deadline=None)
settings.load_profile("pkg")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda s: int(s.split("#")[1].split()[0])):
        terminalreporter.write_line(line)
