import pytest

from ncs_sched.config import load_example

import helpers


@pytest.fixture(scope="session")
def example1():
    return load_example(1)


@pytest.fixture(scope="session")
def example2():
    return load_example(2)


def pytest_terminal_summary(terminalreporter):
    if not helpers.ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, title, detail in sorted(helpers.ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {n:2d}: {title} [{detail}]")
