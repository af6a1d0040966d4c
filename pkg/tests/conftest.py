import pytest

from isse.scenario_io import bundled_scenario, load_scenario

FIXTURES = ("tiny", "combi", "mid", "reentrant")


@pytest.fixture(scope="session")
def scenarios():
    return {name: load_scenario(bundled_scenario(name)) for name in FIXTURES}


@pytest.fixture(scope="session")
def tiny(scenarios):
    return scenarios["tiny"]


# acceptance outcomes, echoed in the terminal summary
ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record and print one pass/fail line, then fail the test if needed."""

    def check(name: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        ACCEPTANCE.append((name, ok, detail))
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
