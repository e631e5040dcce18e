import pytest
from hypothesis import HealthCheck, settings

from expcodes.soundness import TALLY

settings.register_profile(
    "suite", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.addinivalue_line("markers", "unsound_ok: the test deliberately trips a soundness check")
    config.stash[ACCEPTANCE_LINES] = []


def pytest_collection_modifyitems(items):
    # acceptance runs last so the suite-wide soundness tally is complete when it is read
    items.sort(key=lambda item: item.module.__name__.endswith("test_acceptance"))


@pytest.fixture
def acceptance_line(request):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash[ACCEPTANCE_LINES]

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


@pytest.fixture(autouse=True)
def soundness_guard(request):
    """Fail any test during which a decoder was caught returning a bad word."""
    before = TALLY.violations
    yield
    if request.node.get_closest_marker("unsound_ok"):
        TALLY.violations = before
    else:
        assert TALLY.violations == before, "a decoder returned a word outside the code or radius"


def pytest_terminal_summary(terminalreporter, config):
    for line in config.stash[ACCEPTANCE_LINES]:
        terminalreporter.write_line(line)
    terminalreporter.write_line(
        f"soundness checks: {TALLY.checked} returned words certified, {TALLY.violations} violations"
    )
