import pytest

from tklock import corpus
from tklock.keys import KeySchedule
from tklock.structural import LockConfig, lock_structural

S27_SCHEDULE = KeySchedule(keys=(1, 3, 2, 0), width=2)
S27_SEED = 7


@pytest.fixture(scope="session")
def s27():
    return corpus.load_bench("s27")


@pytest.fixture(scope="session")
def detector():
    return corpus.load_kiss2("detector1001")


@pytest.fixture(scope="session")
def s27_locked(s27):
    """s27 locked with the reference config: 4 keys of 2 bits, schedule 1,3,2,0."""
    config = LockConfig(
        num_keys=4,
        key_bits=2,
        num_locked_ffs=1,
        seed=S27_SEED,
        explicit_schedule=S27_SCHEDULE,
    )
    locked, manifest = lock_structural(s27, config)
    return locked, manifest


_acceptance_results = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for name, value in report.user_properties:
        if name == "criterion":
            _acceptance_results.append((value, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in sorted(_acceptance_results):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{label}: {status}")
