"""Shared fixtures and the acceptance-criterion summary hook."""

import pytest

CRITERION_RESULTS: dict[str, tuple[bool, str]] = {}


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    CRITERION_RESULTS[name] = (passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(CRITERION_RESULTS):
        passed, detail = CRITERION_RESULTS[name]
        status = "PASS" if passed else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"[{status}] {name}{suffix}")


@pytest.fixture(scope="session")
def default_config():
    from ris_sim.experiment_config import ExperimentConfig

    return ExperimentConfig()
