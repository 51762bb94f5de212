"""Pytest configuration for project-level defaults."""

# Console diagnostics, run by hand.
collect_ignore = ["src/run_theorem_check.py"]


def pytest_configure(config) -> None:
    config.addinivalue_line("markers", "slow: acceptance runs over the larger orders r")
