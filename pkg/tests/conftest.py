import pytest

from transduct import _backend, kernels


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    """Run a test under each backend, with numba used even for tiny inputs."""
    _backend.set_backend(request.param)
    monkeypatch.setattr(kernels, "NUMBA_MIN_WORK", 0)
    yield request.param
    _backend.set_backend(None)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
