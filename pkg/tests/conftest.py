import numpy as np
import pytest

from wuhan_qsdc import _kernels_py
from wuhan_qsdc import statevec as sv

try:
    from wuhan_qsdc import _kernels as _compiled
except ImportError:
    _compiled = None


@pytest.fixture(params=["compiled", "python"])
def backend(request, monkeypatch):
    """Run the test once per kernel backend."""
    if request.param == "compiled":
        if _compiled is None:
            pytest.skip("compiled kernels not built")
        monkeypatch.setattr(sv, "kernels", _compiled)
    else:
        monkeypatch.setattr(sv, "kernels", _kernels_py)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20071118)


_verdicts: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for the acceptance summary, then assert."""
    def record(label: str, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        _verdicts.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _verdicts:
        terminalreporter.section("acceptance criteria")
        for line in _verdicts:
            terminalreporter.write_line(line)
