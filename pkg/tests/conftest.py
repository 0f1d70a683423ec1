import numpy as np
import pytest

from uavaoi import kernels
from uavaoi.scenario import make_scenario
from uavaoi.world import TaskSpec, WorldConfig


@pytest.fixture
def scenario():
    """Default parameters, seeded 5-task layout, 4000-slot horizon."""
    return make_scenario(layout_seed=0)


@pytest.fixture
def small_scenario():
    """Two nearby tasks and a short horizon: fast end-to-end runs."""
    return make_scenario(world=WorldConfig(horizon_T=2500, num_tasks_N=2),
                         tasks=[TaskSpec(1, 15.0, 5.0), TaskSpec(2, -10.0, 12.0)])


@pytest.fixture(params=["python"] + (["cython"] if kernels.compiled_backend is not None else []))
def backend(request):
    return kernels.get(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def report(capsys):
    """report(criterion, passed, detail): print and remember one PASS/FAIL line."""
    def _report(n: int, passed: bool, detail: str) -> bool:
        line = f"criterion {n}: {'PASS' if passed else 'FAIL'} - {detail}"
        _ACCEPTANCE[n] = (passed, detail)
        with capsys.disabled():
            print("\n" + line)
        return passed
    return _report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'} - {detail}")
