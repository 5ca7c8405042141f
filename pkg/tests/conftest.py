"""Shared fixtures and the acceptance summary printer."""

import numpy as np
import pytest
from hypothesis import settings

from qitesim import kernels, qite
from qitesim.hamiltonian import maxcut_hamiltonian, named_graph, petersen
from qitesim.pools import DomainSpec

settings.register_profile("default", deadline=None, print_blob=True)
settings.load_profile("default")

_CRITERIA: dict[int, dict] = {}


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request):
    """Each available kernel module in turn (compiled and numpy)."""
    return kernels.available_backends()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def petersen_h():
    return maxcut_hamiltonian(petersen())


@pytest.fixture(scope="session")
def k4_h():
    return maxcut_hamiltonian(named_graph("k4"))


class _RunCache:
    """Memoised trajectories, shared by every test in the session."""

    def __init__(self):
        self._store = {}

    def get(self, h, method, D, dtau, n_steps, **kw):
        kw.setdefault("keep_coefficients", False)
        key = (id(h), method, D, dtau, n_steps, tuple(sorted(kw.items())))
        if key not in self._store:
            self._store[key] = qite.run(h, DomainSpec(method, D), dtau, n_steps, **kw)
        return self._store[key]


@pytest.fixture(scope="session")
def runs():
    return _RunCache()


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, text = marker.args
    entry = _CRITERIA.setdefault(number, {"text": text, "ok": True, "ran": False})
    if call.when == "call" or call.excinfo is not None:
        entry["ran"] = True
        if call.excinfo is not None:
            entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["ok"] and e["ran"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {e['text']}")
