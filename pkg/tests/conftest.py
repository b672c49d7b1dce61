from functools import lru_cache
from importlib import resources
from pathlib import Path

import pytest

from nzgeom import geometry, triangulation
from nzgeom.dilogarithm import PrecisionContext

FIXTURES = ("fig8", "sister", "whitehead")


def fixture_path(name) -> Path:
    return Path(str(resources.files("nzgeom") / "fixtures" / f"{name}.tri"))


@lru_cache(maxsize=None)
def load(name):
    T = triangulation.load_triangulation(fixture_path(name))
    return T, triangulation.derive_edge_matrices(T)


@lru_cache(maxsize=None)
def solved(name, digits=30):
    _, G = load(name)
    return geometry.solve_complete(G, ctx=PrecisionContext(digits))


@pytest.fixture(params=FIXTURES)
def fixture_name(request):
    return request.param


@pytest.fixture(autouse=True)
def high_precision():
    """Do test-side mpmath arithmetic well above the library precisions."""
    import mpmath

    with mpmath.workdps(50):
        yield


# acceptance verdicts, filled by test_acceptance and printed at the end
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, desc = ACCEPTANCE[n]
        terminalreporter.write_line(f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {desc}")
