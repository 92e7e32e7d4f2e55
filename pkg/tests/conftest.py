import pytest

from wsingular.mesh import Ellipsoid, build_surface, triangulate_sphere


@pytest.fixture(scope="session")
def sphere_2320():
    return triangulate_sphere(40, 30)


@pytest.fixture(scope="session")
def spheroid_2320():
    return build_surface(Ellipsoid(1.0, 1.0, 0.5), 40, 30)


@pytest.fixture(scope="session")
def small_spheroid():
    return build_surface(Ellipsoid(1.0, 1.0, 0.5), 16, 10)


_VERDICTS = []


@pytest.fixture
def verdict():
    """Print one PASS/FAIL line for an acceptance criterion and assert it."""

    def record(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        print(line)
        _VERDICTS.append(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
