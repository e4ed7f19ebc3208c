import numpy as np
import pytest

from hardcore.graph import BoundaryCondition, Graph


def random_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.shape[0]) < p
    return Graph(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def random_boundary(rng: np.random.Generator, G: Graph, frac: float = 0.3, avoid=()) -> BoundaryCondition:
    """Random partial independent set, never touching ``avoid``."""
    occ, unocc = set(), set()
    for v in rng.permutation(G.n).tolist():
        if v in avoid or rng.random() > frac:
            continue
        if rng.random() < 0.5 and not any(u in occ for u in G.adjacency[v]):
            occ.add(v)
        else:
            unocc.add(v)
    return BoundaryCondition.of(occ, unocc)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance reporting: one pass/fail line per criterion ----------------------

_criteria: dict[int, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    _criteria[number] = ("PASS" if rep.passed else "FAIL", title, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        status, title, secs = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}  ({secs:.1f} s)")
