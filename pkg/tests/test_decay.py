import math

import numpy as np
import pytest

from conftest import random_boundary, random_graph
from hardcore.decay import (
    FIXED_OCCUPIED,
    SymmetricTree,
    decay_profile,
    fit_rate,
    marginal_interval,
    recurrence_step,
    symmetric_tree_report,
)
from hardcore.exact import exact_occupation
from hardcore.graph import EMPTY_BOUNDARY, BoundaryCondition, BoundaryError, Graph, generate_gnp, path_graph, regular_tree
from hardcore.threshold import chi, lambda_c, ssm_certificate


def test_recurrence_step():
    assert recurrence_step(1, [0, 0]) == 1
    assert recurrence_step(4, [1, 1]) == 1
    assert recurrence_step(2.5, [0.3, FIXED_OCCUPIED, 1.0]) == 0.0
    assert recurrence_step(3, []) == 3
    for bad in (-0.1, math.inf, math.nan):
        with pytest.raises(ValueError):
            recurrence_step(1, [bad])


def test_interval_edge():
    iv = marginal_interval(path_graph(2), 0, EMPTY_BOUNDARY, 1, 1.0)
    assert (iv.lower, iv.upper) == (0.0, 1.0)
    assert iv.contains(0.5)


def test_interval_occupied_neighbor(rng):
    for _ in range(10):
        G = random_graph(rng, 10, 0.4)
        v = int(rng.integers(G.n))
        if not G.adjacency[v]:
            continue
        sigma = BoundaryCondition.of([G.adjacency[v][0]])
        iv = marginal_interval(G, v, sigma, 3, 1.7)
        assert (iv.lower, iv.upper) == (0.0, 0.0)


def test_interval_errors():
    with pytest.raises(BoundaryError):
        marginal_interval(path_graph(2), 0, BoundaryCondition.of([0]), 2, 1.0)
    with pytest.raises(ValueError):
        marginal_interval(path_graph(2), 0, EMPTY_BOUNDARY, 0, 1.0)


def test_sandwich_gnp():
    for seed in range(100):
        G = generate_gnp(20, 3, seed)
        exact = exact_occupation(G, EMPTY_BOUNDARY, 0, 0.8).R_v
        iv = marginal_interval(G, 0, EMPTY_BOUNDARY, 6, 0.8)
        assert iv.contains(exact, tol=1e-12)


def test_sandwich_random_boundaries(rng):
    for _ in range(100):
        n = int(rng.integers(2, 21))
        G = random_graph(rng, n, float(rng.uniform(0.1, 0.35)))
        v = int(rng.integers(n))
        sigma = random_boundary(rng, G, 0.25, avoid={v})
        lam = float(rng.uniform(0.3, 3))
        exact = exact_occupation(G, sigma, v, lam).R_v
        for depth in (1, 2, 3, 5, 8):
            iv = marginal_interval(G, v, sigma, depth, lam)
            assert 0 <= iv.lower <= iv.upper <= lam
            assert iv.contains(exact, tol=1e-12)


def test_full_depth_collapses(rng):
    for _ in range(40):
        n = int(rng.integers(1, 13))
        G = random_graph(rng, n, 0.4)
        sigma = random_boundary(rng, G, 0.2, avoid={0})
        iv = marginal_interval(G, 0, sigma, n, 1.1)
        assert iv.width == 0
        assert iv.lower == pytest.approx(exact_occupation(G, sigma, 0, 1.1).R_v, rel=1e-10, abs=1e-12)


def test_symmetric_tree_matches_explicit_tree():
    ar = (2, 3, 1, 2, 3)
    # spell the tree out level by level and evaluate it as a graph
    edges, frontier, nxt = [], [0], 1
    for a in ar:
        new = []
        for u in frontier:
            for _ in range(a):
                edges.append((u, nxt))
                new.append(nxt)
                nxt += 1
        frontier = new
    G = Graph(nxt, edges)
    for depth in range(1, 6):
        a = SymmetricTree(ar).interval(1.4, depth)
        b = marginal_interval(G, 0, EMPTY_BOUNDARY, depth, 1.4)
        assert (a.lower, a.upper) == pytest.approx((b.lower, b.upper), rel=1e-12)


def test_symmetric_report():
    r = symmetric_tree_report([3] * 6, 0.5, 6)
    assert r.delta0 == pytest.approx(3) and r.means[-1] == 1
    r = symmetric_tree_report([2, 8, 2, 8], 1.0, 4)
    assert r.delta0 == pytest.approx(4)
    assert r.log_means[0] * 4 == pytest.approx(math.log(2 * 8 * 2 * 8), abs=1e-12)
    assert r.chi == pytest.approx(chi(4, 1.0)) and r.chi < 1
    assert 1.0 < lambda_c(4) == pytest.approx(256 / 243)
    with pytest.raises(ValueError):
        symmetric_tree_report([2, 0], 1.0, 2)
    with pytest.raises(ValueError):
        symmetric_tree_report([2, 2], 1.0, 3)


def test_alternating_tree_decays():
    ar = [2, 8] * 20
    widths = [symmetric_tree_report(ar, 1.0, d).width for d in range(4, 41, 4)]
    assert all(b <= a for a, b in zip(widths, widths[1:]))
    assert widths[2] < 1e-6 and widths[-1] < 1e-12


def test_profile_examples():
    assert decay_profile(Graph(1), 0, EMPTY_BOUNDARY, [1], 2.0).widths == [0.0]
    prof = decay_profile(SymmetricTree.regular(2, 30), 0, EMPTY_BOUNDARY, range(10, 31), 3.0)
    assert prof.rate < 1
    prof5 = decay_profile(SymmetricTree.regular(2, 25), 0, EMPTY_BOUNDARY, range(10, 26), 5.0)
    assert prof5.width_at(25) >= 1e-3
    lines = prof.to_csv().splitlines()
    assert lines[0] == "depth,R_minus,R_plus,width" and len(lines) == 22
    with pytest.raises(ValueError):
        decay_profile(Graph(1), 0, EMPTY_BOUNDARY, [], 1.0)
    with pytest.raises(ValueError):
        decay_profile(Graph(1), 0, EMPTY_BOUNDARY, [3, 2], 1.0)


def test_profile_graph_matches_tree():
    T = regular_tree(2, 12)
    g = decay_profile(T, 0, EMPTY_BOUNDARY, range(2, 12), 2.0)
    s = decay_profile(SymmetricTree.regular(2, 12), 0, EMPTY_BOUNDARY, range(2, 12), 2.0)
    assert g.widths == pytest.approx(s.widths, rel=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_certificate_implies_decay(d):
    for lam in np.linspace(0.2, 0.95, 4) * lambda_c(d):
        if not ssm_certificate(d, d, lam).holds:
            continue
        prof = decay_profile(SymmetricTree.regular(d, 30), 0, EMPTY_BOUNDARY, range(10, 31), float(lam))
        assert prof.rate < 1


def test_fit_rate():
    slope, rate = fit_rate([1, 2, 3], [0.5, 0.25, 0.125])
    assert rate == pytest.approx(0.5)
    assert math.isnan(fit_rate([1, 2], [0.0, 1e-20])[1])
