"""Exact hard-core partition functions and marginals for small graphs.

The main route is the deletion recursion ``Z(G) = Z(G-v) + lam*Z(G-N[v])``
pivoting on a maximum-degree vertex, with connected components solved
separately and memoized by vertex bitmask.  ``brute_force_log_partition``
enumerates subsets directly and serves as an independent cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import (
    BoundaryCondition,
    BoundaryError,
    Graph,
    Spin,
    check_activity,
    reduce_by_boundary,
)

DEFAULT_SIZE_LIMIT = 40


class SizeGuardError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExactResult:
    log_Z: float
    p_v: float | None = None
    R_v: float | None = None


def _logaddexp(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


class _Solver:
    def __init__(self, G: Graph, lam: float):
        self.nbr = [sum(1 << w for w in row) for row in G.adjacency]
        self.log_lam = math.log(lam)
        self.memo: dict[int, float] = {0: 0.0}

    def components(self, mask: int) -> list[int]:
        comps = []
        nbr = self.nbr
        while mask:
            low = mask & -mask
            comp = frontier = low
            while frontier:
                b = frontier & -frontier
                frontier ^= b
                new = nbr[b.bit_length() - 1] & mask & ~comp
                comp |= new
                frontier |= new
            comps.append(comp)
            mask &= ~comp
        return comps

    def log_z(self, mask: int) -> float:
        memo = self.memo
        pending: dict[int, tuple[bool, list[int]]] = {}
        stack = [mask]
        while stack:
            m = stack[-1]
            if m in memo:
                stack.pop()
                continue
            if m not in pending:
                comps = self.components(m)
                if len(comps) > 1:
                    pending[m] = (True, comps)
                else:
                    v = self._pivot(m)
                    rest = m & ~(1 << v)
                    pending[m] = (False, [rest, rest & ~self.nbr[v]])
            is_union, subs = pending[m]
            missing = [c for c in subs if c not in memo]
            if missing:
                stack.extend(missing)
                continue
            if is_union:
                memo[m] = sum(memo[c] for c in subs)
            else:
                memo[m] = _logaddexp(memo[subs[0]], self.log_lam + memo[subs[1]])
            del pending[m]
            stack.pop()
        return memo[mask]

    def _pivot(self, mask: int) -> int:
        best, best_deg = -1, -1
        m = mask
        while m:
            b = m & -m
            m ^= b
            v = b.bit_length() - 1
            deg = (self.nbr[v] & mask).bit_count()
            if deg > best_deg:
                best, best_deg = v, deg
        return best


def _guard(G: Graph, size_limit: int | None) -> None:
    limit = DEFAULT_SIZE_LIMIT if size_limit is None else size_limit
    if G.n > limit:
        raise SizeGuardError(f"graph has {G.n} vertices, exact oracle limit is {limit}")


def exact_log_partition(G: Graph, lam: float, size_limit: int | None = None) -> float:
    """``log Z(G, lam)`` by exact recursion."""
    lam = check_activity(lam)
    _guard(G, size_limit)
    return _Solver(G, lam).log_z((1 << G.n) - 1)


def exact_occupation(
    G: Graph,
    sigma: BoundaryCondition,
    v: int,
    lam: float,
    size_limit: int | None = None,
) -> ExactResult:
    """Occupation probability and ratio of the unfixed vertex ``v`` under ``sigma``.

    Computed on the ``sigma``-reduced graph as
    ``p = lam*Z(G'-N[v]) / Z(G')``; ``log_Z`` is the conditioned weight.
    """
    lam = check_activity(lam)
    if v in sigma:
        raise BoundaryError(f"vertex {v} is fixed by the boundary condition")
    red = reduce_by_boundary(G, sigma, lam)
    H = red.graph
    _guard(H, size_limit)
    nv = red.vertex_map[v]
    full = (1 << H.n) - 1
    s = _Solver(H, lam)
    log_z = s.log_z(full)
    if nv < 0:
        # v is adjacent to an occupied boundary vertex
        return ExactResult(log_z + red.log_prefactor, 0.0, 0.0)
    log_out = s.log_z(full & ~(1 << nv))
    log_in = math.log(lam) + s.log_z(full & ~(1 << nv) & ~s.nbr[nv])
    R = math.exp(log_in - log_out)
    p = R / (1.0 + R)
    return ExactResult(log_z + red.log_prefactor, p, R)


def exact_conditioned_log_partition(G: Graph, sigma: BoundaryCondition, lam: float) -> float:
    """``log`` of the total weight of independent sets agreeing with ``sigma``."""
    red = reduce_by_boundary(G, sigma, lam)
    return red.log_prefactor + exact_log_partition(red.graph, lam)


def brute_force_log_partition(G: Graph, lam: float, size_limit: int = 20) -> float:
    """Enumerate all ``2^n`` subsets; independent of the recursion above."""
    lam = check_activity(lam)
    if G.n > size_limit:
        raise SizeGuardError(f"brute force limited to {size_limit} vertices")
    masks = np.arange(1 << G.n, dtype=np.int64)
    ok = np.ones(masks.shape, dtype=bool)
    for u, v in G.edges():
        ok &= ((masks >> u) & (masks >> v) & 1) == 0
    sizes = np.zeros(masks.shape, dtype=np.int64)
    for u in range(G.n):
        sizes += (masks >> u) & 1
    counts = np.bincount(sizes[ok], minlength=G.n + 1)
    terms = [math.log(int(c)) + k * math.log(lam) for k, c in enumerate(counts) if c]
    top = max(terms)
    return top + math.log(sum(math.exp(t - top) for t in terms))


def brute_force_ratio(G: Graph, sigma: BoundaryCondition, v: int, lam: float) -> float:
    """Occupation ratio of ``v`` by direct enumeration (``n <= 20``)."""
    occ = BoundaryCondition({**sigma.assignment, v: Spin.OCCUPIED})
    unocc = BoundaryCondition({**sigma.assignment, v: Spin.UNOCCUPIED})
    try:
        occ.validate(G)
    except ValueError:
        return 0.0
    num = _brute_conditioned(G, occ, lam)
    den = _brute_conditioned(G, unocc, lam)
    return math.exp(num - den)


def _brute_conditioned(G: Graph, sigma: BoundaryCondition, lam: float) -> float:
    red = reduce_by_boundary(G, sigma, lam)
    return red.log_prefactor + brute_force_log_partition(red.graph, lam)


__all__ = [
    "ExactResult",
    "SizeGuardError",
    "brute_force_log_partition",
    "brute_force_ratio",
    "exact_conditioned_log_partition",
    "exact_log_partition",
    "exact_occupation",
]
