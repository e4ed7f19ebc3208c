"""Deterministic approximation of the partition function by correlation decay.

Each marginal comes from a truncated Weitz tree deepened until its interval is
narrow enough; ``log Z`` is the telescoping sum over a vertex elimination order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .decay import MarginalInterval, marginal_interval
from .graph import EMPTY_BOUNDARY, BoundaryCondition, BoundaryError, Graph, Spin, check_activity
from .saw import DEFAULT_NODE_BUDGET

DEFAULT_START_DEPTH = 4
DEPTH_STEP = 2


class DepthCapReached(RuntimeError):
    """Deepening hit the cap before the interval was narrow enough."""

    def __init__(self, message: str, interval: MarginalInterval, vertex: int | None = None):
        super().__init__(message)
        self.interval = interval
        self.vertex = vertex


@dataclass(frozen=True)
class OccupationEstimate:
    value: float
    interval: MarginalInterval

    @property
    def depth(self) -> int:
        return self.interval.depth


def _has_occupied_neighbor(G: Graph, sigma: BoundaryCondition, v: int) -> bool:
    return any(sigma.get(u) is Spin.OCCUPIED for u in G.adjacency[v])


def approx_occupation(
    G: Graph,
    sigma: BoundaryCondition,
    v: int,
    delta: float,
    lam: float = 1.0,
    *,
    start_depth: int = DEFAULT_START_DEPTH,
    max_depth: int | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
    backend: str | None = None,
) -> OccupationEstimate:
    """Estimate ``R_v`` to within ``delta`` (additively), certified.

    The default depth cap ``n + 1`` is never binding in exact arithmetic:
    beyond the longest self-avoiding walk the tree is complete and the
    interval is a point.
    """
    check_activity(lam)
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not 0 <= v < G.n:
        raise ValueError(f"vertex {v} out of range")
    sigma.validate(G)
    if v in sigma:
        raise BoundaryError(f"vertex {v} is fixed by the boundary condition")
    if _has_occupied_neighbor(G, sigma, v):
        return OccupationEstimate(0.0, MarginalInterval(0.0, 0.0, 0))
    cap = G.n + 1 if max_depth is None else max_depth
    depth = max(1, start_depth)
    nodes = 0
    while True:
        iv = marginal_interval(G, v, sigma, depth, lam, node_budget=node_budget, backend=backend)
        nodes += iv.nodes_expanded
        if iv.width <= 2 * delta:
            iv = MarginalInterval(iv.lower, iv.upper, depth, nodes)
            return OccupationEstimate(iv.midpoint, iv)
        if depth >= cap:
            iv = MarginalInterval(iv.lower, iv.upper, depth, nodes)
            raise DepthCapReached(
                f"interval width {iv.width:.3g} > {2 * delta:.3g} at depth cap {cap}", iv, v)
        depth = min(depth + DEPTH_STEP, cap)


@dataclass(frozen=True)
class VertexStep:
    vertex: int
    R_hat: float
    R_minus: float
    R_plus: float
    depth: int
    nodes_expanded: int

    @property
    def log_error(self) -> float:
        """Largest possible ``|log(1+R_hat) - log(1+R)|`` for ``R`` in the interval."""
        return max(math.log1p(self.R_hat) - math.log1p(self.R_minus),
                   math.log1p(self.R_plus) - math.log1p(self.R_hat), 0.0)

    def to_json(self) -> dict:
        return {"vertex": self.vertex, "R_hat": self.R_hat, "R_minus": self.R_minus,
                "R_plus": self.R_plus, "depth": self.depth, "nodes_expanded": self.nodes_expanded}


@dataclass(frozen=True)
class ApproxResult:
    log_Z: float
    relative_error_bound: float
    nodes_expanded: int
    delta: float
    per_vertex: tuple[VertexStep, ...] = field(repr=False)

    @property
    def Z(self) -> float:
        return math.exp(self.log_Z)

    def to_json(self) -> dict:
        return {"log_Z": self.log_Z, "relative_error_bound": self.relative_error_bound,
                "nodes_expanded": self.nodes_expanded, "delta": self.delta,
                "per_vertex": [s.to_json() for s in self.per_vertex]}


def vertex_delta(n: int, lam: float, mu: float) -> float:
    """Per-vertex additive target, split evenly over ``n`` factors with slack 2."""
    return mu / (2 * n * (1 + lam))


# occupation(G, v, lam, delta) -> (R_hat, R_minus, R_plus, depth, nodes)
OccupationFn = Callable[[Graph, int, float, float], tuple[float, float, float, int, int]]


def _tree_occupation(**kw) -> OccupationFn:
    def fn(G, v, lam, delta):
        est = approx_occupation(G, EMPTY_BOUNDARY, v, delta, lam, **kw)
        iv = est.interval
        return est.value, iv.lower, iv.upper, iv.depth, iv.nodes_expanded
    return fn


def approx_log_partition(
    G: Graph,
    lam: float,
    mu: float,
    *,
    order: str = "index",
    occupation: OccupationFn | None = None,
    **kw,
) -> ApproxResult:
    """``log Z`` with ``|Z_hat/Z - 1| <= mu``.

    Vertices are eliminated one at a time; ``Z(G) / Z(G - v) = 1 + R_v(G)``,
    so ``log Z`` is the sum of ``log(1 + R_v)`` over graphs shrinking by one
    vertex per step.  ``order="max-degree"`` eliminates high-degree vertices
    first.  ``occupation`` replaces the tree estimator (used to check the
    elimination plumbing against exact marginals).
    """
    check_activity(lam)
    if not 0 < mu < 1:
        raise ValueError("mu must lie in (0, 1)")
    if order == "index":
        seq = list(range(G.n))
    elif order == "max-degree":
        seq = sorted(range(G.n), key=lambda u: (-G.degree(u), u))
    else:
        raise ValueError(f"unknown elimination order {order!r}")
    n = max(G.n, 1)
    delta = vertex_delta(n, lam, mu)
    occ = occupation or _tree_occupation(**kw)
    alive = sorted(seq)
    log_z = 0.0
    total_err = 0.0
    nodes = 0
    steps = []
    for v in seq:
        H, ids = G.induced(alive)
        try:
            r, lo, hi, depth, k = occ(H, ids[v], lam, delta)
        except DepthCapReached as exc:
            exc.vertex = v
            raise
        step = VertexStep(v, r, lo, hi, depth, k)
        steps.append(step)
        log_z += math.log1p(r)
        total_err += step.log_error
        nodes += k
        alive.remove(v)
    return ApproxResult(log_z, math.expm1(total_err), nodes, delta, tuple(steps))


def plan_depth(margin: float, delta: float | None = None, *, n: int | None = None,
               mu: float | None = None, lam: float | None = None, C: float = 1.0) -> int:
    """Advisory depth ``ceil(2 log(C/delta) / log(1/margin))`` for contraction ``margin = nu*Delta``.

    Give ``delta`` directly or ``n, mu, lam`` to derive it.
    """
    if not 0 < margin < 1:
        raise ValueError(f"no contraction certificate: margin {margin} must lie in (0, 1)")
    if delta is None:
        if n is None or mu is None or lam is None:
            raise ValueError("give delta or all of n, mu, lam")
        delta = vertex_delta(n, lam, mu)
    if not delta > 0:
        raise ValueError("delta must be positive")
    return max(1, math.ceil(2 * math.log(C / delta) / math.log(1 / margin)))
