"""Tree recurrence, two-sided marginal intervals and decay profiling."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._backend import get_kernels
from .graph import EMPTY_BOUNDARY, BoundaryCondition, BoundaryError, Graph, Spin, check_activity
from .saw import DEFAULT_NODE_BUDGET
from .threshold import chi

# Child ratios are floats in [0, lam] or this marker for a leaf fixed occupied.
FIXED_OCCUPIED = Spin.OCCUPIED

WIDTH_FLOOR = 1e-14


def recurrence_step(lam: float, children: Iterable) -> float:
    """``lam * prod 1/(1+R_i)``; an occupied child forces exactly 0."""
    check_activity(lam)
    r = lam
    for c in children:
        if c is FIXED_OCCUPIED:
            return 0.0
        c = float(c)
        if not math.isfinite(c) or c < 0:
            raise ValueError(f"child ratio must be finite and >= 0, got {c}")
        r /= 1.0 + c
    return r


@dataclass(frozen=True)
class MarginalInterval:
    lower: float
    upper: float
    depth: int
    nodes_expanded: int = 0

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, r: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= r <= self.upper + tol

    def to_json(self) -> dict:
        return {"depth": self.depth, "R_minus": self.lower, "R_plus": self.upper,
                "width": self.width, "nodes_expanded": self.nodes_expanded}


def marginal_interval(
    G: Graph,
    v: int,
    sigma: BoundaryCondition = EMPTY_BOUNDARY,
    depth: int = 1,
    lam: float = 1.0,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
    backend: str | None = None,
) -> MarginalInterval:
    """Bounds on ``R_v`` from the Weitz tree truncated at ``depth``.

    Free nodes at the cutoff are fixed occupied for one bound and unoccupied
    for the other; the exact ratio lies between the two.
    """
    check_activity(lam)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if not 0 <= v < G.n:
        raise ValueError(f"vertex {v} out of range")
    sigma.validate(G)
    if v in sigma:
        raise BoundaryError(f"vertex {v} is fixed by the boundary condition")
    indptr, indices = G.csr()
    kern = get_kernels(backend)
    ra, rb, nodes, _ = kern.weitz_interval(indptr, indices, sigma.spin_array(G.n), v, depth, float(lam), node_budget)
    lo, hi = (ra, rb) if ra <= rb else (rb, ra)
    return MarginalInterval(lo, hi, depth, int(nodes))


# -- spherically symmetric trees ----------------------------------------------

@dataclass(frozen=True)
class SymmetricTree:
    """Tree whose depth-``i`` nodes all have ``arities[i]`` children."""

    arities: tuple[int, ...]

    def __post_init__(self):
        if any(int(a) < 1 for a in self.arities):
            raise ValueError("arities must be >= 1")

    @classmethod
    def regular(cls, d: int, depth: int) -> "SymmetricTree":
        return cls((d,) * depth)

    def interval(self, lam: float, depth: int) -> MarginalInterval:
        """Root ratio bounds with depth-``depth`` nodes fixed both ways.

        All nodes on a level see the same boundary, so one value per level
        suffices.
        """
        check_activity(lam)
        if depth > len(self.arities):
            raise ValueError(f"depth {depth} exceeds the {len(self.arities)} given arities")
        if depth == 0:
            return MarginalInterval(float(lam), float(lam), 0)
        # level depth-1 sees occupied children (ratio 0) or unoccupied ones (lam)
        a, b = 0.0, float(lam)
        for i in range(depth - 2, -1, -1):
            di = self.arities[i]
            a = lam * math.exp(-di * math.log1p(a))
            b = lam * math.exp(-di * math.log1p(b))
        lo, hi = (a, b) if a <= b else (b, a)
        return MarginalInterval(lo, hi, depth)


@dataclass(frozen=True)
class SymmetricTreeReport:
    arities: tuple[int, ...]
    lam: float
    depth: int
    log_means: tuple[float, ...]  # log Delta_{j,depth}, j = 0..depth
    chi: float
    interval: MarginalInterval

    @property
    def means(self) -> list[float]:
        return [math.exp(x) for x in self.log_means]

    @property
    def delta0(self) -> float:
        return math.exp(self.log_means[0])

    @property
    def width(self) -> float:
        return self.interval.width

    def to_json(self) -> dict:
        return {"arities": list(self.arities), "lambda": self.lam, "depth": self.depth,
                "Delta": self.means, "chi": self.chi, "width": self.width,
                "R_minus": self.interval.lower, "R_plus": self.interval.upper}


def symmetric_tree_report(arities: Sequence[int], lam: float, depth: int) -> SymmetricTreeReport:
    arities = tuple(int(a) for a in arities)
    if any(a < 1 for a in arities):
        raise ValueError("zero arity")
    if not 1 <= depth <= len(arities):
        raise ValueError("depth must be between 1 and the number of arities")
    logs = [math.log(a) for a in arities[:depth]]
    suffix = 0.0
    means = [0.0] * (depth + 1)  # Delta_{depth,depth} = 1
    for j in range(depth - 1, -1, -1):
        suffix += logs[j]
        means[j] = suffix / (depth - j)
    d0 = math.exp(means[0])
    c = chi(d0, lam) if d0 > 1 else 0.0
    return SymmetricTreeReport(arities, lam, depth, tuple(means), c, SymmetricTree(arities).interval(lam, depth))


# -- decay profiles -------------------------------------------------------------

@dataclass(frozen=True)
class DecayProfile:
    intervals: tuple[MarginalInterval, ...]
    slope: float  # least-squares slope of log width against depth
    rate: float   # exp(slope), nan if fewer than two usable widths

    @property
    def depths(self) -> list[int]:
        return [iv.depth for iv in self.intervals]

    @property
    def widths(self) -> list[float]:
        return [iv.width for iv in self.intervals]

    def width_at(self, depth: int) -> float:
        for iv in self.intervals:
            if iv.depth == depth:
                return iv.width
        raise KeyError(depth)

    def to_csv(self) -> str:
        lines = ["depth,R_minus,R_plus,width"]
        lines.extend(f"{iv.depth},{iv.lower!r},{iv.upper!r},{iv.width!r}" for iv in self.intervals)
        return "\n".join(lines) + "\n"


def fit_rate(depths: Sequence[int], widths: Sequence[float]) -> tuple[float, float]:
    pts = [(d, math.log(w)) for d, w in zip(depths, widths) if w > WIDTH_FLOOR]
    if len(pts) < 2:
        return math.nan, math.nan
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts])
    slope = float(np.polyfit(x, y, 1)[0])
    return slope, math.exp(slope)


def decay_profile(
    G_or_tree: Graph | SymmetricTree,
    v: int = 0,
    sigma: BoundaryCondition = EMPTY_BOUNDARY,
    depths: Sequence[int] = (),
    lam: float = 1.0,
    **kw,
) -> DecayProfile:
    depths = list(depths)
    if not depths:
        raise ValueError("empty depth range")
    if any(b <= a for a, b in zip(depths, depths[1:])):
        raise ValueError("depth range must be strictly ascending")
    if isinstance(G_or_tree, SymmetricTree):
        ivs = tuple(G_or_tree.interval(lam, d) for d in depths)
    else:
        ivs = tuple(marginal_interval(G_or_tree, v, sigma, d, lam, **kw) for d in depths)
    slope, rate = fit_rate(depths, [iv.width for iv in ivs])
    return DecayProfile(ivs, slope, rate)
