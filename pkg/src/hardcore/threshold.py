"""Critical activities, the decay function nu and strong-spatial-mixing thresholds.

Every function here accepts a real-valued arity ``d`` since the threshold
search works with non-integer effective degrees.  All root finding is plain
bisection on analytically forced brackets.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .graph import check_activity

RESIDUAL_TOL = 1e-12
BISECTION_TOL = 1e-9


class ThresholdError(ValueError):
    """Requested threshold does not exist for these parameters."""


def lambda_c(d: float) -> float:
    """Uniqueness threshold ``d^d / (d-1)^(d+1)`` of the ``d``-ary tree."""
    d = float(d)
    if not d > 1:
        raise ValueError(f"lambda_c needs d > 1, got {d}")
    return math.exp(d * math.log(d) - (d + 1) * math.log(d - 1))


def log_lambda_c(d: float) -> float:
    return d * math.log(d) - (d + 1) * math.log(d - 1)


def tree_map(d: float, lam: float, x):
    """Symmetric recurrence ``f_{d,lam}(x) = lam * (1+x)^(-d)``."""
    return lam * np.exp(-d * np.log1p(x))


# -- the sinh^-1 sqrt message ------------------------------------------------

def message(x):
    return np.arcsinh(np.sqrt(x))


def message_derivative(x):
    return 1.0 / (2.0 * np.sqrt(x * (1.0 + x)))


def message_inverse(y):
    return np.sinh(y) ** 2


def S_message(x, p: float = 2.0):
    """``(e^-x / Phi(e^x - 1))^p``; equals ``4(1 - e^-x)`` at ``p = 2``."""
    x = np.asarray(x, dtype=float)
    return (np.exp(-x) / message_derivative(np.expm1(x))) ** p


def Xi(d: float, x, lam: float, q: float = 2.0):
    """Per-step contraction factor of the message recursion at symmetric input ``x``."""
    x = np.asarray(x, dtype=float)
    fx = tree_map(d, lam, x)
    ratio = message_derivative(fx) * fx / ((1.0 + x) * message_derivative(x))
    return d ** (q - 1.0) * ratio**q


# -- fixed point and nu ------------------------------------------------------

@dataclass(frozen=True)
class FixedPoint:
    d: float
    lam: float
    x_tilde: float
    residual: float


def _fixed_point_gap(d: float, lam: float, x: float) -> float:
    # (d x - 1)(1 + x)^d - lam, increasing in x on x >= 1/d
    return (d * x - 1.0) * math.exp(d * math.log1p(x)) - lam


def solve_xtilde(d: float, lam: float) -> FixedPoint:
    """Solve ``d x = 1 + lam/(1+x)^d`` on the bracket ``[1/d, (1+lam)/d]``."""
    d = float(d)
    lam = check_activity(lam)
    if d < 1:
        raise ValueError(f"arity must be >= 1, got {d}")
    lo, hi = 1.0 / d, (1.0 + lam) / d
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _fixed_point_gap(d, lam, mid) < 0:
            lo = mid
        else:
            hi = mid
    x = lo if abs(_fixed_point_gap(d, lam, lo)) <= abs(_fixed_point_gap(d, lam, hi)) else hi
    return FixedPoint(d, lam, x, abs(_fixed_point_gap(d, lam, x)))


def nu(d: float, lam: float) -> float:
    """``(d x - 1)/(1 + x)`` at the fixed point ``x = x_tilde(d, lam)``."""
    x = solve_xtilde(d, lam).x_tilde
    return (d * x - 1.0) / (1.0 + x)


def chi(d: float, lam: float) -> float:
    return d * nu(d, lam)


def xi_general(d: float, lam: float, q: float = 2.0, *, force_search: bool = False) -> float:
    """``sup_{x >= 0} Xi_q(d, x)``.

    At ``q = 2`` the supremum is attained at ``x_tilde`` and is evaluated there
    unless ``force_search``; otherwise a log-spaced grid is refined with a
    bounded scalar search around the best grid cell.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    lam = check_activity(lam)
    if q == 2.0 and not force_search:
        return float(Xi(d, solve_xtilde(d, lam).x_tilde, lam, 2.0))
    grid = np.logspace(-10, 6, 4001)
    vals = Xi(d, grid, lam, q)
    k = int(np.nanargmax(vals))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(
        lambda t: -float(Xi(d, math.exp(t), lam, q)),
        bounds=(math.log(a), math.log(b)),
        method="bounded",
        options={"xatol": 1e-13},
    )
    return max(float(vals[k]), -float(res.fun))


# -- certificates ------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    holds: bool
    margin: float
    nu: float


def ssm_certificate(d: int, delta: float, lam: float) -> Certificate:
    """``nu_lam(d) * delta < 1`` for max degree ``d+1`` and connective constant ``delta``."""
    if d < 1 or delta <= 0:
        raise ValueError("need d >= 1 and delta > 0")
    v = nu(d, lam)
    margin = 1.0 - v * delta
    return Certificate(margin > 0, margin, v)


@dataclass(frozen=True)
class Theorem1Certificate:
    holds: bool
    also_e_over_delta: bool
    lambda_c: float


def theorem1_certificate(delta: float, lam: float) -> Theorem1Certificate:
    """Degree-free criterion ``lam < lambda_c(delta + 1)``; also reports ``lam < e/delta``."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    lam = check_activity(lam)
    lc = lambda_c(delta + 1.0)
    return Theorem1Certificate(lam < lc, lam < math.e / delta, lc)


def bipartite_threshold(d1: float, d2: float) -> float:
    prod = float(d1) * float(d2)
    if prod <= 1:
        raise ValueError("need d1 * d2 > 1")
    return lambda_c(math.sqrt(prod))


# -- threshold search --------------------------------------------------------

@dataclass(frozen=True)
class ThresholdReport:
    d: int
    delta: float
    lam: float
    x_tilde: float
    nu: float
    margin: float
    lambda_star: float
    alpha: float
    alpha_published: float
    lambda_published: float

    @property
    def holds(self) -> bool:
        return self.margin > 0

    def to_json(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        return out


def _bisect(pred, lo: float, hi: float, tol: float) -> float:
    """Largest point with ``pred`` true, assuming ``pred`` true at ``lo``, false at ``hi``."""
    while hi - lo > tol * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_lambda_star(d: int, delta: float, tol: float = 1e-13) -> float:
    """Supremum activity with ``nu_lam(d) * delta <= 1``."""
    if d < 1 or delta <= 0:
        raise ValueError("need d >= 1 and delta > 0")
    if d * delta <= 1:
        # nu increases to d as lam grows, so nu*delta never reaches 1
        raise ThresholdError(f"nu*delta < 1 for every activity (d*delta = {d * delta} <= 1)")
    hi = 1.0
    while nu(d, hi) * delta < 1:
        hi *= 2.0
    lo = hi / 2.0
    while nu(d, lo) * delta >= 1:
        lo /= 2.0
        if lo < 1e-300:
            raise ThresholdError("no positive activity satisfies the criterion")
    return _bisect(lambda t: nu(d, t) * delta < 1, lo, hi, tol)


def effective_alpha(lam: float, tol: float = 1e-13) -> float:
    """The ``alpha > 1`` with ``lambda_c(alpha) = lam`` (``lambda_c`` is decreasing)."""
    lam = check_activity(lam)
    target = math.log(lam)
    hi = 2.0
    while log_lambda_c(hi) > target:
        hi *= 2.0
    lo = 1.0 + 1e-12
    if log_lambda_c(lo) < target:
        raise ThresholdError(f"activity {lam} exceeds lambda_c near alpha = 1")
    return _bisect(lambda a: log_lambda_c(a) > target, lo, hi, tol)


def _round_up(x: float, digits: int = 3) -> float:
    scale = 10**digits
    return math.ceil(x * scale - 1e-9) / scale


def lambda_star(d: int, delta: float, lam: float | None = None) -> ThresholdReport:
    """Threshold report for max degree ``d+1`` and connective constant ``delta``.

    ``lam`` defaults to the threshold itself.  ``alpha_published`` is ``alpha``
    rounded up to three decimals (the conservative direction) and
    ``lambda_published = lambda_c(alpha_published)``, which is how a tabulated
    ``(alpha, lambda)`` pair relates to the raw threshold.
    """
    ls = solve_lambda_star(d, delta)
    alpha = effective_alpha(ls)
    lam = ls if lam is None else check_activity(lam)
    fp = solve_xtilde(d, lam)
    v = (d * fp.x_tilde - 1.0) / (1.0 + fp.x_tilde)
    a_pub = _round_up(alpha)
    return ThresholdReport(
        d=int(d),
        delta=float(delta),
        lam=lam,
        x_tilde=fp.x_tilde,
        nu=v,
        margin=1.0 - v * delta,
        lambda_star=ls,
        alpha=alpha,
        alpha_published=a_pub,
        lambda_published=lambda_c(a_pub),
    )


# -- concavity checks ----------------------------------------------------------

@dataclass(frozen=True)
class ConcavityReport:
    lam: float
    grid: np.ndarray
    max_second_difference: float
    S_max_second_derivative: float
    S_closed_form_error: float

    @property
    def passed(self) -> bool:
        return self.max_second_difference <= 1e-9 and self.S_max_second_derivative < 0


def log_chi_exp(x, lam: float):
    """``H(x) = log(e^x nu(e^x))`` on an array of ``x >= 0``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return x + np.log([nu(math.exp(t), lam) for t in x])


def check_concavity(lam: float, x_max: float = 5.0, step: float = 0.01) -> ConcavityReport:
    lam = check_activity(lam)
    if x_max <= 0 or step <= 0:
        raise ValueError("need positive x_max and step")
    grid = np.linspace(0.0, x_max, int(round(x_max / step)) + 1)
    H = log_chi_exp(grid, lam)
    second = H[2:] - 2 * H[1:-1] + H[:-2]
    S_exact = 4.0 * (1.0 - np.exp(-grid[1:]))
    S_err = float(np.max(np.abs(S_message(grid[1:]) - S_exact)))
    S_second = -4.0 * np.exp(-grid)
    return ConcavityReport(lam, grid, float(np.max(second)), float(np.max(S_second)), S_err)


# -- lattice table -----------------------------------------------------------

@dataclass(frozen=True)
class Lattice:
    name: str
    connective_constant: float
    max_degree: int
    previous_alpha: float
    previous_lambda: float


# previous-best columns are literature reference data, not computed here
LATTICES = (
    Lattice("T", 4.251419, 6, 5, 0.762),
    Lattice("H", 1.847760, 3, 2, 4.0),
    Lattice("Z2", 2.679193, 4, 2.502, 2.48),
    Lattice("Z3", 4.7387, 6, 5, 0.762),
    Lattice("Z4", 6.8040, 8, 7, 0.490),
    Lattice("Z5", 8.8602, 10, 9, 0.360),
    Lattice("Z6", 10.8886, 12, 11, 0.285),
)


@dataclass(frozen=True)
class TableRow:
    lattice: Lattice
    report: ThresholdReport

    def csv_fields(self) -> list:
        r = self.report
        return [self.lattice.name, self.lattice.connective_constant, self.lattice.max_degree, r.alpha, r.lambda_star]


TABLE1_COLUMNS = ["lattice", "connective_constant", "max_degree", "alpha", "lambda_star"]


def table1(lattices=LATTICES) -> list[TableRow]:
    return [TableRow(lat, lambda_star(lat.max_degree - 1, lat.connective_constant)) for lat in lattices]
