"""Self-avoiding walks: exact counts, connective-constant estimates, Weitz
SAW trees, and finite-memory branching matrices on Z^2.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
import scipy.sparse as sp

from ._backend import get_kernels
from ._errors import NodeBudgetExceeded, StateCapExceeded
from .graph import EMPTY_BOUNDARY, BoundaryCondition, Graph, Spin

DEFAULT_NODE_BUDGET = 10**8
DEFAULT_STATE_CAP = 5 * 10**6

__all__ = [
    "NodeBudgetExceeded",
    "StateCapExceeded",
    "SawCounts",
    "count_saws",
    "estimate_connective",
    "WeitzSawTree",
    "build_weitz_saw_tree",
    "BranchingMatrix",
    "branching_matrix",
    "perron_root",
    "best_weitz_gamma",
]


# -- walk counting -------------------------------------------------------------

@dataclass(frozen=True)
class SawCounts:
    vertex: int
    counts: tuple[int, ...]  # N(v, 1), ..., N(v, lmax)
    nodes_expanded: int = 0

    @property
    def lmax(self) -> int:
        return len(self.counts)

    @property
    def cumulative_roots(self) -> list[float]:
        """``(sum_{i<=l} N(v,i))^(1/l)`` for ``l = 1..lmax``."""
        out, total = [], 0
        for ell, c in enumerate(self.counts, start=1):
            total += c
            out.append(math.exp(math.log(total) / ell) if total > 0 else 0.0)
        return out

    def to_csv(self) -> str:
        lines = ["length,count,cumulative_root"]
        for ell, (c, r) in enumerate(zip(self.counts, self.cumulative_roots), start=1):
            lines.append(f"{ell},{c},{r!r}")
        return "\n".join(lines) + "\n"


class _BridgeTables:
    """Memoized walk counts behind each directed bridge of ``G``.

    A walk that crosses a bridge ``u -> w`` can never come back, so the number
    of its continuations depends only on the bridge and the remaining length.
    """

    def __init__(self, G: Graph, lmax: int, kern, node_budget: int):
        self.G = G
        self.lmax = lmax
        self.kern = kern
        self.node_budget = node_budget
        self.indptr, self.indices = G.csr()
        H = nx.Graph()
        H.add_nodes_from(range(G.n))
        H.add_edges_from(G.edges())
        bridges = sorted(tuple(sorted(e)) for e in nx.bridges(H))
        self.ids: dict[tuple[int, int], int] = {}
        for u, w in bridges:
            self.ids[(u, w)] = len(self.ids)
            self.ids[(w, u)] = len(self.ids)
        H.remove_edges_from(bridges)
        comp = np.empty(G.n, dtype=np.int64)
        for c, verts in enumerate(nx.connected_components(H)):
            for v in verts:
                comp[v] = c
        self.comp = comp
        self.leaving: dict[int, list[int]] = {}
        for (u, w), b in self.ids.items():
            self.leaving.setdefault(int(comp[u]), []).append(b)
        self.ends = {b: e for e, b in self.ids.items()}
        self.slot = np.full(self.indices.shape[0], -1, dtype=np.int32)
        for u in range(G.n):
            for s in range(self.indptr[u], self.indptr[u + 1]):
                b = self.ids.get((u, int(self.indices[s])))
                if b is not None:
                    self.slot[s] = b
        self.tables = np.zeros((max(len(self.ids), 1), lmax + 1), dtype=np.int64)
        self.done = np.zeros(len(self.ids), dtype=bool)
        self.nodes = 0

    def _deps(self, b: int) -> list[int]:
        u, w = self.ends[b]
        back = self.ids[(w, u)]
        return [c for c in self.leaving.get(int(self.comp[w]), []) if c != back]

    def ensure(self, needed: Iterable[int]) -> None:
        stack = [b for b in needed if not self.done[b]]
        while stack:
            b = stack[-1]
            if self.done[b]:
                stack.pop()
                continue
            missing = [c for c in self._deps(b) if not self.done[c]]
            if missing:
                stack.extend(missing)
                continue
            u, w = self.ends[b]
            blocked = np.zeros(self.G.n, dtype=np.uint8)
            blocked[u] = 1
            counts, nodes = self.kern.saw_counts(
                self.indptr, self.indices, w, self.lmax, blocked, self.slot, self.tables, self.node_budget
            )
            self.nodes += nodes
            self.tables[b] = counts
            self.done[b] = True
            stack.pop()

    def count(self, v: int) -> tuple[np.ndarray, int]:
        self.ensure(self.leaving.get(int(self.comp[v]), []))
        blocked = np.zeros(self.G.n, dtype=np.uint8)
        return self.kern.saw_counts(
            self.indptr, self.indices, v, self.lmax, blocked, self.slot, self.tables, self.node_budget
        )


def _check_counts(arr: np.ndarray) -> None:
    if np.any(arr < 0) or np.any(arr > 2**62):
        raise OverflowError("walk counts exceed the 64-bit range")


def count_saws(
    G: Graph,
    v: int,
    lmax: int,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
    use_bridges: bool = True,
    backend: str | None = None,
    _tables: _BridgeTables | None = None,
) -> SawCounts:
    """Exact ``N(v, l)`` for ``l = 1..lmax`` by depth-first enumeration.

    With ``use_bridges`` the counts behind each bridge are computed once and
    reused, which keeps tree-like graphs cheap; the result is identical.
    """
    if lmax < 1:
        raise ValueError("lmax must be >= 1")
    if not 0 <= v < G.n:
        raise ValueError(f"vertex {v} out of range")
    kern = get_kernels(backend)
    if use_bridges:
        tables = _tables or _BridgeTables(G, lmax, kern, node_budget)
        counts, nodes = tables.count(v)
        nodes += tables.nodes
    else:
        indptr, indices = G.csr()
        counts, nodes = kern.saw_counts(
            indptr,
            indices,
            v,
            lmax,
            np.zeros(G.n, dtype=np.uint8),
            np.full(indices.shape[0], -1, dtype=np.int32),
            np.zeros((1, lmax + 1), dtype=np.int64),
            node_budget,
        )
    _check_counts(counts)
    return SawCounts(v, tuple(int(c) for c in counts[1:]), int(nodes))


@dataclass(frozen=True)
class ConnectiveEstimate:
    ell: int
    roots: dict[int, float]

    @property
    def max_root(self) -> float:
        return max(self.roots.values())

    @property
    def mean_root(self) -> float:
        return float(np.mean(list(self.roots.values())))


def estimate_connective(
    G: Graph,
    sample_vertices: Sequence[int],
    ell: int,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
    backend: str | None = None,
) -> ConnectiveEstimate:
    """Cumulative roots ``(sum_{i<=ell} N(v,i))^(1/ell)`` over a vertex sample."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    sample = list(sample_vertices)
    if not sample:
        raise ValueError("empty vertex sample")
    tables = _BridgeTables(G, ell, get_kernels(backend), node_budget)
    roots = {}
    for v in sample:
        c = count_saws(G, v, ell, node_budget=node_budget, backend=backend, _tables=tables)
        roots[int(v)] = c.cumulative_roots[-1]
    return ConnectiveEstimate(ell, roots)


# -- Weitz SAW tree ------------------------------------------------------------

@dataclass
class WeitzNode:
    """One self-avoiding walk in the tree.

    ``fixed`` is ``None`` for a free node, otherwise the spin it is pinned to
    (cycle-closing leaves and nodes whose endpoint is fixed by the boundary).
    ``truncated`` marks free nodes at the depth cutoff.
    """

    walk: tuple[int, ...]
    fixed: Spin | None = None
    cycle_closing: bool = False
    truncated: bool = False
    _children: list["WeitzNode"] | None = field(default=None, repr=False)

    @property
    def vertex(self) -> int:
        return self.walk[-1]

    @property
    def depth(self) -> int:
        return len(self.walk) - 1

    @property
    def is_leaf(self) -> bool:
        return self.fixed is not None or self.truncated


class WeitzSawTree:
    """Lazily expanded Weitz tree of ``v`` in ``G`` under boundary ``sigma``.

    Children of the walk ``w`` ending at ``u`` are ``w + (x,)`` over neighbors
    ``x`` of ``u`` other than the predecessor, in ascending order.  If ``x`` is
    already on ``w`` the child is a leaf, occupied when ``u`` comes after the
    vertex following ``x`` on ``w`` in ``x``'s sorted neighbor list, unoccupied
    otherwise.  A child whose endpoint is fixed by ``sigma`` carries that spin.
    """

    def __init__(self, G: Graph, v: int, sigma: BoundaryCondition = EMPTY_BOUNDARY,
                 depth: int | None = None, node_budget: int = DEFAULT_NODE_BUDGET):
        if not 0 <= v < G.n:
            raise ValueError(f"vertex {v} out of range")
        sigma.validate(G)
        if v in sigma:
            raise ValueError(f"root {v} is fixed by the boundary condition")
        self.G = G
        self.sigma = sigma
        self.depth = depth  # None: full expansion
        self.node_budget = node_budget
        self.root = WeitzNode((v,))
        self._expanded = 1

    def children(self, node: WeitzNode) -> list[WeitzNode]:
        if node.is_leaf:
            return []
        if node._children is None:
            node._children = self._expand(node)
        return node._children

    def _expand(self, node: WeitzNode) -> list[WeitzNode]:
        walk = node.walk
        u = walk[-1]
        pred = walk[-2] if len(walk) > 1 else None
        where = {x: i for i, x in enumerate(walk)}
        out = []
        for x in self.G.adjacency[u]:
            if x == pred:
                continue
            child = walk + (x,)
            if x in where:
                exit_to = walk[where[x] + 1]
                spin = Spin.OCCUPIED if u > exit_to else Spin.UNOCCUPIED
                out.append(WeitzNode(child, spin, cycle_closing=True))
            elif x in self.sigma:
                out.append(WeitzNode(child, self.sigma.get(x)))
            else:
                truncated = self.depth is not None and len(child) - 1 >= self.depth
                out.append(WeitzNode(child, truncated=truncated))
        self._expanded += len(out)
        if self._expanded > self.node_budget:
            raise NodeBudgetExceeded(f"Weitz tree exceeded {self.node_budget} nodes")
        return out

    def iter_nodes(self):
        """Depth-first over every node, expanding lazily."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(self.children(node)))

    def level_counts(self) -> list[int]:
        """Free (unfixed) nodes per depth, truncated frontier included."""
        counts: list[int] = []
        for node in self.iter_nodes():
            if node.fixed is None:
                while len(counts) <= node.depth:
                    counts.append(0)
                counts[node.depth] += 1
        return counts

    def cycle_leaves(self) -> list[WeitzNode]:
        return [nd for nd in self.iter_nodes() if nd.cycle_closing]

    def evaluate(self, lam: float, frontier: Spin | None = Spin.UNOCCUPIED) -> float:
        """Root occupation ratio with truncated nodes pinned to ``frontier``
        (``None`` leaves them free, i.e. ratio ``lam``).

        Generic post-order evaluation of the node objects; the compiled path
        used by the approximation code is ``decay.marginal_interval``.
        """
        # occupied nodes hold the Spin marker rather than a float
        value: dict[int, float | Spin] = {}
        stack: list[tuple[WeitzNode, bool]] = [(self.root, False)]
        while stack:
            node, done = stack.pop()
            if node.fixed is Spin.OCCUPIED or (node.truncated and frontier is Spin.OCCUPIED):
                value[id(node)] = Spin.OCCUPIED
                continue
            if node.fixed is Spin.UNOCCUPIED or (node.truncated and frontier is Spin.UNOCCUPIED):
                value[id(node)] = 0.0
                continue
            if node.truncated:
                value[id(node)] = lam
                continue
            kids = self.children(node)
            if not done:
                stack.append((node, True))
                stack.extend((c, False) for c in kids)
                continue
            r = lam
            for c in kids:
                rc = value.pop(id(c))
                if rc is Spin.OCCUPIED:
                    r = 0.0
                    break
                r /= 1.0 + rc
            value[id(node)] = r
        root = value[id(self.root)]
        return 0.0 if root is Spin.OCCUPIED else root


def build_weitz_saw_tree(G: Graph, v: int, sigma: BoundaryCondition = EMPTY_BOUNDARY,
                         depth: int | None = None, node_budget: int = DEFAULT_NODE_BUDGET) -> WeitzSawTree:
    return WeitzSawTree(G, v, sigma, depth, node_budget)


# -- finite-memory branching matrix on Z^2 -------------------------------------

DIRECTIONS = "WSEN"


def _parse_ordering(ordering) -> tuple[int, ...]:
    if isinstance(ordering, str):
        ordering = [DIRECTIONS.index(ch) for ch in ordering.upper()]
    order = tuple(int(d) for d in ordering)
    if sorted(order) != [0, 1, 2, 3]:
        raise ValueError(f"ordering must be a permutation of {DIRECTIONS}, got {ordering!r}")
    return order


def all_orderings() -> list[str]:
    return ["".join(p) for p in itertools.permutations(DIRECTIONS)]


@dataclass(frozen=True)
class BranchingMatrix:
    """Transition counts between memory-``L`` walk states.

    ``keys`` packs each state as ``length << 32 | 2-bit steps`` (oldest step in
    the low bits, W=0 S=1 E=2 N=3); state 0 is the empty walk.
    """

    L: int
    mode: str
    ordering: str
    keys: np.ndarray
    matrix: sp.csr_matrix
    first_step_symmetry: bool = False

    @property
    def n_states(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def state(self, i: int) -> str:
        key = int(self.keys[i])
        k = key >> 32
        return "".join(DIRECTIONS[(key >> (2 * j)) & 3] for j in range(k))

    def to_coo_text(self) -> str:
        coo = self.matrix.tocoo()
        lines = [f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}"]
        order = np.lexsort((coo.col, coo.row))
        lines.extend(f"{coo.row[k]} {coo.col[k]} {int(coo.data[k])}" for k in order)
        return "\n".join(lines) + "\n"

    def level_count(self, ell: int) -> int:
        """``e_0^T M^ell 1``: number of memory-``L`` walks of length ``ell``
        (times 4 under first-step normalization)."""
        v = np.zeros(self.n_states)
        v[0] = 1.0
        for _ in range(ell):
            v = self.matrix.T @ v
        total = int(round(v.sum()))
        return 4 * total if self.first_step_symmetry else total


def branching_matrix(
    L: int,
    ordering="WSEN",
    mode: str = "plain",
    *,
    first_step_symmetry: bool = False,
    state_cap: int = DEFAULT_STATE_CAP,
    backend: str | None = None,
) -> BranchingMatrix:
    """Branching matrix of walks on Z^2 with no cycles of length ``<= L``.

    ``mode="weitz-pruned"`` also removes every state whose endpoint has a
    cycle-closing step, within the memory window, to a vertex ``x`` via a
    direction that comes after ``x``'s exit direction in ``ordering``: that
    leaf is occupied in the Weitz tree and pins its parent's ratio to 0.
    """
    if mode not in ("plain", "weitz-pruned"):
        raise ValueError(f"unknown mode {mode!r}")
    if not 2 <= L <= 16:
        raise ValueError("memory length L must be in [2, 16]")
    order = _parse_ordering(ordering)
    pruned = mode == "weitz-pruned"
    if first_step_symmetry and pruned:
        # rotating a walk also rotates the ordering, so the four first steps differ
        raise ValueError("first-step normalization is only valid in plain mode")
    rank = [0, 0, 0, 0]
    for pos, d in enumerate(order):
        rank[d] = pos
    kern = get_kernels(backend)
    keys, rows, cols = kern.branching_transitions(L, rank, pruned, 0 if first_step_symmetry else -1, state_cap)
    n = keys.shape[0]
    M = sp.csr_matrix((np.ones(rows.shape[0]), (rows, cols)), shape=(n, n))
    M.sum_duplicates()
    return BranchingMatrix(L, mode, "".join(DIRECTIONS[d] for d in order), keys, M, first_step_symmetry)


class PerronConvergenceError(RuntimeError):
    pass


def perron_root(M, tol: float = 1e-12, max_iter: int = 200_000) -> float:
    """Dominant real eigenvalue of a nonnegative matrix by power iteration on ``M + I``.

    The unit shift makes the Perron root strictly dominant in modulus, so the
    iteration converges even for periodic matrices; the estimate is the
    Rayleigh quotient and iteration stops when it changes by at most ``tol``.
    """
    if isinstance(M, BranchingMatrix):
        M = M.matrix
    A = sp.csr_matrix(M, dtype=np.float64) if sp.issparse(M) else sp.csr_matrix(np.asarray(M, dtype=np.float64))
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if n == 0:
        return 0.0
    if A.nnz and A.data.min() < 0:
        raise ValueError("matrix must be nonnegative")
    A = (A + sp.identity(n, format="csr")).tocsr()
    x = np.ones(n) / math.sqrt(n)
    prev = math.nan
    for _ in range(max_iter):
        y = A @ x
        est = float(x @ y)  # x has unit norm
        norm = float(np.linalg.norm(y))
        if norm == 0:
            return -1.0
        x = y / norm
        if abs(est - prev) <= tol * max(1.0, abs(est)):
            return est - 1.0
        prev = est
    raise PerronConvergenceError(f"power iteration did not converge in {max_iter} iterations")


def best_weitz_gamma(L: int, orderings: Iterable[str] | None = None, **kw) -> tuple[float, str, dict[str, float]]:
    """Smallest pruned Perron root over direction orderings (default: all 24)."""
    results = {}
    for o in orderings or all_orderings():
        results[o] = perron_root(branching_matrix(L, o, "weitz-pruned", **kw))
    best = min(results, key=results.get)
    return results[best], best, results
