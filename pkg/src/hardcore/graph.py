"""Graphs, boundary conditions, generators and text/JSON I/O.

Vertex ids are dense integers ``0..n-1``.  Neighbor lists are kept sorted
ascending; that order is also the per-vertex edge ordering used when building
Weitz self-avoiding-walk trees.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np


class GraphError(ValueError):
    """Malformed graph input or invalid graph operation."""


class BoundaryError(ValueError):
    """Boundary condition is not a partial independent set of the graph."""


class Spin(Enum):
    OCCUPIED = 1
    UNOCCUPIED = 2


def check_activity(lam: float) -> float:
    lam = float(lam)
    if not (lam > 0 and math.isfinite(lam)):
        raise ValueError(f"activity must be positive and finite, got {lam!r}")
    return lam


class Graph:
    """Finite simple undirected graph with sorted adjacency lists.

    Instances are treated as immutable once built.
    """

    __slots__ = ("n", "adjacency", "labels", "_csr")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = (), labels=None):
        n = int(n)
        if n < 0:
            raise GraphError("vertex count must be nonnegative")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"vertex index out of range in edge ({u}, {v})")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if v in nbrs[u]:
                raise GraphError(f"duplicate edge ({min(u, v)}, {max(u, v)})")
            nbrs[u].add(v)
            nbrs[v].add(u)
        self.n = n
        self.adjacency: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in nbrs)
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            if len(labels) != n:
                raise GraphError("labels must have one entry per vertex")
        self.labels = labels
        self._csr = None

    @classmethod
    def from_adjacency(cls, adjacency: Sequence[Sequence[int]], labels=None) -> "Graph":
        edges = [(u, v) for u, row in enumerate(adjacency) for v in row if u < v]
        return cls(len(adjacency), edges, labels)

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, row in enumerate(self.adjacency) for v in row if u < v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` int32 arrays; rows are the sorted neighbor lists."""
        if self._csr is None:
            indptr = np.zeros(self.n + 1, dtype=np.int32)
            indptr[1:] = np.cumsum([len(a) for a in self.adjacency])
            indices = np.fromiter(
                (v for row in self.adjacency for v in row), dtype=np.int32, count=int(indptr[-1])
            )
            self._csr = (indptr, indices)
        return self._csr

    def induced(self, keep: Sequence[int]) -> tuple["Graph", dict[int, int]]:
        """Subgraph on ``keep`` relabelled in ascending original order."""
        keep = sorted(set(keep))
        new_id = {v: i for i, v in enumerate(keep)}
        edges = [(new_id[u], new_id[v]) for u, v in self.edges() if u in new_id and v in new_id]
        labels = None if self.labels is None else [self.labels[v] for v in keep]
        return Graph(len(keep), edges, labels), new_id

    def disjoint_union(self, other: "Graph") -> "Graph":
        edges = self.edges() + [(u + self.n, v + self.n) for u, v in other.edges()]
        return Graph(self.n + other.n, edges)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.adjacency == other.adjacency

    def __hash__(self):
        return hash((self.n, self.adjacency))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class BoundaryCondition:
    """Partial assignment ``vertex -> Spin``; occupied vertices must be independent."""

    assignment: Mapping[int, Spin] = field(default_factory=dict)

    @classmethod
    def of(cls, occupied: Iterable[int] = (), unoccupied: Iterable[int] = ()) -> "BoundaryCondition":
        a: dict[int, Spin] = {}
        for v in unoccupied:
            a[int(v)] = Spin.UNOCCUPIED
        for v in occupied:
            v = int(v)
            if a.get(v) is Spin.UNOCCUPIED:
                raise BoundaryError(f"vertex {v} listed as both occupied and unoccupied")
            a[v] = Spin.OCCUPIED
        return cls(a)

    @property
    def occupied(self) -> list[int]:
        return sorted(v for v, s in self.assignment.items() if s is Spin.OCCUPIED)

    @property
    def unoccupied(self) -> list[int]:
        return sorted(v for v, s in self.assignment.items() if s is Spin.UNOCCUPIED)

    def __contains__(self, v) -> bool:
        return v in self.assignment

    def get(self, v):
        return self.assignment.get(v)

    def validate(self, G: Graph) -> None:
        for v in self.assignment:
            if not (0 <= v < G.n):
                raise BoundaryError(f"boundary vertex {v} out of range")
        occ = set(self.occupied)
        for u in occ:
            for w in G.adjacency[u]:
                if w in occ:
                    raise BoundaryError(f"adjacent vertices {u} and {w} both occupied")

    def spin_array(self, n: int) -> np.ndarray:
        """int8 array: 0 free, 1 occupied, 2 unoccupied."""
        out = np.zeros(n, dtype=np.int8)
        for v, s in self.assignment.items():
            out[v] = s.value
        return out

    def to_json(self) -> dict:
        return {"occupied": self.occupied, "unoccupied": self.unoccupied}

    @classmethod
    def from_json(cls, data: Mapping) -> "BoundaryCondition":
        return cls.of(data.get("occupied", ()), data.get("unoccupied", ()))


EMPTY_BOUNDARY = BoundaryCondition()

REMOVED = -1


@dataclass(frozen=True)
class ReducedGraph:
    graph: Graph
    log_prefactor: float
    vertex_map: dict[int, int]  # original id -> new id, or REMOVED


def reduce_by_boundary(G: Graph, sigma: BoundaryCondition, lam: float = 1.0) -> ReducedGraph:
    """Condition on ``sigma``: occupied ``u`` deletes its closed neighborhood and
    contributes a factor ``lam``; unoccupied ``u`` is deleted."""
    lam = check_activity(lam)
    sigma.validate(G)
    gone = set()
    k = 0
    for v, s in sigma.assignment.items():
        gone.add(v)
        if s is Spin.OCCUPIED:
            k += 1
            gone.update(G.adjacency[v])
    keep = [v for v in range(G.n) if v not in gone]
    H, new_id = G.induced(keep)
    vmap = {v: new_id.get(v, REMOVED) for v in range(G.n)}
    return ReducedGraph(H, k * math.log(lam), vmap)


# -- I/O --------------------------------------------------------------------

def parse_graph(text: str) -> Graph:
    """Parse the edge-list format: header ``n m`` then ``m`` lines ``u v``."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise GraphError("empty graph text")
    head = lines[0].split()
    if len(head) != 2:
        raise GraphError(f"malformed header {lines[0]!r}")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise GraphError(f"malformed header {lines[0]!r}") from None
    if n < 0 or m < 0:
        raise GraphError("malformed header: negative counts")
    body = lines[1:]
    if len(body) != m:
        raise GraphError(f"header declares {m} edges, found {len(body)}")
    edges = []
    for ln in body:
        parts = ln.split()
        if len(parts) != 2:
            raise GraphError(f"malformed edge line {ln!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise GraphError(f"malformed edge line {ln!r}") from None
    return Graph(n, edges)


def serialize_graph(G: Graph) -> str:
    """Canonical edge-list text (edges sorted, ``u < v``)."""
    out = [f"{G.n} {G.m}"]
    out.extend(f"{u} {v}" for u, v in G.edges())
    return "\n".join(out) + "\n"


def graph_from_json(data: Mapping) -> Graph:
    try:
        return Graph(int(data["n"]), [tuple(e) for e in data.get("edges", [])], data.get("labels"))
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph JSON: {exc}") from None


def graph_to_json(G: Graph) -> dict:
    out = {"n": G.n, "edges": [list(e) for e in G.edges()]}
    if G.labels is not None:
        out["labels"] = list(G.labels)
    return out


def load_graph(path) -> Graph:
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return graph_from_json(json.loads(text))
    return parse_graph(text)


def load_boundary(path) -> BoundaryCondition:
    with open(path) as fh:
        return BoundaryCondition.from_json(json.load(fh))


# -- generators -------------------------------------------------------------

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    # Steele/Lea/Flood SplitMix64 finalizer; uint64 arithmetic wraps mod 2^64.
    x = x + _GOLDEN
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def pair_uniforms(seed: int, index: np.ndarray) -> np.ndarray:
    """Uniform [0,1) draws, one independent stream per pair index.

    Draw ``k`` is ``splitmix64(splitmix64(seed) + (k+1)*golden)`` keeping the
    top 53 bits, so the value of a pair never depends on evaluation order.
    """
    base = _splitmix64(np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))[0]
    with np.errstate(over="ignore"):
        x = _splitmix64(base + (index.astype(np.uint64) + np.uint64(1)) * _GOLDEN)
    return (x >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def generate_gnp(n: int, d: float, seed: int) -> Graph:
    """Erdos-Renyi ``G(n, d/n)``, bit-exact for equal ``(n, d, seed)``."""
    if n < 1:
        raise GraphError("n must be at least 1")
    if d < 0:
        raise GraphError("d must be nonnegative")
    p = d / n
    if p > 1:
        raise GraphError(f"edge probability d/n = {p} exceeds 1")
    edges: list[tuple[int, int]] = []
    if p > 0 and n > 1:
        # pairs (u, v), u < v, in lexicographic order; index k enumerates them
        for u in range(n - 1):
            start = u * n - u * (u + 1) // 2
            idx = np.arange(start, start + n - 1 - u, dtype=np.int64)
            hit = np.nonzero(pair_uniforms(seed, idx) < p)[0]
            edges.extend((u, u + 1 + int(j)) for j in hit)
    return Graph(n, edges)


def _cartesian(extents: Sequence[int]) -> Graph:
    dims = list(extents)
    strides = [1] * len(dims)
    for i in range(len(dims) - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    n = math.prod(dims)
    coords = np.indices(dims).reshape(len(dims), -1).T
    edges = []
    for idx, c in enumerate(coords):
        for axis, ext in enumerate(dims):
            if c[axis] + 1 < ext:
                edges.append((idx, idx + strides[axis]))
    return Graph(n, edges)


def generate_lattice_patch(kind: str, extents: Sequence[int]) -> Graph:
    """Open-boundary patch of the cartesian, triangular or honeycomb lattice.

    Triangular patches are square grids plus the ``(i, j)-(i+1, j+1)`` diagonal;
    honeycomb patches use the brick-wall embedding (vertical bond at even ``i+j``).
    Vertices are numbered row-major.
    """
    extents = [int(e) for e in extents]
    if not extents or any(e < 1 for e in extents):
        raise GraphError("extents must be a nonempty sequence of positive counts")
    if kind == "cartesian":
        return _cartesian(extents)
    if kind not in ("triangular", "honeycomb"):
        raise GraphError(f"unsupported lattice kind {kind!r}")
    if len(extents) != 2:
        raise GraphError(f"{kind} patches take exactly 2 extents")
    rows, cols = extents
    vid = lambda i, j: i * cols + j  # noqa: E731
    edges = []
    for i in range(rows):
        for j in range(cols):
            if j + 1 < cols:
                edges.append((vid(i, j), vid(i, j + 1)))
            if i + 1 < rows:
                if kind == "triangular" or (i + j) % 2 == 0:
                    edges.append((vid(i, j), vid(i + 1, j)))
                if kind == "triangular" and j + 1 < cols:
                    edges.append((vid(i, j), vid(i + 1, j + 1)))
    return Graph(rows * cols, edges)


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def regular_tree(arity: int, depth: int, root_degree: int | None = None) -> Graph:
    """Rooted tree: the root has ``root_degree`` (default ``arity``) children, every
    other internal vertex ``arity`` children, leaves at ``depth``."""
    root_degree = arity if root_degree is None else root_degree
    edges = []
    frontier = [0]
    nxt = 1
    for level in range(depth):
        new = []
        for u in frontier:
            for _ in range(root_degree if level == 0 else arity):
                edges.append((u, nxt))
                new.append(nxt)
                nxt += 1
        frontier = new
    return Graph(nxt, edges)
