"""Pure-Python kernels.

Reference implementations of the inner loops; ``_ckernels.pyx`` mirrors these
signatures one for one.  Graphs arrive as CSR arrays with ascending rows.
"""
from __future__ import annotations

import numpy as np

from ._errors import NodeBudgetExceeded, StateCapExceeded

# W, S, E, N as (dx, dy); reversing a step is (d + 2) % 4
STEPS = ((-1, 0), (0, -1), (1, 0), (0, 1))


def saw_counts(indptr, indices, root, lmax, blocked, bridge_slot, tables, node_budget):
    """Number of self-avoiding walks from ``root`` of each length ``0..lmax``.

    Vertices with ``blocked[v]`` set count as already visited.  A CSR slot with
    ``bridge_slot[s] = b >= 0`` is not descended into: ``tables[b, i]`` walks of
    length ``i`` start on its far side and are added directly.
    Returns ``(counts, nodes_expanded)``.
    """
    indptr = [int(x) for x in indptr]
    indices = [int(x) for x in indices]
    slot_to_bridge = [int(x) for x in bridge_slot]
    counts = [0] * (lmax + 1)
    counts[0] = 1
    visited = [bool(x) for x in blocked]
    visited[root] = True
    nodes = 1
    # stack of (vertex, next slot to try); walk length == len(stack) - 1
    stack = [[root, indptr[root]]]
    while stack:
        top = stack[-1]
        u, s = top
        depth = len(stack) - 1
        if depth == lmax or s == indptr[u + 1]:
            visited[u] = False
            stack.pop()
            continue
        top[1] = s + 1
        x = indices[s]
        if visited[x]:
            continue
        b = slot_to_bridge[s]
        if b >= 0:
            row = tables[b]
            for i in range(lmax - depth):
                counts[depth + 1 + i] += int(row[i])
            continue
        counts[depth + 1] += 1
        nodes += 1
        if nodes > node_budget:
            raise NodeBudgetExceeded(f"SAW enumeration exceeded {node_budget} nodes")
        visited[x] = True
        stack.append([x, indptr[x]])
    return np.array(counts, dtype=np.int64), nodes


def weitz_interval(indptr, indices, spins, root, depth, lam, node_budget):
    """Evaluate the Weitz SAW tree of ``root`` truncated at ``depth``.

    ``spins``: 0 free, 1 occupied, 2 unoccupied.  A cycle closing at an earlier
    walk vertex ``x`` from endpoint ``u`` is an occupied leaf when ``u`` comes
    after the walk's exit neighbor of ``x`` in ``x``'s (ascending) neighbor
    order, and an unoccupied leaf otherwise.  Free nodes at ``depth`` are fixed
    occupied for the first bound and unoccupied for the second.

    Returns ``(r_occ, r_unocc, nodes, level_counts)``.
    """
    indptr = [int(x) for x in indptr]
    indices = [int(x) for x in indices]
    spins = [int(x) for x in spins]
    n = len(spins)
    pos = [-1] * n
    walk = [0] * (min(depth, n) + 2)
    levels = [0] * (depth + 1)
    nodes = 0

    # frame: [vertex, next slot, prod_a, prod_b, truncated child seen]
    def open_frame(u, t):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise NodeBudgetExceeded(f"Weitz tree exceeded {node_budget} nodes")
        levels[t] += 1
        pos[u] = t
        walk[t] = u
        pred = walk[t - 1] if t > 0 else -1
        for s in range(indptr[u], indptr[u + 1]):
            x = indices[s]
            if x == pred:
                continue
            if pos[x] >= 0:
                if u > walk[pos[x] + 1]:
                    return None  # occupied cycle leaf forces the ratio to 0
            elif spins[x] == 1:
                return None
        return [u, indptr[u], 1.0, 1.0, False]

    root_frame = open_frame(root, 0)
    if root_frame is None:
        pos[root] = -1
        return 0.0, 0.0, nodes, np.array(levels, dtype=np.int64)
    stack = [root_frame]
    result = (0.0, 0.0)
    while True:
        fr = stack[-1]
        u = fr[0]
        t = len(stack) - 1
        end = indptr[u + 1]
        pred = walk[t - 1] if t > 0 else -1
        pushed = False
        while fr[1] < end:
            x = indices[fr[1]]
            fr[1] += 1
            if x == pred or pos[x] >= 0 or spins[x] != 0:
                continue
            if t + 1 == depth:
                fr[4] = True  # truncated child fixed occupied in the first bound
                nodes += 1
                levels[t + 1] += 1
                if nodes > node_budget:
                    raise NodeBudgetExceeded(f"Weitz tree exceeded {node_budget} nodes")
                continue
            child = open_frame(x, t + 1)
            if child is None:
                pos[x] = -1
                continue  # child ratio 0 contributes a factor 1
            stack.append(child)
            pushed = True
            break
        if pushed:
            continue
        ra = 0.0 if fr[4] else lam * fr[2]
        rb = lam * fr[3]
        pos[u] = -1
        stack.pop()
        if not stack:
            result = (ra, rb)
            break
        parent = stack[-1]
        parent[2] /= 1.0 + ra
        parent[3] /= 1.0 + rb
    return result[0], result[1], nodes, np.array(levels, dtype=np.int64)


def branching_transitions(L, rank, pruned, first_step, state_cap):
    """Breadth-first construction of the memory-``L`` walk automaton on Z^2.

    States are the last ``L-1`` steps (fewer near the start) encoded as
    ``length << 32 | packed 2-bit steps``; state 0 is the empty walk.  A step is
    allowed if the new endpoint avoids the ``L`` remembered vertices.  With
    ``pruned``, a new endpoint ``q`` is dropped when some remembered vertex
    ``x`` adjacent to ``q`` has ``rank[dir(x->q)] > rank[exit step of x]``.
    Returns ``(keys, rows, cols)`` as int64/int32 arrays.
    """
    keep = L - 1
    index = {0: 0}
    keys = [0]
    rows: list[int] = []
    cols: list[int] = []
    head = 0
    while head < len(keys):
        key = keys[head]
        k = key >> 32
        bits = key & 0xFFFFFFFF
        steps = [(bits >> (2 * i)) & 3 for i in range(k)]
        pts = [(0, 0)]
        for d in steps:
            px, py = pts[-1]
            pts.append((px + STEPS[d][0], py + STEPS[d][1]))
        where = {p: j for j, p in enumerate(pts)}
        ex, ey = pts[-1]
        for d in range(4):
            if k == 0 and first_step >= 0 and d != first_step:
                continue
            if k and d == (steps[-1] + 2) % 4:
                continue
            q = (ex + STEPS[d][0], ey + STEPS[d][1])
            if q in where:
                continue
            if pruned and _killed(q, where, steps, k, rank):
                continue
            nsteps = steps + [d]
            if len(nsteps) > keep:
                nsteps = nsteps[1:]
            nkey = len(nsteps) << 32
            for i, sd in enumerate(nsteps):
                nkey |= sd << (2 * i)
            j = index.get(nkey)
            if j is None:
                j = len(keys)
                if j >= state_cap:
                    raise StateCapExceeded(f"branching matrix exceeded {state_cap} states")
                index[nkey] = j
                keys.append(nkey)
            rows.append(head)
            cols.append(j)
        head += 1
    return np.array(keys, dtype=np.int64), np.array(rows, dtype=np.int32), np.array(cols, dtype=np.int32)


def _killed(q, where, steps, k, rank):
    qx, qy = q
    for c in range(4):
        j = where.get((qx + STEPS[c][0], qy + STEPS[c][1]))
        if j is None or j == k:
            continue
        # closing direction seen from x is the reverse of c
        if rank[(c + 2) % 4] > rank[steps[j]]:
            return True
    return False
