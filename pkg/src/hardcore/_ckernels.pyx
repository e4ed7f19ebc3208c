# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled kernels; same signatures and results as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int8_t, int32_t, int64_t, uint8_t
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector
from cython.operator cimport dereference as deref

from ._errors import NodeBudgetExceeded, StateCapExceeded

cnp.import_array()

cdef long long LOW32 = 0xFFFFFFFF
cdef int DX[4]
cdef int DY[4]
DX[:] = [-1, 0, 1, 0]
DY[:] = [0, -1, 0, 1]


def saw_counts(const int32_t[::1] indptr, const int32_t[::1] indices, int root, int lmax,
               const uint8_t[::1] blocked, const int32_t[::1] bridge_slot,
               const int64_t[:, ::1] tables, long long node_budget):
    cdef Py_ssize_t n = blocked.shape[0]
    counts_arr = np.zeros(lmax + 1, dtype=np.int64)
    cdef int64_t[::1] counts = counts_arr
    cdef uint8_t[::1] visited = np.array(blocked, dtype=np.uint8)
    cdef int32_t[::1] vert = np.empty(lmax + 1, dtype=np.int32)
    cdef int32_t[::1] slot = np.empty(lmax + 1, dtype=np.int32)
    cdef int depth = 0, u, x, s, b, i
    cdef long long nodes = 1
    counts[0] = 1
    visited[root] = 1
    vert[0] = root
    slot[0] = indptr[root]
    with nogil:
        while depth >= 0:
            u = vert[depth]
            s = slot[depth]
            if depth == lmax or s == indptr[u + 1]:
                visited[u] = 0
                depth -= 1
                continue
            slot[depth] = s + 1
            x = indices[s]
            if visited[x]:
                continue
            b = bridge_slot[s]
            if b >= 0:
                for i in range(lmax - depth):
                    counts[depth + 1 + i] += tables[b, i]
                continue
            counts[depth + 1] += 1
            nodes += 1
            if nodes > node_budget:
                break
            visited[x] = 1
            depth += 1
            vert[depth] = x
            slot[depth] = indptr[x]
    if nodes > node_budget:
        raise NodeBudgetExceeded(f"SAW enumeration exceeded {node_budget} nodes")
    return counts_arr, nodes


cdef inline bint _forced_zero(const int32_t[::1] indptr, const int32_t[::1] indices,
                              const int8_t[::1] spins, int32_t[::1] pos, int32_t[::1] walk,
                              int u, int t) nogil:
    cdef int pred = walk[t - 1] if t > 0 else -1
    cdef int s, x
    for s in range(indptr[u], indptr[u + 1]):
        x = indices[s]
        if x == pred:
            continue
        if pos[x] >= 0:
            if u > walk[pos[x] + 1]:
                return True
        elif spins[x] == 1:
            return True
    return False


def weitz_interval(const int32_t[::1] indptr, const int32_t[::1] indices,
                   const int8_t[::1] spins, int root, int depth, double lam,
                   long long node_budget):
    cdef Py_ssize_t n = spins.shape[0]
    cdef int cap = min(depth, <int>n) + 2
    cdef int32_t[::1] pos = np.full(n, -1, dtype=np.int32)
    cdef int32_t[::1] walk = np.zeros(cap, dtype=np.int32)
    cdef int32_t[::1] slot = np.zeros(cap, dtype=np.int32)
    cdef double[::1] prod_a = np.ones(cap, dtype=np.float64)
    cdef double[::1] prod_b = np.ones(cap, dtype=np.float64)
    cdef uint8_t[::1] trunc = np.zeros(cap, dtype=np.uint8)
    levels_arr = np.zeros(depth + 1, dtype=np.int64)
    cdef int64_t[::1] levels = levels_arr
    cdef long long nodes = 1
    cdef int t = 0, u, x, pred, end
    cdef double ra = 0.0, rb = 0.0
    cdef bint pushed, over = False

    levels[0] = 1
    pos[root] = 0
    walk[0] = root
    if _forced_zero(indptr, indices, spins, pos, walk, root, 0):
        return 0.0, 0.0, nodes, levels_arr
    slot[0] = indptr[root]
    with nogil:
        while True:
            u = walk[t]
            end = indptr[u + 1]
            pred = walk[t - 1] if t > 0 else -1
            pushed = False
            while slot[t] < end:
                x = indices[slot[t]]
                slot[t] += 1
                if x == pred or pos[x] >= 0 or spins[x] != 0:
                    continue
                nodes += 1
                levels[t + 1] += 1
                if nodes > node_budget:
                    over = True
                    break
                if t + 1 == depth:
                    trunc[t] = 1
                    continue
                pos[x] = t + 1
                walk[t + 1] = x
                if _forced_zero(indptr, indices, spins, pos, walk, x, t + 1):
                    pos[x] = -1
                    continue
                t += 1
                slot[t] = indptr[x]
                prod_a[t] = 1.0
                prod_b[t] = 1.0
                trunc[t] = 0
                pushed = True
                break
            if over:
                break
            if pushed:
                continue
            ra = 0.0 if trunc[t] else lam * prod_a[t]
            rb = lam * prod_b[t]
            pos[u] = -1
            if t == 0:
                break
            t -= 1
            prod_a[t] /= 1.0 + ra
            prod_b[t] /= 1.0 + rb
    if over:
        raise NodeBudgetExceeded(f"Weitz tree exceeded {node_budget} nodes")
    return ra, rb, nodes, levels_arr


cdef inline long long _pack(int32_t* st, int k) nogil:
    cdef long long key = (<long long>k) << 32
    cdef int i
    for i in range(k):
        key |= (<long long>st[i]) << (2 * i)
    return key


def branching_transitions(int L, rank, bint pruned, int first_step, long long state_cap):
    cdef int keep = L - 1
    cdef int rk[4]
    cdef int i
    for i in range(4):
        rk[i] = int(rank[i]) if pruned else 0
    cdef unordered_map[long long, int64_t] index
    cdef vector[long long] keys
    cdef vector[int32_t] rows, cols
    cdef int32_t steps[40]
    cdef int32_t nsteps[40]
    cdef int px[41]
    cdef int py[41]
    cdef long long key, bits, nkey
    cdef int k, d, c, j, jj, qx, qy, nx, ny, nk
    cdef size_t head = 0
    cdef bint hit, killed, over = False
    cdef unordered_map[long long, int64_t].iterator it

    if L < 2 or L > 16:
        raise ValueError("memory length must be in [2, 16]")
    index[0] = 0
    keys.push_back(0)
    with nogil:
        while head < keys.size():
            key = keys[head]
            k = <int>(key >> 32)
            bits = key & LOW32
            px[0] = 0
            py[0] = 0
            for i in range(k):
                steps[i] = <int32_t>((bits >> (2 * i)) & 3)
                px[i + 1] = px[i] + DX[steps[i]]
                py[i + 1] = py[i] + DY[steps[i]]
            for d in range(4):
                if k == 0 and first_step >= 0 and d != first_step:
                    continue
                if k > 0 and d == (steps[k - 1] + 2) % 4:
                    continue
                qx = px[k] + DX[d]
                qy = py[k] + DY[d]
                hit = False
                for j in range(k + 1):
                    if px[j] == qx and py[j] == qy:
                        hit = True
                        break
                if hit:
                    continue
                if pruned:
                    killed = False
                    for c in range(4):
                        nx = qx + DX[c]
                        ny = qy + DY[c]
                        for jj in range(k):
                            if px[jj] == nx and py[jj] == ny:
                                if rk[(c + 2) % 4] > rk[steps[jj]]:
                                    killed = True
                                break
                        if killed:
                            break
                    if killed:
                        continue
                nk = 0
                for i in range(k):
                    nsteps[nk] = steps[i]
                    nk += 1
                nsteps[nk] = d
                nk += 1
                if nk > keep:
                    nkey = _pack(&nsteps[1], nk - 1)
                else:
                    nkey = _pack(&nsteps[0], nk)
                it = index.find(nkey)
                if it == index.end():
                    j = <int>keys.size()
                    if j >= state_cap:
                        over = True
                        break
                    index[nkey] = j
                    keys.push_back(nkey)
                else:
                    j = <int>(deref(it).second)
                rows.push_back(<int32_t>head)
                cols.push_back(j)
            if over:
                break
            head += 1
    if over:
        raise StateCapExceeded(f"branching matrix exceeded {state_cap} states")
    keys_arr = np.empty(keys.size(), dtype=np.int64)
    rows_arr = np.empty(rows.size(), dtype=np.int32)
    cols_arr = np.empty(cols.size(), dtype=np.int32)
    cdef int64_t[::1] kv = keys_arr
    cdef int32_t[::1] rv = rows_arr
    cdef int32_t[::1] cv = cols_arr
    for i in range(<int>keys.size()):
        kv[i] = keys[i]
    for i in range(<int>rows.size()):
        rv[i] = rows[i]
        cv[i] = cols[i]
    return keys_arr, rows_arr, cols_arr
