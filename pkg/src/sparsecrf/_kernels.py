"""Serial numba kernels for the numeric hot paths.

Everything here is deliberately single-threaded: results must be
byte-identical regardless of how many threads the host process is
allowed to use, so no BLAS calls and no parallel numba.
"""

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dep, fallback for safety
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


@njit(cache=True)
def pairwise_dots(A, B):
    """Dot products between every row of A (n,d) and every row of B (q,d)."""
    n, d = A.shape
    q = B.shape[0]
    out = np.empty((n, q))
    for i in range(n):
        for j in range(q):
            acc = 0.0
            for k in range(d):
                acc += A[i, k] * B[j, k]
            out[i, j] = acc
    return out


@njit(cache=True)
def assign_additive(vals, pos, cstats, cpos):
    """Nearest centroid under ||S - mu_S|| + ||p - mu_p|| per node.

    Returns (assignment, distance-to-assigned). Ties go to the lowest
    cluster index.
    """
    n, d = vals.shape
    q = cstats.shape[0]
    assign = np.empty(n, dtype=np.int64)
    dist = np.empty(n)
    for i in range(n):
        best = np.inf
        best_c = 0
        for c in range(q):
            acc = 0.0
            for k in range(d):
                diff = vals[i, k] - cstats[c, k]
                acc += diff * diff
            acc_p = 0.0
            for k in range(2):
                diff = pos[i, k] - cpos[c, k]
                acc_p += diff * diff
            val = np.sqrt(acc) + np.sqrt(acc_p)
            if val < best:
                best = val
                best_c = c
        assign[i] = best_c
        dist[i] = best
    return assign, dist


@njit(cache=True)
def _bisect_right(arr, lo, hi, x):
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True)
def select_cluster_members(
    owners,
    cluster_ids,
    counts,
    members_flat,
    members_ptr,
    excl_flat,
    excl_ptr,
    assignment,
    uniforms,
):
    """Draw, for each (owner, cluster) cell, `counts` distinct members.

    Candidates for owner l in cluster c are the members of c with index
    greater than l, minus the owner's excluded partners assigned to c.
    Selection is uniform without replacement (Floyd's algorithm) and
    consumes exactly counts[idx] entries of `uniforms` per cell, in cell
    order, so the draw is reproducible for a fixed uniform stream.
    """
    total = 0
    for idx in range(counts.shape[0]):
        total += counts[idx]
    out_i = np.empty(total, dtype=np.int64)
    out_j = np.empty(total, dtype=np.int64)
    max_k = 0
    for idx in range(counts.shape[0]):
        if counts[idx] > max_k:
            max_k = counts[idx]
    picks = np.empty(max(max_k, 1), dtype=np.int64)
    max_excl = 1
    for l in range(excl_ptr.shape[0] - 1):
        if excl_ptr[l + 1] - excl_ptr[l] > max_excl:
            max_excl = excl_ptr[l + 1] - excl_ptr[l]
    excl_pos = np.empty(max_excl, dtype=np.int64)

    u_at = 0
    out_at = 0
    for idx in range(counts.shape[0]):
        k = counts[idx]
        if k == 0:
            continue
        l = owners[idx]
        c = cluster_ids[idx]
        m_lo = members_ptr[c]
        m_hi = members_ptr[c + 1]
        start = _bisect_right(members_flat, m_lo, m_hi, l)
        base = m_hi - start

        # positions (relative to start) of excluded higher-index partners in c
        n_excl = 0
        for e_at in range(excl_ptr[l], excl_ptr[l + 1]):
            e = excl_flat[e_at]
            if assignment[e] == c:
                pos = _bisect_right(members_flat, start, m_hi, e) - 1 - start
                excl_pos[n_excl] = pos
                n_excl += 1
        # insertion sort of the (tiny) exclusion positions
        for a in range(1, n_excl):
            key = excl_pos[a]
            b = a - 1
            while b >= 0 and excl_pos[b] > key:
                excl_pos[b + 1] = excl_pos[b]
                b -= 1
            excl_pos[b + 1] = key

        pool = base - n_excl
        # Floyd's sampling of k distinct values from [0, pool)
        n_picked = 0
        for step in range(pool - k, pool):
            t = int(uniforms[u_at] * (step + 1))
            u_at += 1
            if t > step:
                t = step
            dup = False
            for a in range(n_picked):
                if picks[a] == t:
                    dup = True
                    break
            picks[n_picked] = step if dup else t
            n_picked += 1

        for a in range(k):
            x = picks[a]
            for b in range(n_excl):
                if excl_pos[b] <= x:
                    x += 1
            out_i[out_at] = l
            out_j[out_at] = members_flat[start + x]
            out_at += 1

    return out_i[:out_at], out_j[:out_at]


@njit(cache=True)
def dinic_max_flow(n_nodes, s, t, arc_to, arc_cap, csr_ptr, csr_arcs):
    """Exact max-flow on a residual arc list (arc i and i^1 are a pair).

    Mutates arc_cap in place to the terminal residual capacities and
    returns the flow value. Deterministic given the arc ordering.
    """
    level = np.empty(n_nodes, dtype=np.int64)
    it = np.empty(n_nodes, dtype=np.int64)
    queue = np.empty(n_nodes, dtype=np.int64)
    path_arcs = np.empty(n_nodes + 1, dtype=np.int64)
    path_nodes = np.empty(n_nodes + 1, dtype=np.int64)

    flow = 0.0
    while True:
        # BFS levels over positive residual arcs
        level[:] = -1
        level[s] = 0
        queue[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            for a in range(csr_ptr[v], csr_ptr[v + 1]):
                e = csr_arcs[a]
                w = arc_to[e]
                if arc_cap[e] > 0.0 and level[w] == -1:
                    level[w] = level[v] + 1
                    queue[tail] = w
                    tail += 1
        if level[t] == -1:
            break

        for v in range(n_nodes):
            it[v] = csr_ptr[v]

        while True:
            # walk an admissible path from s with current-arc pointers
            v = s
            depth = 0
            path_nodes[0] = s
            reached = False
            dead = False
            while True:
                if v == t:
                    reached = True
                    break
                advanced = False
                while it[v] < csr_ptr[v + 1]:
                    e = csr_arcs[it[v]]
                    w = arc_to[e]
                    if arc_cap[e] > 0.0 and level[w] == level[v] + 1:
                        path_arcs[depth] = e
                        depth += 1
                        path_nodes[depth] = w
                        v = w
                        advanced = True
                        break
                    it[v] += 1
                if advanced:
                    continue
                # dead end: retire node and back up one step
                if v == s:
                    dead = True
                    break
                level[v] = -1
                depth -= 1
                v = path_nodes[depth]
            if dead:
                break
            if reached:
                delta = arc_cap[path_arcs[0]]
                for a in range(1, depth):
                    if arc_cap[path_arcs[a]] < delta:
                        delta = arc_cap[path_arcs[a]]
                for a in range(depth):
                    e = path_arcs[a]
                    arc_cap[e] -= delta
                    arc_cap[e ^ 1] += delta
                flow += delta
    return flow


@njit(cache=True)
def residual_reaches_sink(n_nodes, t, arc_to, arc_cap, csr_ptr, csr_arcs):
    """Mark nodes with a positive-residual path to the sink."""
    reach = np.zeros(n_nodes, dtype=np.bool_)
    queue = np.empty(n_nodes, dtype=np.int64)
    reach[t] = True
    queue[0] = t
    head = 0
    tail = 1
    while head < tail:
        w = queue[head]
        head += 1
        for a in range(csr_ptr[w], csr_ptr[w + 1]):
            f = csr_arcs[a]  # arc w -> u; its pair u -> w carries the residual
            u = arc_to[f]
            if not reach[u] and arc_cap[f ^ 1] > 0.0:
                reach[u] = True
                queue[tail] = u
                tail += 1
    return reach
