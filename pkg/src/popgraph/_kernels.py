"""Compiled inner loops: Fenwick tree over integer weights and the edge-attachment chain."""
import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_STALLED = 1


@njit(cache=True)
def fenwick_build(weights):
    n = weights.size
    tree = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        tree[i + 1] += weights[i]
        parent = i + 1 + ((i + 1) & -(i + 1))
        if parent <= n:
            tree[parent] += tree[i + 1]
    return tree


@njit(cache=True)
def fenwick_add(tree, i, delta):
    k = i + 1
    n = tree.size - 1
    while k <= n:
        tree[k] += delta
        k += k & -k


@njit(cache=True)
def fenwick_prefix(tree, i):
    """Sum of weights[0:i]."""
    s = 0
    k = i
    while k > 0:
        s += tree[k]
        k -= k & -k
    return s


@njit(cache=True)
def fenwick_find(tree, u):
    """Smallest index j with prefix(j + 1) > u, for 0 <= u < total."""
    n = tree.size - 1
    pos = 0
    step = 1
    while step * 2 <= n:
        step *= 2
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] <= u:
            pos = nxt
            u -= tree[nxt]
        step //= 2
    return pos


@njit(cache=True)
def attach_edges(tau0, m, n_edges, seed):
    """Run the popularity-weighted attachment chain for `n_edges` steps.

    A group is drawn with probability proportional to its current popularity,
    then a user uniformly among the group's non-members.  A group that reaches
    degree m leaves the urn, which has the same law as redrawing.

    Returns (status, edge_groups, edge_users, degrees); on stall the edge
    arrays hold only the placed edges.
    """
    np.random.seed(seed)
    n = tau0.size
    active = tau0.astype(np.int64).copy()
    tree = fenwick_build(active)
    total = fenwick_prefix(tree, n)
    degrees = np.zeros(n, dtype=np.int64)
    edge_groups = np.empty(n_edges, dtype=np.int64)
    edge_users = np.empty(n_edges, dtype=np.int64)
    seen = set()
    seen.add(np.int64(-1))
    half = m // 2
    for t in range(n_edges):
        if total <= 0:
            return STATUS_STALLED, edge_groups[:t], edge_users[:t], degrees
        j = fenwick_find(tree, np.random.randint(0, total))
        base = np.int64(j) * m
        if degrees[j] <= half:
            while True:
                i = np.random.randint(0, m)
                if (base + i) not in seen:
                    break
        else:
            free = np.empty(m - degrees[j], dtype=np.int64)
            c = 0
            for u in range(m):
                if (base + u) not in seen:
                    free[c] = u
                    c += 1
            i = free[np.random.randint(0, c)]
        seen.add(base + i)
        edge_groups[t] = j
        edge_users[t] = i
        degrees[j] += 1
        if degrees[j] == m:
            fenwick_add(tree, j, -active[j])
            total -= active[j]
            active[j] = 0
        else:
            fenwick_add(tree, j, 1)
            active[j] += 1
            total += 1
    return STATUS_OK, edge_groups, edge_users, degrees


@njit(cache=True)
def fenwick_find_many(tree, us):
    out = np.empty(us.size, dtype=np.int64)
    for k in range(us.size):
        out[k] = fenwick_find(tree, us[k])
    return out
