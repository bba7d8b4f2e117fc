"""Compiled inner loops: the vector-key hash set and the cost-ordered expansion."""

from __future__ import annotations

import math

import numba as nb
import numpy as np

KEY_DELTA = 1e-6
# a coordinate within this fraction of a cell of the cell edge also probes the neighbor cell
EDGE_MARGIN = 0.05
ANTIPODE_BAND = 10 * KEY_DELTA
HALF_PI = math.pi / 2
SIGN_TOL = 1e-9

STATUS_DONE = 0
STATUS_BUDGET = 1
STATUS_GROW_NODES = 2
STATUS_GROW_TABLE = 3
STATUS_LIMIT = 4

_EMPTY = np.iinfo(np.int64).min


@nb.njit(cache=True, inline="always")
def _mix(a, b, c):
    h = np.uint64(a) * np.uint64(0x9E3779B97F4A7C15)
    h ^= np.uint64(b) * np.uint64(0xC2B2AE3D27D4EB4F)
    h ^= np.uint64(c) * np.uint64(0x165667B19E3779F9)
    h ^= h >> np.uint64(31)
    h *= np.uint64(0xBF58476D1CE4E5B9)
    h ^= h >> np.uint64(29)
    return h


@nb.njit(cache=True)
def table_find(table, kx, ky, kz):
    mask = np.uint64(table.shape[0] - 1)
    i = _mix(kx, ky, kz) & mask
    while True:
        k0 = table[i, 0]
        if k0 == _EMPTY:
            return False
        if k0 == kx and table[i, 1] == ky and table[i, 2] == kz:
            return True
        i = (i + np.uint64(1)) & mask


@nb.njit(cache=True)
def table_insert(table, kx, ky, kz):
    mask = np.uint64(table.shape[0] - 1)
    i = _mix(kx, ky, kz) & mask
    while True:
        k0 = table[i, 0]
        if k0 == _EMPTY:
            table[i, 0] = kx
            table[i, 1] = ky
            table[i, 2] = kz
            return True
        if k0 == kx and table[i, 1] == ky and table[i, 2] == kz:
            return False
        i = (i + np.uint64(1)) & mask


def new_table(capacity: int) -> np.ndarray:
    cap = 1 << max(4, int(capacity - 1).bit_length())
    return np.full((cap, 3), _EMPTY, dtype=np.int64)


@nb.njit(cache=True)
def rehash(old, new):
    for i in range(old.shape[0]):
        if old[i, 0] != _EMPTY:
            table_insert(new, old[i, 0], old[i, 1], old[i, 2])


@nb.njit(cache=True, inline="always")
def _pauli(w, x, y, z):
    s = math.sqrt(x * x + y * y + z * z)
    if s == 0.0:
        return 0.0, 0.0, 0.0
    f = math.atan2(s, abs(w)) / s
    if w < 0.0:
        f = -f
    return x * f, y * f, z * f


@nb.njit(cache=True)
def _cells(r):
    """Primary cell and, when ``r`` sits near a cell edge, the neighbouring one."""
    k = np.int64(np.rint(r))
    frac = r - math.floor(r)
    if abs(frac - 0.5) < EDGE_MARGIN:
        alt = k + 1 if k == math.floor(r) else k - 1
        return k, alt, True
    return k, k, False


@nb.njit(cache=True)
def _probe_point(table, a, b, c):
    kx, ax, bx = _cells(a / KEY_DELTA)
    ky, ay, by = _cells(b / KEY_DELTA)
    kz, az, bz = _cells(c / KEY_DELTA)
    for i in range(2 if bx else 1):
        px = kx if i == 0 else ax
        for j in range(2 if by else 1):
            py = ky if j == 0 else ay
            for m in range(2 if bz else 1):
                pz = kz if m == 0 else az
                if table_find(table, px, py, pz):
                    return True
    return False


@nb.njit(cache=True)
def key_present(table, a, b, c):
    """Membership test tolerant to float jitter and to the v ~ -v boundary identification."""
    if _probe_point(table, a, b, c):
        return True
    if math.sqrt(a * a + b * b + c * c) > HALF_PI - ANTIPODE_BAND:
        return _probe_point(table, -a, -b, -c)
    return False


@nb.njit(cache=True)
def key_insert(table, a, b, c):
    table_insert(
        table,
        np.int64(np.rint(a / KEY_DELTA)),
        np.int64(np.rint(b / KEY_DELTA)),
        np.int64(np.rint(c / KEY_DELTA)),
    )


@nb.njit(cache=True)
def keys_present(table, vecs):
    out = np.zeros(vecs.shape[0], dtype=np.bool_)
    for i in range(vecs.shape[0]):
        out[i] = key_present(table, vecs[i, 0], vecs[i, 1], vecs[i, 2])
    return out


@nb.njit(cache=True)
def keys_insert(table, vecs):
    for i in range(vecs.shape[0]):
        key_insert(table, vecs[i, 0], vecs[i, 1], vecs[i, 2])


@nb.njit(cache=True)
def expand(
    quat, cost, parent, gate, depth, n_nodes,
    table, n_keys,
    gate_quat, group_cost, group_gates, group_len,
    ptr, sub,
    max_units, node_limit,
):
    """Pop candidates in (cost, parent, gate) order until the budget, a resize or the limit.

    The frontier is lazy: cost group ``g`` yields children ``(ptr[g], group_gates[g, sub[g]])``
    of already-accepted parents in acceptance order, which is exactly the order an explicit
    min-heap keyed by (cost, creation index) would pop them.

    Returns ``(status, n_nodes, n_keys, popped)``.
    """
    cap = quat.shape[0]
    table_cap = table.shape[0]
    n_groups = group_cost.shape[0]
    popped = 0
    while True:
        best = -1
        best_cost = np.int64(0)
        for g in range(n_groups):
            p = ptr[g]
            if p >= n_nodes:
                continue
            c = cost[p] + group_cost[g]
            if best < 0 or c < best_cost:
                best, best_cost = g, c
            elif c == best_cost:
                bp = ptr[best]
                if p < bp or (p == bp and group_gates[g, sub[g]] < group_gates[best, sub[best]]):
                    best, best_cost = g, c
        if best < 0:
            return STATUS_DONE, n_nodes, n_keys, popped
        if best_cost > max_units:
            return STATUS_BUDGET, n_nodes, n_keys, popped
        if n_nodes >= node_limit:
            return STATUS_LIMIT, n_nodes, n_keys, popped
        if n_nodes >= cap:
            return STATUS_GROW_NODES, n_nodes, n_keys, popped
        if 2 * (n_keys + 1) > table_cap:
            return STATUS_GROW_TABLE, n_nodes, n_keys, popped

        p = ptr[best]
        gid = group_gates[best, sub[best]]
        sub[best] += 1
        if sub[best] == group_len[best]:
            sub[best] = 0
            ptr[best] += 1
        popped += 1

        aw, ax, ay, az = quat[p, 0], quat[p, 1], quat[p, 2], quat[p, 3]
        bw, bx, by, bz = gate_quat[gid, 0], gate_quat[gid, 1], gate_quat[gid, 2], gate_quat[gid, 3]
        w = aw * bw - ax * bx - ay * by - az * bz
        x = aw * bx + ax * bw + ay * bz - az * by
        y = aw * by - ax * bz + ay * bw + az * bx
        z = aw * bz + ax * by - ay * bx + az * bw
        nrm = math.sqrt(w * w + x * x + y * y + z * z)
        w /= nrm
        x /= nrm
        y /= nrm
        z /= nrm
        if abs(w) > SIGN_TOL:
            lead = w
        elif abs(x) > SIGN_TOL:
            lead = x
        elif abs(y) > SIGN_TOL:
            lead = y
        else:
            lead = z
        if lead < 0:
            w, x, y, z = -w, -x, -y, -z

        a, b, c = _pauli(w, x, y, z)
        if key_present(table, a, b, c):
            continue
        key_insert(table, a, b, c)
        n_keys += 1
        quat[n_nodes, 0] = w
        quat[n_nodes, 1] = x
        quat[n_nodes, 2] = y
        quat[n_nodes, 3] = z
        cost[n_nodes] = best_cost
        parent[n_nodes] = p
        gate[n_nodes] = gid
        depth[n_nodes] = depth[p] + 1
        n_nodes += 1


@nb.njit(cache=True)
def depths_from_parents(parent, n):
    out = np.zeros(n, dtype=np.int32)
    for i in range(1, n):
        out[i] = out[parent[i]] + 1
    return out


@nb.njit(cache=True)
def subtree_sizes(parent, n):
    """Number of nodes in each node's subtree (itself included); parents precede children."""
    out = np.ones(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        out[parent[i]] += out[i]
    return out


# ------------------------------------------------------------------ k-d tree
@nb.njit(cache=True)
def _select(perm, pts, lo, hi, k, dim):
    """Reorder perm[lo:hi] so position k holds the median along ``dim`` (Hoare quickselect)."""
    while hi - lo > 1:
        pivot = pts[perm[(lo + hi) // 2], dim]
        i, j = lo, hi - 1
        while i <= j:
            while pts[perm[i], dim] < pivot:
                i += 1
            while pts[perm[j], dim] > pivot:
                j -= 1
            if i <= j:
                perm[i], perm[j] = perm[j], perm[i]
                i += 1
                j -= 1
        if k <= j:
            hi = j + 1
        elif k >= i:
            lo = i
        else:
            return


@nb.njit(cache=True)
def kd_build(pts, leaf_size):
    n = pts.shape[0]
    max_nodes = 2 * (n // max(1, leaf_size) + 1) * 2 + 1
    perm = np.arange(n)
    lo = np.zeros(max_nodes, dtype=np.int64)
    hi = np.zeros(max_nodes, dtype=np.int64)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    bmin = np.full((max_nodes, 3), np.inf)
    bmax = np.full((max_nodes, 3), -np.inf)
    stack = np.zeros((128, 2), dtype=np.int64)
    stack[0, 0], stack[0, 1] = 0, n
    top = 1
    n_nodes = 1
    node_of = np.zeros(128, dtype=np.int64)
    node_of[0] = 0
    while top > 0:
        top -= 1
        a, b = stack[top, 0], stack[top, 1]
        node = node_of[top]
        lo[node], hi[node] = a, b
        for i in range(a, b):
            for d in range(3):
                v = pts[perm[i], d]
                if v < bmin[node, d]:
                    bmin[node, d] = v
                if v > bmax[node, d]:
                    bmax[node, d] = v
        if b - a <= leaf_size:
            continue
        dim = 0
        for d in range(1, 3):
            if bmax[node, d] - bmin[node, d] > bmax[node, dim] - bmin[node, dim]:
                dim = d
        mid = (a + b) // 2
        _select(perm, pts, a, b, mid, dim)
        left[node] = n_nodes
        right[node] = n_nodes + 1
        n_nodes += 2
        stack[top, 0], stack[top, 1] = mid, b
        node_of[top] = right[node]
        top += 1
        stack[top, 0], stack[top, 1] = a, mid
        node_of[top] = left[node]
        top += 1
    return perm, lo[:n_nodes], hi[:n_nodes], left[:n_nodes], right[:n_nodes], \
        bmin[:n_nodes], bmax[:n_nodes]


@nb.njit(cache=True)
def kd_query(q, r2, pts, ids, lo, hi, left, right, bmin, bmax):
    """Entries within squared radius ``r2`` of ``q``; returns (ids, d2, visited)."""
    out_ids = []
    out_d2 = []
    visited = 0
    if lo.shape[0] == 0 or pts.shape[0] == 0:
        return np.array(out_ids, dtype=np.int64), np.array(out_d2, dtype=np.float64), visited
    stack = np.zeros(256, dtype=np.int64)
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        gap = 0.0
        for d in range(3):
            g = 0.0
            if q[d] < bmin[node, d]:
                g = bmin[node, d] - q[d]
            elif q[d] > bmax[node, d]:
                g = q[d] - bmax[node, d]
            gap += g * g
        if gap > r2:
            continue
        visited += 1
        if left[node] < 0:
            for i in range(lo[node], hi[node]):
                dx = pts[i, 0] - q[0]
                dy = pts[i, 1] - q[1]
                dz = pts[i, 2] - q[2]
                d2 = dx * dx + dy * dy + dz * dz
                visited += 1
                if d2 <= r2:
                    out_ids.append(ids[i])
                    out_d2.append(d2)
        else:
            stack[top] = right[node]
            stack[top + 1] = left[node]
            top += 2
    return np.array(out_ids, dtype=np.int64), np.array(out_d2, dtype=np.float64), visited
