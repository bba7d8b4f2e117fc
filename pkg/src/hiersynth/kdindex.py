"""Static bucketed k-d tree over Pauli vectors with antipodal mirror entries.

Points on the boundary sphere ``|v| = pi/2`` are identified with their
antipodes, so a point near the sphere may be close (as a gate) to a query on
the far side of the ball.  Every point within ``r_mirror`` of the sphere is
therefore also stored at ``-v``; queries return each payload once, at its
smaller distance.

The tree itself is rebuilt wholesale on batch insertion; single insertions go
to a small unsorted buffer that queries scan linearly until the next rebuild.
"""

from __future__ import annotations

import math

import numpy as np

from hiersynth import _kernels as K
from hiersynth.psu2 import pauli_vectors

HALF_PI = math.pi / 2
DEFAULT_R_MIRROR = 0.35
LEAF_SIZE = 16


class SpatialIndex:
    def __init__(self, r_mirror: float = DEFAULT_R_MIRROR, leaf_size: int = LEAF_SIZE):
        self.r_mirror = float(r_mirror)
        self.leaf_size = int(leaf_size)
        self.points = np.zeros((0, 3))
        self.ids = np.zeros(0, dtype=np.int64)
        self.mirror = np.zeros(0, dtype=bool)
        self._buf_points: list[np.ndarray] = []
        self._buf_ids: list[np.ndarray] = []
        self._buf_mirror: list[np.ndarray] = []
        self.n_primary = 0
        self.last_visited = 0
        self._build()

    # ------------------------------------------------------------ building
    def _entries(self, points: np.ndarray, ids: np.ndarray):
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        ids = np.asarray(ids, dtype=np.int64).reshape(-1)
        near = np.linalg.norm(points, axis=1) > HALF_PI - self.r_mirror
        pts = np.concatenate([points, -points[near]])
        pid = np.concatenate([ids, ids[near]])
        mir = np.concatenate([np.zeros(len(ids), bool), np.ones(int(near.sum()), bool)])
        return pts, pid, mir

    def _build(self):
        perm, self._lo, self._hi, self._left, self._right, self._bmin, self._bmax = \
            K.kd_build(np.ascontiguousarray(self.points), self.leaf_size)
        self._perm_points = np.ascontiguousarray(self.points[perm])
        self._perm_ids = self.ids[perm]

    def depth(self) -> int:
        best, stack = 0, [(0, 1)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            for child in (self._left[node], self._right[node]):
                if child >= 0:
                    stack.append((child, d + 1))
        return best

    # ------------------------------------------------------------ mutation
    def insert(self, point, node_id: int) -> "SpatialIndex":
        point = np.asarray(point, dtype=float).reshape(3)
        if np.linalg.norm(point) > HALF_PI + 1e-9:
            raise ValueError("point lies outside the pi/2 ball")
        pts, pid, mir = self._entries(point[None], np.array([node_id]))
        self._buf_points.append(pts)
        self._buf_ids.append(pid)
        self._buf_mirror.append(mir)
        self.n_primary += 1
        if sum(len(b) for b in self._buf_ids) > max(256, len(self.ids) // 8):
            self._flush()
        return self

    def insert_many(self, points, node_ids) -> "SpatialIndex":
        pts, pid, mir = self._entries(points, node_ids)
        self._buf_points.append(pts)
        self._buf_ids.append(pid)
        self._buf_mirror.append(mir)
        self.n_primary += len(np.asarray(node_ids).reshape(-1))
        self._flush()
        return self

    def _flush(self):
        if not self._buf_ids:
            return
        self.points = np.concatenate([self.points] + self._buf_points)
        self.ids = np.concatenate([self.ids] + self._buf_ids)
        self.mirror = np.concatenate([self.mirror] + self._buf_mirror)
        self._buf_points, self._buf_ids, self._buf_mirror = [], [], []
        self._build()

    def __len__(self):
        return self.n_primary

    # --------------------------------------------------------------- query
    def within_radius(self, point, radius: float) -> list[tuple[int, float]]:
        """All payloads within Euclidean ``radius`` (mirrors included), nearest first."""
        ids, dists = self.query_arrays(point, radius)
        return list(zip(ids.tolist(), dists.tolist()))

    def query_arrays(self, point, radius: float) -> tuple[np.ndarray, np.ndarray]:
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        q = np.asarray(point, dtype=float).reshape(3)
        r2 = radius * radius if math.isfinite(radius) else math.inf
        ids, d2, visited = K.kd_query(q, r2, self._perm_points, self._perm_ids, self._lo,
                                      self._hi, self._left, self._right, self._bmin, self._bmax)
        hit_ids, hit_d2 = [ids], [d2]
        for pts, pid in zip(self._buf_points, self._buf_ids):
            d = pts - q
            d2 = np.einsum("ij,ij->i", d, d)
            keep = d2 <= r2
            visited += len(pid)
            hit_ids.append(pid[keep])
            hit_d2.append(d2[keep])
        self.last_visited = visited
        ids = np.concatenate(hit_ids)
        d2 = np.concatenate(hit_d2)
        # a payload may appear twice (primary + mirror): keep its nearer copy
        order = np.lexsort((d2, ids))
        ids, d2 = ids[order], d2[order]
        first = np.ones(len(ids), dtype=bool)
        first[1:] = ids[1:] != ids[:-1]
        ids, d2 = ids[first], d2[first]
        order = np.lexsort((ids, d2))
        return ids[order], np.sqrt(d2[order])

    def all_entries(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(points, ids, mirror flags) for every stored entry, buffered ones included."""
        pts = np.concatenate([self.points] + self._buf_points)
        ids = np.concatenate([self.ids] + self._buf_ids)
        mir = np.concatenate([self.mirror] + self._buf_mirror)
        return pts, ids, mir


def index_database(db, r_mirror: float = DEFAULT_R_MIRROR) -> SpatialIndex:
    index = SpatialIndex(r_mirror=r_mirror)
    index.insert_many(db.vectors(), np.arange(db.n))
    return index


def sync_index(index: SpatialIndex, db) -> SpatialIndex:
    """Batch-insert database nodes the index has not seen yet."""
    start = len(index)
    if start < db.n:
        index.insert_many(pauli_vectors(db.quat[start:db.n]), np.arange(start, db.n))
    return index
