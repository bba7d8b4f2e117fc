import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hiersynth.kdindex import SpatialIndex, index_database, sync_index
from hiersynth.psu2 import haar_random_quaternions, pauli_vectors
from oracles import linear_radius


def ball_points(rng, n):
    return pauli_vectors(haar_random_quaternions(rng, n))


def test_empty_index():
    idx = SpatialIndex()
    assert idx.within_radius([0, 0, 0], 1.0) == []
    assert len(idx) == 0


def test_insert_then_query_exact_point():
    idx = SpatialIndex()
    idx.insert([0.1, 0.2, 0.3], 7)
    assert idx.within_radius([0.1, 0.2, 0.3], 0.0) == [(7, 0.0)]


def test_interior_point_single_entry():
    idx = SpatialIndex().insert([0.1, 0.0, 0.0], 1)
    _, ids, mirror = idx.all_entries()
    assert list(ids) == [1] and not mirror.any()


def test_boundary_point_found_via_mirror():
    v = np.array([0.0, 0.0, math.pi / 2])
    idx = SpatialIndex().insert(v, 3)
    _, ids, mirror = idx.all_entries()
    assert sorted(ids.tolist()) == [3, 3] and mirror.sum() == 1
    hits = idx.within_radius(-v + np.array([0.01, 0, 0]), 0.02)
    assert [h[0] for h in hits] == [3]
    assert hits[0][1] == pytest.approx(0.01)


def test_insert_rejects_outside_ball():
    with pytest.raises(ValueError):
        SpatialIndex().insert([2.0, 0, 0], 0)


def test_infinite_radius_returns_each_id_once(rng):
    pts = ball_points(rng, 2000)
    idx = SpatialIndex().insert_many(pts, np.arange(2000))
    ids = [i for i, _ in idx.within_radius([0, 0, 0], math.inf)]
    assert sorted(ids) == list(range(2000))


@pytest.mark.parametrize("radius", [0.0, 0.02, 0.1, 0.4, 1.0])
def test_matches_linear_scan(rng, radius):
    pts = ball_points(rng, 5000)
    ids = np.arange(5000) * 3 + 1
    idx = SpatialIndex().insert_many(pts, ids)
    for q in ball_points(rng, 100):
        got = idx.within_radius(q, radius)
        want = linear_radius(pts, ids, q, radius, idx.r_mirror)
        assert {i: pytest.approx(d, abs=1e-12) for i, d in got} == want
        dists = [d for _, d in got]
        assert dists == sorted(dists)


def test_buffered_inserts_match_linear_scan(rng):
    pts = ball_points(rng, 1200)
    idx = SpatialIndex().insert_many(pts[:1000], np.arange(1000))
    for i in range(1000, 1200):
        idx.insert(pts[i], i)
    for q in ball_points(rng, 50):
        got = dict(idx.within_radius(q, 0.2))
        assert got.keys() == linear_radius(pts, np.arange(1200), q, 0.2, idx.r_mirror).keys()


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.floats(0, 0.6), st.floats(0.05, 0.6))
def test_linear_scan_property(seed, radius, r_mirror):
    rng = np.random.default_rng(seed)
    pts = ball_points(rng, 300)
    # push some points onto the boundary sphere to stress the mirror path
    pts[:40] *= (math.pi / 2) / np.linalg.norm(pts[:40], axis=1)[:, None]
    idx = SpatialIndex(r_mirror=r_mirror, leaf_size=4).insert_many(pts, np.arange(300))
    for q in ball_points(rng, 10):
        assert dict(idx.within_radius(q, radius)).keys() == \
            linear_radius(pts, np.arange(300), q, radius, r_mirror).keys()


def test_visited_fraction_small(rng):
    pts = ball_points(rng, 150_000)
    idx = SpatialIndex().insert_many(pts, np.arange(len(pts)))
    n_entries = len(idx.all_entries()[1])
    assert n_entries >= 100_000
    visited = []
    for q in ball_points(rng, 200):
        idx.query_arrays(q, 0.05)
        visited.append(idx.last_visited)
    assert np.median(visited) < 0.05 * n_entries


def test_index_database_and_sync(set1, direct):
    from hiersynth.seqdb import generate
    db = generate(set1, direct, 2.0)
    idx = index_database(db)
    assert len(idx) == db.n
    db.grow(3.0)
    sync_index(idx, db)
    assert len(idx) == db.n
    _, ids, mirror = idx.all_entries()
    assert sorted(ids[~mirror].tolist()) == list(range(db.n))


def test_tree_depth_logarithmic(rng):
    idx = SpatialIndex().insert_many(ball_points(rng, 50_000), np.arange(50_000))
    n = len(idx.all_entries()[1])
    assert idx.depth() <= 2 * math.log2(n) + 8
