import math

import numpy as np
import pytest
from scipy.sparse.csgraph import minimum_spanning_tree

from oracles import brute_rips_h1
from tsikit.rips import (
    BoundaryMatrix,
    distance_matrix,
    enclosing_radius,
    filtration,
    rips_persistence,
    rips_persistence_explicit,
)
from tsikit.summaries import scale, tsi
from tsikit.synth import circle_equidistant


def pairs(barcode):
    return sorted((b.birth, b.death) for b in barcode.bars)


def test_distance_matrix_examples():
    np.testing.assert_array_equal(distance_matrix([[0, 0], [3, 4]]), [[0, 5], [5, 0]])
    d = distance_matrix([[0.0], [1.0], [3.0]])
    assert d[0, 2] == 3.0
    pc = circle_equidistant(1.0, 10)
    d = distance_matrix(pc)
    assert d[0, 1] == pytest.approx(2 * math.sin(math.pi / 10), rel=1e-14)
    assert np.array_equal(d, d.T) and np.all(np.diag(d) == 0)


def test_twelve_point_circle():
    dgm = rips_persistence(circle_equidistant(1.0, 12))
    assert dgm[1].n == 1
    bar = dgm[1].bars[0]
    assert bar.birth == pytest.approx(2 * math.sin(math.pi / 12), abs=1e-9)
    assert bar.death == pytest.approx(math.sqrt(3), abs=1e-9)


def test_equilateral_triangle_has_no_cycle():
    pc = circle_equidistant(1.0, 3)
    assert rips_persistence(pc)[1].n == 0
    zero = rips_persistence(pc, keep_zero=True)[1]
    assert all(b.lifetime == 0 for b in zero.bars)


def test_two_far_circles_equal_bars():
    a = circle_equidistant(1.0, 12, (0, 0))
    b = circle_equidistant(1.0, 12, (10, 0))
    dgm = rips_persistence(np.vstack([a, b]))[1]
    alone = rips_persistence(a)[1]
    assert dgm.n == 2
    np.testing.assert_allclose(pairs(dgm), pairs(alone) * 2, rtol=0, atol=1e-12)
    assert tsi(dgm) == pytest.approx(0.0, abs=1e-12)


def test_degree0_is_mst():
    rng = np.random.default_rng(0)
    pc = rng.normal(size=(40, 2))
    dgm = rips_persistence(pc, max_dim=0)
    assert len(dgm[0].bars) == 40
    assert dgm[0].n_infinite == 1
    mst = minimum_spanning_tree(distance_matrix(pc)).data
    np.testing.assert_array_equal(np.sort(dgm[0].lifetimes), np.sort(mst))


def test_deaths_after_births():
    rng = np.random.default_rng(1)
    dgm = rips_persistence(rng.uniform(size=(60, 3)))
    for d in (0, 1):
        assert all(b.death >= b.birth for b in dgm[d].bars)


def test_matches_brute_force_ranks():
    rng = np.random.default_rng(7)
    for trial in range(50):
        n = int(rng.integers(4, 9))
        pc = rng.uniform(size=(n, 2)) if trial % 2 else rng.normal(size=(n, 3))
        dist = distance_matrix(pc)
        expected = [p for p in brute_rips_h1(dist) if p[1] > p[0]]
        assert pairs(rips_persistence(pc)[1]) == expected
        assert pairs(rips_persistence_explicit(pc)[1]) == expected


def test_fast_and_explicit_agree_on_larger_clouds():
    rng = np.random.default_rng(3)
    for _ in range(5):
        pc = rng.uniform(size=(18, 2))
        fast, slow = rips_persistence(pc), rips_persistence_explicit(pc)
        assert pairs(fast[1]) == pairs(slow[1])
        assert pairs(fast[0]) == pairs(slow[0])


def test_permutation_invariance():
    rng = np.random.default_rng(9)
    pc = rng.uniform(size=(50, 2))
    perm = rng.permutation(50)
    a, b = rips_persistence(pc), rips_persistence(pc[perm])
    np.testing.assert_allclose(pairs(a[1]), pairs(b[1]), rtol=0, atol=1e-12)


def test_scaling_covariance():
    rng = np.random.default_rng(4)
    pc = rng.uniform(size=(40, 2))
    base = rips_persistence(pc)[1]
    scaled = rips_persistence(pc * 3.0)[1]
    np.testing.assert_allclose(pairs(scaled), pairs(scale(base, 3.0)), rtol=1e-12)
    assert tsi(scaled) == pytest.approx(9 * tsi(base), rel=1e-10)


def test_max_radius_truncation_gives_essential_classes():
    pc = circle_equidistant(1.0, 12)
    dgm = rips_persistence(pc, max_radius=1.0)
    assert dgm[1].n == 0 and dgm[1].n_infinite == 1
    assert dgm[1].bars[0].birth == pytest.approx(2 * math.sin(math.pi / 12))


def test_enclosing_radius_kills_h1():
    rng = np.random.default_rng(8)
    pc = rng.uniform(size=(9, 2))
    dist = distance_matrix(pc)
    full = [p for p in brute_rips_h1(dist) if p[1] > p[0]]
    assert all(d <= enclosing_radius(dist) for _, d in full)


def test_input_validation():
    with pytest.raises(ValueError):
        rips_persistence([[0.0, 0.0]])
    with pytest.raises(ValueError):
        rips_persistence(np.zeros((3, 2)), max_dim=2)
    with pytest.raises(ValueError):
        rips_persistence([[0.0, np.nan], [1.0, 1.0]])


def test_filtration_order_and_faces():
    rng = np.random.default_rng(2)
    simplices = filtration(rng.uniform(size=(6, 2)))
    keys = [(s.filtration_value, s.dimension, s.vertices) for s in simplices]
    assert keys == sorted(keys)
    value = {s.vertices: s.filtration_value for s in simplices}
    for s in simplices:
        if s.dimension == 2:
            a, b, c = s.vertices
            assert max(value[(a, b)], value[(a, c)], value[(b, c)]) == s.filtration_value


def test_boundary_reduction_unique_lows():
    rng = np.random.default_rng(6)
    m = BoundaryMatrix(filtration(rng.uniform(size=(7, 2))))
    m.reduce()
    lows = [max(c) for c in m.columns if c]
    assert len(lows) == len(set(lows))


def test_fast_and_explicit_agree_on_intertwined_circles():
    # dense circles force long chains of column additions in the fast path
    from tsikit.synth import RngSeed, sampled_intertwined_circles

    for n in (40, 80):
        pc = sampled_intertwined_circles(n, RngSeed(1, "x", n))
        fast, slow = rips_persistence(pc), rips_persistence_explicit(pc)
        assert pairs(fast[1]) == pairs(slow[1])


def test_four_hundred_points_in_seconds():
    import time

    from tsikit.synth import RngSeed, sampled_intertwined_circles

    pc = sampled_intertwined_circles(400, RngSeed(0, "speed", 0))
    rips_persistence(pc[:50])
    start = time.perf_counter()
    dgm = rips_persistence(pc)
    assert time.perf_counter() - start < 10
    assert dgm[1].n >= 3
