import math

import numpy as np
import pytest

from oracles import brute_bottleneck
from tsikit.barcode import Barcode
from tsikit.metrics import (
    DIAGONAL,
    bottleneck,
    bottleneck_matching,
    check_cvtsi_stability_bound,
    check_equal_cardinality_bound,
    check_popoviciu_bound,
    check_tsi_empty_bound,
    wasserstein_to_empty,
)
from tsikit.summaries import scale, shift_deaths


def B(*lt):
    return Barcode.from_lifetimes(lt)


def P(*pairs):
    return Barcode.from_pairs(pairs)


def random_diagram(rng, n):
    births = rng.uniform(0, 2, n)
    return Barcode.from_pairs(zip(births, births + rng.uniform(0, 2, n)))


def test_wasserstein_to_empty_examples():
    assert wasserstein_to_empty(B(0, 0, 0, 4), math.inf) == 2.0
    assert wasserstein_to_empty(B(1, 2), 2) == pytest.approx(math.sqrt(5) / 2, rel=1e-15)
    assert wasserstein_to_empty(B(), 2) == 0.0
    with pytest.raises(ValueError):
        wasserstein_to_empty(B(1), 1.5)


def test_wasserstein_p_chain_converges():
    b = B(0.3, 1.7, 2.2, 2.2, 0.9)
    vals = [wasserstein_to_empty(b, p) for p in (2, 8, 32, 128)]
    assert all(a >= c for a, c in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(wasserstein_to_empty(b, math.inf), rel=1e-2)
    assert wasserstein_to_empty(b, 1e6) == pytest.approx(1.1, rel=1e-5)


def test_bottleneck_examples():
    d = P((0, 1), (0.5, 3))
    assert bottleneck(d, d) == 0.0
    assert bottleneck(P((0, 1)), P((0, 1.2))) == pytest.approx(0.2)
    assert brute_bottleneck([(0, 1)], [(0, 1.2)]) == pytest.approx(0.2)
    assert bottleneck(P((0, 2)), P()) == 1.0
    assert bottleneck(P(), P()) == 0.0


def test_bottleneck_matching_structure():
    m = bottleneck_matching(P((0, 1), (0, 10)), P((0, 10.1)))
    assert m.cost == pytest.approx(0.5)
    left = sorted(i for i, _ in m.pairs if i != DIAGONAL)
    right = sorted(j for _, j in m.pairs if j != DIAGONAL)
    assert left == [0, 1] and right == [0]
    assert (1, 0) in m.pairs and (0, DIAGONAL) in m.pairs


def test_bottleneck_matches_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(100):
        a = random_diagram(rng, rng.integers(0, 7))
        b = random_diagram(rng, rng.integers(0, 7))
        pa = [(x.birth, x.death) for x in a.bars]
        pb = [(x.birth, x.death) for x in b.bars]
        assert bottleneck(a, b) == brute_bottleneck(pa, pb)


def test_bottleneck_metric_properties():
    rng = np.random.default_rng(5)
    for _ in range(100):
        x, y, z = (random_diagram(rng, rng.integers(1, 12)) for _ in range(3))
        assert bottleneck(x, y) == pytest.approx(bottleneck(y, x), abs=1e-12)
        assert bottleneck(x, z) <= bottleneck(x, y) + bottleneck(y, z) + 1e-12
        assert bottleneck(x, x) == 0.0


def test_bottleneck_essential_bars():
    inf_a = Barcode.from_pairs([(0, math.inf), (0, 1)], degree=0)
    inf_b = Barcode.from_pairs([(0.25, math.inf), (0, 1)], degree=0)
    assert bottleneck(inf_a, inf_b) == 0.25
    assert bottleneck(inf_a, Barcode.from_pairs([(0, 1)], degree=0)) == math.inf


def test_tsi_empty_bound_examples():
    lhs, rhs, holds = check_tsi_empty_bound(B(0, 0, 0, 4), math.inf)[1:]
    assert (lhs, rhs, holds) == (4.0, 16.0, True)
    lhs, rhs, holds = check_tsi_empty_bound(B(1, 2), 2)[1:]
    assert lhs == 0.5 and rhs == pytest.approx(2.5) and holds
    c = check_tsi_empty_bound(B(3, 3, 3), 2)
    assert c.lhs == 0 and c.rhs > 0 and c.holds


def test_popoviciu_examples():
    c = check_popoviciu_bound(B(0, 4))
    assert (c.lhs, c.rhs, c.holds) == (8.0, 8.0, True)
    assert check_popoviciu_bound(B(2, 2))[1:] == (0.0, 0.0, True)
    c = check_popoviciu_bound(B(1, 2, 3))
    assert (c.lhs, c.rhs, c.holds) == (1.0, 1.5, True)


def test_equal_cardinality_examples():
    c = check_equal_cardinality_bound(P((0, 1), (0, 2)), P((0, 1.1), (0, 2)))
    assert c.lhs == pytest.approx(0.095)
    assert c.rhs == pytest.approx(2.44)
    assert c.holds
    b = P((0, 1), (0.5, 3), (1, 1.25))
    assert check_equal_cardinality_bound(b, b)[1:] == (0.0, 0.0, True)
    c = check_equal_cardinality_bound(b, shift_deaths(b, 0.3))
    assert c.lhs == pytest.approx(0, abs=1e-15) and c.rhs > 0 and c.holds
    with pytest.raises(ValueError):
        check_equal_cardinality_bound(b, P((0, 1)))


def test_cvtsi_stability_examples():
    b = P((0, 1), (0.5, 3), (1, 1.25))
    assert check_cvtsi_stability_bound(b, b)[1:] == (0.0, 0.0, True)
    c = check_cvtsi_stability_bound(b, scale(b, 1.01))
    assert c.lhs < 1e-12 and c.rhs > 0 and c.holds


def test_bounds_hold_on_random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(2, 30))
        b = random_diagram(rng, n)
        for p in (2, 3, math.inf):
            assert check_tsi_empty_bound(b, p).holds
        assert check_popoviciu_bound(b).holds
        eps = 10 ** rng.uniform(-4, 0)
        births = np.array([x.birth for x in b.bars]) + rng.uniform(-eps, eps, n)
        deaths = np.maximum(np.array([x.death for x in b.bars]) + rng.uniform(-eps, eps, n), births)
        b2 = Barcode.from_pairs(zip(births, deaths))
        assert check_equal_cardinality_bound(b, b2).holds
        if b.total_persistence > 0 and b2.total_persistence > 0:
            assert check_cvtsi_stability_bound(b, b2).holds
