"""Diagram distances and checkers for the TSI / cvTSI stability bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .barcode import Barcode, lifetimes
from .entropy import cvtsi
from .summaries import tsi

BOUND_SLACK = 1e-12

DIAGONAL = -1


class BoundCheck(NamedTuple):
    bound: str
    lhs: float
    rhs: float
    holds: bool

    def as_dict(self) -> dict:
        return {"bound": self.bound, "lhs": float(self.lhs), "rhs": float(self.rhs), "holds": bool(self.holds)}


@dataclass(frozen=True)
class Matching:
    """Optimal bottleneck matching.

    ``pairs`` holds ``(i, j)`` index pairs into the finite bars of the two
    diagrams; ``DIAGONAL`` on either side means the other bar goes to its
    diagonal projection.
    """

    pairs: tuple[tuple[int, int], ...]
    cost: float


def wasserstein_to_empty(b, p: float = 2.0) -> float:
    """p-Wasserstein distance (l-infinity ground metric) from ``b`` to the empty diagram."""
    if not p >= 2:
        raise ValueError(f"p must lie in [2, inf], got {p}")
    half = lifetimes(b) / 2.0
    if len(half) == 0:
        return 0.0
    if math.isinf(p):
        return float(half.max())
    m = float(half.max())
    if m == 0:
        return 0.0
    # factor out the maximum so large p does not underflow to zero
    return m * math.fsum((half / m) ** p) ** (1.0 / p)


def _points(b: Barcode) -> np.ndarray:
    bars = b.finite_bars()
    return np.array([(x.birth, x.death) for x in bars], dtype=float).reshape(len(bars), 2)


def _cost_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Square cost matrix of the diagonal-augmented bipartite problem.

    Rows: points of ``a`` then diagonal slots for ``b``; columns: points of
    ``b`` then diagonal slots for ``a``.
    """
    na, nb = len(a), len(b)
    size = na + nb
    cost = np.full((size, size), np.inf)
    if na and nb:
        cost[:na, :nb] = np.maximum(
            np.abs(a[:, None, 0] - b[None, :, 0]), np.abs(a[:, None, 1] - b[None, :, 1])
        )
    half_a = (a[:, 1] - a[:, 0]) / 2.0
    half_b = (b[:, 1] - b[:, 0]) / 2.0
    for i in range(na):
        cost[i, nb + i] = half_a[i]
    for j in range(nb):
        cost[na + j, j] = half_b[j]
    cost[na:, nb:] = 0.0
    return cost


def _perfect_matching(cost: np.ndarray, t: float) -> np.ndarray | None:
    size = cost.shape[0]
    if size == 0:
        return np.zeros(0, dtype=int)
    graph = csr_matrix((cost <= t).astype(np.int8))
    match = maximum_bipartite_matching(graph, perm_type="column")
    if np.any(match < 0):
        return None
    return match


def _essential_gap(b1: Barcode, b2: Barcode) -> float:
    e1 = sorted(x.birth for x in b1.bars if not x.finite)
    e2 = sorted(x.birth for x in b2.bars if not x.finite)
    if len(e1) != len(e2):
        return math.inf
    return max((abs(u - v) for u, v in zip(e1, e2)), default=0.0)


def bottleneck_matching(b1: Barcode, b2: Barcode) -> Matching:
    """Exact bottleneck matching between the finite parts of two diagrams."""
    a, b = _points(b1), _points(b2)
    na, nb = len(a), len(b)
    cost = _cost_matrix(a, b)
    candidates = np.unique(cost[np.isfinite(cost)])
    if len(candidates) == 0:
        return Matching((), 0.0)
    lo, hi = 0, len(candidates) - 1
    best = _perfect_matching(cost, candidates[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        m = _perfect_matching(cost, candidates[mid])
        if m is None:
            lo = mid + 1
        else:
            hi, best = mid, m
    pairs = []
    for row, col in enumerate(best):
        i = row if row < na else DIAGONAL
        j = int(col) if col < nb else DIAGONAL
        if i == DIAGONAL and j == DIAGONAL:
            continue
        pairs.append((i, j))
    return Matching(tuple(pairs), float(candidates[hi]))


def bottleneck(b1: Barcode, b2: Barcode) -> float:
    """Bottleneck distance; essential bars are matched by sorted birth."""
    return max(bottleneck_matching(b1, b2).cost, _essential_gap(b1, b2))


def check_tsi_empty_bound(b, p: float = 2.0) -> BoundCheck:
    lt = lifetimes(b)
    n = len(lt)
    if n < 2:
        raise ValueError("bound needs n >= 2")
    exponent = 0.0 if math.isinf(p) else -2.0 / p
    lhs = tsi(lt)
    rhs = 4.0 * n**exponent * wasserstein_to_empty(lt, p) ** 2
    name = "tsi_wasserstein_empty_pinf" if math.isinf(p) else f"tsi_wasserstein_empty_p{p:g}"
    return BoundCheck(name, lhs, rhs, lhs <= rhs + BOUND_SLACK)


def check_popoviciu_bound(b) -> BoundCheck:
    lt = lifetimes(b)
    n = len(lt)
    if n < 2:
        raise ValueError("bound needs n >= 2")
    spread = float(lt.max() - lt.min())
    lhs = tsi(lt)
    rhs = n / (n - 1) * 0.25 * spread * spread
    return BoundCheck("popoviciu", lhs, rhs, lhs <= rhs + BOUND_SLACK)


def _same_cardinality(b1: Barcode, b2: Barcode) -> int:
    n = b1.n
    if n != b2.n:
        raise ValueError(f"bars differ in number: {b1.n} vs {b2.n}")
    if n < 2:
        raise ValueError("bound needs n >= 2")
    return n


def check_equal_cardinality_bound(b1: Barcode, b2: Barcode) -> BoundCheck:
    n = _same_cardinality(b1, b2)
    lhs = abs(tsi(b1) - tsi(b2))
    rhs = 4.0 / (n - 1) * (b1.total_persistence + b2.total_persistence) * bottleneck(b1, b2)
    return BoundCheck("tsi_equal_cardinality", lhs, rhs, lhs <= rhs + BOUND_SLACK)


def check_cvtsi_stability_bound(b1: Barcode, b2: Barcode) -> BoundCheck:
    n = _same_cardinality(b1, b2)
    m = min(b1.mean_lifetime, b2.mean_lifetime)
    if m <= 0:
        raise ValueError("bound needs positive mean lifetimes")
    lhs = abs(cvtsi(b1) - cvtsi(b2))
    rhs = 8.0 * n * n / ((n - 1) * m) * bottleneck(b1, b2)
    return BoundCheck("cvtsi_stability", lhs, rhs, lhs <= rhs + BOUND_SLACK)
