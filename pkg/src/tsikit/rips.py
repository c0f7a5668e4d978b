"""Vietoris-Rips persistent homology in degrees 0 and 1 over Z/2.

Degree 0 comes from Kruskal's union-find over the sorted edges. Degree 1 is
computed by reducing the coboundary matrix (persistent cohomology) with the
edges processed in reverse filtration order; coboundaries are enumerated on
the fly, so triangles are never materialized. Spanning-tree edges are cleared
up front since they already pair with vertices in degree 0.

``BoundaryMatrix`` / ``filtration`` give the textbook explicit route for
small inputs and are used to cross-check the fast path.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from numba import njit
from numba import types as nbt
from numba.typed import Dict
from scipy.spatial.distance import pdist, squareform

from .barcode import Bar, Barcode, as_point_cloud


def distance_matrix(points) -> np.ndarray:
    """Euclidean distances; every unordered pair is computed once, so the result is exactly symmetric."""
    pc = as_point_cloud(points)
    if len(pc) == 0:
        return np.zeros((0, 0))
    return squareform(pdist(pc, metric="euclidean"))


def enclosing_radius(dist: np.ndarray) -> float:
    """Smallest r at which some vertex is adjacent to all others; H1 vanishes from there on."""
    return float(dist.max(axis=1).min())


def _sorted_edges(dist: np.ndarray, threshold: float):
    n = dist.shape[0]
    iu, ju = np.triu_indices(n, 1)
    d = dist[iu, ju]
    keep = d <= threshold
    iu, ju, d = iu[keep], ju[keep], d[keep]
    # filtration order: value, then lexicographic vertex pair
    order = np.lexsort((ju, iu, d))
    return iu[order].astype(np.int64), ju[order].astype(np.int64), d[order]


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def _kruskal(n, ei, ej):
    """Flag the edges that merge components, in filtration order."""
    parent = np.arange(n)
    rank = np.zeros(n, dtype=np.int64)
    merges = np.zeros(len(ei), dtype=np.bool_)
    for e in range(len(ei)):
        a = _find(parent, ei[e])
        b = _find(parent, ej[e])
        if a == b:
            continue
        if rank[a] < rank[b]:
            a, b = b, a
        parent[b] = a
        if rank[a] == rank[b]:
            rank[a] += 1
        merges[e] = True
    return merges


@njit(cache=True)
def _push_coboundary(heap, dist, threshold, i, j, d_ij, n):
    """Push the cofacets of edge (i, j) onto ``heap`` as (diameter, code) pairs."""
    for k in range(n):
        if k == i or k == j:
            continue
        dik = dist[i, k]
        djk = dist[j, k]
        if dik > threshold or djk > threshold:
            continue
        td = d_ij
        if dik > td:
            td = dik
        if djk > td:
            td = djk
        if k < i:
            c = (k * n + i) * n + j
        elif k < j:
            c = (i * n + k) * n + j
        else:
            c = (i * n + j) * n + k
        heapq.heappush(heap, (td, c))


@njit(cache=True)
def _pop_pivot(heap):
    """Smallest entry of the mod-2 sum held in ``heap``, or code -1 if it is zero.

    Equal codes sit next to each other at the top of the heap, so pairs of
    them cancel as they surface. The pivot itself is pushed back.
    """
    while len(heap) > 0:
        top = heapq.heappop(heap)
        count = 1
        while len(heap) > 0 and heap[0][1] == top[1]:
            heapq.heappop(heap)
            count += 1
        if count % 2 == 1:
            heapq.heappush(heap, top)
            return top
    return (np.inf, -1)


@njit(cache=True)
def _odd_entries(edges):
    """Edges occurring an odd number of times, i.e. the sum over Z/2."""
    srt = np.sort(edges)
    out = np.empty(len(srt), dtype=np.int64)
    m = 0
    a = 0
    while a < len(srt):
        b = a
        while b < len(srt) and srt[b] == srt[a]:
            b += 1
        if (b - a) % 2 == 1:
            out[m] = srt[a]
            m += 1
        a = b
    return out[:m]


@njit(cache=True)
def _min_cofacet(dist, threshold, i, j, d_ij, n):
    best_d = np.inf
    best_c = -1
    for k in range(n):
        if k == i or k == j:
            continue
        dik = dist[i, k]
        djk = dist[j, k]
        if dik > threshold or djk > threshold:
            continue
        td = d_ij
        if dik > td:
            td = dik
        if djk > td:
            td = djk
        if k < i:
            c = (k * n + i) * n + j
        elif k < j:
            c = (i * n + k) * n + j
        else:
            c = (i * n + j) * n + k
        if td < best_d or (td == best_d and c < best_c):
            best_d = td
            best_c = c
    return best_d, best_c


@njit(cache=True)
def _h1_cohomology(dist, threshold, ei, ej, ed, cleared):
    n = dist.shape[0]
    n_edges = len(ei)
    births = np.empty(n_edges, dtype=np.float64)
    deaths = np.empty(n_edges, dtype=np.float64)
    n_bars = 0
    pivot_owner = Dict.empty(key_type=nbt.int64, value_type=nbt.int64)
    # reduction records: which coboundaries a reduced column is the sum of
    records = Dict.empty(key_type=nbt.int64, value_type=nbt.int64[:])
    for e in range(n_edges - 1, -1, -1):
        if cleared[e]:
            continue
        i = ei[e]
        j = ej[e]
        d_ij = ed[e]
        pd, pc = _min_cofacet(dist, threshold, i, j, d_ij, n)
        if pc < 0:
            births[n_bars] = d_ij
            deaths[n_bars] = np.inf
            n_bars += 1
            continue
        if pc not in pivot_owner:
            # already reduced; its column is just its coboundary
            pivot_owner[pc] = e
            births[n_bars] = d_ij
            deaths[n_bars] = pd
            n_bars += 1
            continue
        heap = [(pd, pc)]
        heap.pop()
        _push_coboundary(heap, dist, threshold, i, j, d_ij, n)
        added = [e]
        pivot = _pop_pivot(heap)
        while pivot[1] >= 0 and pivot[1] in pivot_owner:
            other = pivot_owner[pivot[1]]
            if other in records:
                for f in records[other]:
                    added.append(f)
                    _push_coboundary(heap, dist, threshold, ei[f], ej[f], ed[f], n)
            else:
                added.append(other)
                _push_coboundary(heap, dist, threshold, ei[other], ej[other], ed[other], n)
            pivot = _pop_pivot(heap)
        births[n_bars] = d_ij
        if pivot[1] < 0:
            deaths[n_bars] = np.inf
        else:
            deaths[n_bars] = pivot[0]
            pivot_owner[pivot[1]] = e
            records[e] = _odd_entries(np.array(added, dtype=np.int64))
        n_bars += 1
    return births[:n_bars], deaths[:n_bars]


def _to_barcode(degree, births, deaths, keep_zero):
    bars = [
        Bar(degree, float(b), float(d))
        for b, d in zip(births, deaths)
        if keep_zero or d > b
    ]
    bars.sort(key=lambda x: (x.birth, x.death))
    return Barcode(tuple(bars), degree)


def rips_persistence(
    points,
    max_dim: int = 1,
    max_radius: float | None = None,
    keep_zero: bool = False,
    dist: np.ndarray | None = None,
) -> dict[int, Barcode]:
    """Persistence diagrams of the Vietoris-Rips filtration, degrees ``0..max_dim``.

    ``max_radius`` defaults to the enclosing radius, past which no degree-1
    class survives. Classes still alive at an explicit, smaller radius get an
    infinite death. Zero-length pairs are dropped unless ``keep_zero``.
    """
    if max_dim not in (0, 1):
        raise ValueError(f"max_dim must be 0 or 1, got {max_dim}")
    if dist is None:
        pc = as_point_cloud(points)
        if len(pc) < 2:
            raise ValueError("Rips persistence needs at least two points")
        dist = distance_matrix(pc)
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    n = dist.shape[0]
    if n < 2:
        raise ValueError("Rips persistence needs at least two points")
    threshold = enclosing_radius(dist) if max_radius is None else float(max_radius)
    if threshold < 0 or math.isnan(threshold):
        raise ValueError("max_radius must be nonnegative")

    ei, ej, ed = _sorted_edges(dist, threshold)
    merges = _kruskal(n, ei, ej)
    h0_deaths = ed[merges]
    n_essential = n - len(h0_deaths)
    births0 = np.zeros(len(h0_deaths) + n_essential)
    deaths0 = np.concatenate([h0_deaths, np.full(n_essential, np.inf)])
    out = {0: _to_barcode(0, births0, deaths0, keep_zero)}
    if max_dim >= 1:
        b1, d1 = _h1_cohomology(dist, threshold, ei, ej, ed, merges)
        out[1] = _to_barcode(1, b1, d1, keep_zero)
    return out


# --- explicit route ---------------------------------------------------------


@dataclass(frozen=True, order=True)
class FilteredSimplex:
    filtration_value: float
    dimension: int
    vertices: tuple[int, ...]


def filtration(points, max_dim: int = 1, max_radius: float | None = None, dist=None) -> list[FilteredSimplex]:
    """All simplices of dimension <= max_dim + 1 in filtration order."""
    if dist is None:
        dist = distance_matrix(points)
    n = dist.shape[0]
    threshold = enclosing_radius(dist) if max_radius is None else max_radius
    simplices = [FilteredSimplex(0.0, 0, (v,)) for v in range(n)]
    for k in range(2, max_dim + 3):
        for verts in combinations(range(n), k):
            value = max(dist[a, b] for a, b in combinations(verts, 2))
            if value <= threshold:
                simplices.append(FilteredSimplex(float(value), k - 1, verts))
    simplices.sort()
    return simplices


class BoundaryMatrix:
    """Sparse Z/2 boundary matrix; columns are sets of row indices."""

    def __init__(self, simplices: list[FilteredSimplex]):
        self.simplices = simplices
        index = {s.vertices: i for i, s in enumerate(simplices)}
        self.columns: list[set[int]] = []
        for s in simplices:
            if s.dimension == 0:
                self.columns.append(set())
            else:
                self.columns.append(
                    {index[f] for f in combinations(s.vertices, len(s.vertices) - 1)}
                )

    def reduce(self) -> dict[int, int]:
        """Column reduction with clearing; returns ``{birth_index: death_index}``."""
        low_owner: dict[int, int] = {}
        pairs: dict[int, int] = {}
        max_dim = max((s.dimension for s in self.simplices), default=0)
        by_dim = [
            [j for j, s in enumerate(self.simplices) if s.dimension == d]
            for d in range(max_dim + 1)
        ]
        # clearing: go from the top dimension down and skip columns known to be births
        for d in range(max_dim, 0, -1):
            for j in by_dim[d]:
                if j in pairs:
                    self.columns[j] = set()
                    continue
                col = self.columns[j]
                while col:
                    low = max(col)
                    if low not in low_owner:
                        break
                    col ^= self.columns[low_owner[low]]
                if col:
                    low = max(col)
                    low_owner[low] = j
                    pairs[low] = j
        return pairs


def rips_persistence_explicit(points, max_dim: int = 1, max_radius=None, keep_zero=False, dist=None):
    """Same diagrams as ``rips_persistence`` via an explicit boundary matrix. Small inputs only."""
    if dist is None:
        dist = distance_matrix(points)
    simplices = filtration(None, max_dim, max_radius, dist=dist)
    pairs = BoundaryMatrix(simplices).reduce()
    deaths_of = set(pairs.values())
    per_degree: dict[int, list[tuple[float, float]]] = {d: [] for d in range(max_dim + 1)}
    for j, s in enumerate(simplices):
        if s.dimension > max_dim or j in deaths_of:
            continue
        if j in pairs:
            per_degree[s.dimension].append((s.filtration_value, simplices[pairs[j]].filtration_value))
        else:
            per_degree[s.dimension].append((s.filtration_value, math.inf))
    return {
        d: _to_barcode(d, [p[0] for p in v], [p[1] for p in v], keep_zero)
        for d, v in per_degree.items()
    }
