"""Point-cloud and time-series generators for the circle, noise and GBM experiments."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .barcode import as_point_cloud

# bounding rectangle of the intertwined circles, also the outlier box
OUTLIER_BOX = ((-1.75, 1.75), (-1.0, 1.0))
INTERTWINED_CENTERS = ((-0.75, 0.0), (0.75, 0.0))
DISJOINT_RADII = (1.0, 0.25)
DISJOINT_CENTERS = ((0.0, 0.0), (4.0, 0.0))


@dataclass(frozen=True)
class RngSeed:
    """Deterministic random stream keyed by ``(seed, experiment, trial)``.

    Each key maps to its own Philox counter stream, so trials can run in any
    order or in parallel and still produce identical draws.
    """

    seed: int = 0
    experiment: str = ""
    trial: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.trial < 0:
            raise ValueError("trial index must be nonnegative")

    def for_trial(self, experiment: str, trial: int) -> RngSeed:
        return RngSeed(self.seed, experiment, trial)

    def spawn(self, label: str) -> RngSeed:
        """Independent sub-stream for one component of a trial (e.g. sampling vs noise)."""
        return RngSeed(self.seed, f"{self.experiment}/{label}", self.trial)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            self.seed, spawn_key=(zlib.crc32(self.experiment.encode()), self.trial)
        )
        return np.random.Generator(np.random.Philox(ss))

    def uniform(self, size) -> np.ndarray:
        """Uniform draws on the open interval (0, 1), 53 bits each."""
        gen = self.generator()
        raw = gen.bit_generator.random_raw(int(np.prod(size)))
        return (((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53).reshape(size)


def _normals(rng: RngSeed, size) -> np.ndarray:
    return ndtri(rng.uniform(size))


def circle_equidistant(r: float, n: int, center=(0.0, 0.0)) -> np.ndarray:
    if n < 3:
        raise ValueError("need at least 3 points on a circle")
    if r <= 0:
        raise ValueError("radius must be positive")
    theta = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)])


def circle_uniform(r: float, n: int, center, rng: RngSeed) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one point")
    if r <= 0:
        raise ValueError("radius must be positive")
    theta = 2.0 * np.pi * rng.uniform(n)
    return np.column_stack([center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)])


def add_gaussian_noise(points, sigma: float, rng: RngSeed) -> np.ndarray:
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    pc = as_point_cloud(points)
    if sigma == 0:
        return pc.copy()
    return pc + sigma * _normals(rng, pc.shape)


def add_uniform_outliers(points, r: float, base_n: int, rng: RngSeed, box=OUTLIER_BOX) -> np.ndarray:
    """Append ``round(base_n * r)`` points drawn uniformly from ``box``."""
    if not 0 <= r <= 1:
        raise ValueError(f"outlier intensity must lie in [0, 1], got {r}")
    pc = as_point_cloud(points)
    m = int(round(base_n * r))
    if m == 0:
        return pc.copy()
    u = rng.uniform((m, 2))
    (x0, x1), (y0, y1) = box
    extra = np.column_stack([x0 + (x1 - x0) * u[:, 0], y0 + (y1 - y0) * u[:, 1]])
    return np.vstack([pc, extra])


def disjoint_circles(n: int) -> np.ndarray:
    """``n`` equidistant points on the unit circle and ``n // 4`` on the radius-1/4 circle, far apart."""
    (r1, r2), (c1, c2) = DISJOINT_RADII, DISJOINT_CENTERS
    return np.vstack([circle_equidistant(r1, n, c1), circle_equidistant(r2, n // 4, c2)])


def intertwined_circles(n: int) -> np.ndarray:
    """Two intersecting unit circles, ``n // 2`` equidistant points each."""
    c1, c2 = INTERTWINED_CENTERS
    return np.vstack([circle_equidistant(1.0, n // 2, c1), circle_equidistant(1.0, n - n // 2, c2)])


def sampled_intertwined_circles(n: int, rng: RngSeed) -> np.ndarray:
    c1, c2 = INTERTWINED_CENTERS
    return np.vstack([
        circle_uniform(1.0, n // 2, c1, rng.spawn("left")),
        circle_uniform(1.0, n - n // 2, c2, rng.spawn("right")),
    ])


@dataclass(frozen=True)
class GbmParams:
    mu: float = 0.0
    sigma: float = 0.01
    s0: float = 1.0
    dt: float = 1.0 / 250.0
    steps: int = 500

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("volatility must be nonnegative")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.s0 <= 0:
            raise ValueError("s0 must be positive")
        if self.steps < 1:
            raise ValueError("steps must be positive")


def gbm_path(params: GbmParams, rng: RngSeed) -> np.ndarray:
    """Exact log-Euler GBM sample at ``steps + 1`` grid points."""
    p = params
    z = _normals(rng, p.steps)
    incr = (p.mu - 0.5 * p.sigma**2) * p.dt + p.sigma * math.sqrt(p.dt) * z
    log_path = np.concatenate([[0.0], np.cumsum(incr)])
    return p.s0 * np.exp(log_path)


def takens_embed(series, dim: int = 3, tau: int = 3) -> np.ndarray:
    """Delay-coordinate embedding; row i is ``(s_i, s_{i+tau}, ..., s_{i+(dim-1)tau})``."""
    s = np.asarray(series, dtype=float).ravel()
    if dim < 2 or tau < 1:
        raise ValueError("need dim >= 2 and tau >= 1")
    count = len(s) - (dim - 1) * tau
    if count < 1:
        raise ValueError(f"series of length {len(s)} too short for dim={dim}, tau={tau}")
    return np.column_stack([s[k * tau : k * tau + count] for k in range(dim)])
