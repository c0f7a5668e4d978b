"""Persistent entropy, Renyi entropy and the normalized TSI (cvTSI).

All logarithms are natural. Zero weights contribute nothing to any sum.
"""

from __future__ import annotations

import math

import numpy as np

from .barcode import UndefinedResultError, lifetimes
from .summaries import tsi


def weights(b) -> np.ndarray:
    """Normalized lifetimes ``p_i = l_i / L``, renormalized by their computed sum."""
    lt = lifetimes(b)
    total = math.fsum(lt)
    if total <= 0:
        raise UndefinedResultError("weights need positive total persistence")
    p = lt / total
    return p / math.fsum(p)


def persistent_entropy(b) -> float:
    p = weights(b)
    p = p[p > 0]
    return max(0.0, -math.fsum(p * np.log(p)))


def renyi_entropy(b, alpha: float) -> float:
    if not alpha > 0 or alpha == 1:
        raise ValueError(f"Renyi order must be positive and != 1, got {alpha}")
    p = weights(b)
    p = p[p > 0]
    if alpha == 2:
        return 0.0 - math.log(math.fsum(p * p))
    return math.log(math.fsum(p**alpha)) / (1.0 - alpha)


def _check_cv(b) -> np.ndarray:
    lt = lifetimes(b)
    if len(lt) < 2:
        raise UndefinedResultError("cvTSI needs at least two bars")
    if math.fsum(lt) <= 0:
        raise UndefinedResultError("cvTSI needs positive total persistence")
    return lt


def cvtsi(b) -> float:
    """TSI divided by the squared mean lifetime; lies in ``[0, n]``."""
    lt = _check_cv(b)
    mean = math.fsum(lt) / len(lt)
    return tsi(lt) / (mean * mean)


def cvtsi_over_n(b) -> float:
    return cvtsi(b) / len(_check_cv(b))


def collision_probability(b) -> float:
    """``sum(p_i^2)``: chance that two independent draws from the weights coincide."""
    _check_cv(b)
    p = weights(b)
    return math.fsum(p * p)


def distance_to_uniform_sq(b) -> float:
    lt = _check_cv(b)
    p = weights(b)
    d = p - 1.0 / len(lt)
    return math.fsum(d * d)


def cvtsi_from_renyi2(n: int, h2: float) -> float:
    """Invert the order-2 Renyi entropy of an ``n``-bar barcode back to its cvTSI."""
    if n < 2:
        raise ValueError("cvtsi_from_renyi2 needs n >= 2")
    q = math.exp(-h2)
    slack = 1e-12
    if q < 1.0 / n - slack or q > 1.0 + slack:
        raise ValueError(f"h2={h2} outside the feasible range [0, ln {n}]")
    return max(n * n / (n - 1) * (q - 1.0 / n), 0.0)


def renyi2_from_cvtsi(n: int, cv: float) -> float:
    if n < 2:
        raise ValueError("renyi2_from_cvtsi needs n >= 2")
    if not 0 <= cv <= n * (1 + 1e-12):
        raise ValueError(f"cvTSI {cv} outside [0, {n}]")
    return -math.log(1.0 / n + (n - 1) / (n * n) * cv)


def entropy_expansion_residual(b) -> float:
    """Persistent entropy minus its quadratic approximation ``ln n - (n-1)/(2n) cvTSI``."""
    lt = _check_cv(b)
    n = len(lt)
    return persistent_entropy(b) - (math.log(n) - (n - 1) / (2 * n) * cvtsi(b))
