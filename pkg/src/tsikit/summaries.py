"""First- and second-moment summaries of a lifetime multiset."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .barcode import Bar, Barcode, UndefinedResultError, format_float, lifetimes

# relative tolerance used when deciding that all lifetimes coincide
EQUAL_RTOL = 1e-12


def _centered_sq_sum(lt: np.ndarray) -> float:
    """Sum of squared deviations from the mean, two-pass with fsum."""
    n = len(lt)
    mean = math.fsum(lt) / n
    dev = lt - mean
    # second-pass correction for the rounding error in ``mean``
    corr = math.fsum(dev)
    return max(math.fsum(dev * dev) - corr * corr / n, 0.0)


def tsi(b) -> float:
    """Unbiased sample variance of the lifetimes; 0 for fewer than two bars."""
    lt = lifetimes(b)
    n = len(lt)
    if n <= 1:
        return 0.0
    return _centered_sq_sum(lt) / (n - 1)


def population_variance(b) -> float:
    lt = lifetimes(b)
    if len(lt) == 0:
        return 0.0
    return _centered_sq_sum(lt) / len(lt)


def all_equal(b) -> bool:
    lt = lifetimes(b)
    if len(lt) <= 1:
        return True
    tol = EQUAL_RTOL * max(1.0, math.fsum(lt) / len(lt))
    return float(lt.max() - lt.min()) <= tol


def tsi_bounds(n: int, total: float) -> tuple[float, float]:
    """Range of the TSI over all barcodes with ``n`` bars and total persistence ``total``."""
    if n < 2:
        raise ValueError("tsi_bounds needs n >= 2")
    if total < 0:
        raise ValueError("total persistence must be nonnegative")
    return 0.0, total * total / n


def scale(b: Barcode, c: float) -> Barcode:
    """Map every bar ``[b, d)`` to ``[c*b, c*d)``."""
    if c < 0:
        raise ValueError(f"scale factor must be nonnegative, got {c}")
    return Barcode(
        tuple(Bar(x.degree, c * x.birth, c * x.death if x.finite else x.death) for x in b.bars),
        b.degree,
    )


def shift_deaths(b: Barcode, c: float) -> Barcode:
    """Map every bar ``[b, d)`` to ``[b, d + c)``.

    A nonzero ``c`` must exceed minus the shortest lifetime; ``c = 0`` is
    always the identity, zero-length bars included.
    """
    lt = b.lifetimes
    if c == 0:
        return b
    if len(lt) and not c > -float(lt.min()):
        raise ValueError(
            f"shift {c} would make a lifetime nonpositive (min lifetime {lt.min()})"
        )
    return Barcode(
        tuple(Bar(x.degree, x.birth, x.death + c) for x in b.bars),
        b.degree,
    )


def tsigi(b) -> float:
    """Persistence-weighted mean lifetime, sum(l^2) / sum(l)."""
    lt = lifetimes(b)
    total = math.fsum(lt)
    if total <= 0:
        raise UndefinedResultError("TSigI needs positive total persistence")
    lmax = float(lt.max())
    r = lt / lmax
    return lmax * math.fsum(r * r) / math.fsum(r)


def moment(b, k: int) -> float:
    """Ratio of consecutive lifetime power sums, ``S_k / S_{k-1}``.

    ``moment(b, 1)`` is the mean lifetime and ``moment(b, 2)`` the TSigI.
    Powers are taken of ``l / l_max`` so large ``k`` does not overflow.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"moment order must be a positive integer, got {k}")
    k = int(k)
    lt = lifetimes(b)
    n = len(lt)
    if n == 0:
        raise UndefinedResultError("moments of an empty barcode are undefined")
    lmax = float(lt.max())
    if k == 1:
        return math.fsum(lt) / n
    if lmax == 0:
        raise UndefinedResultError(f"M_{k} undefined: all lifetimes are zero")
    r = lt / lmax
    num = math.fsum(r**k)
    den = math.fsum(r ** (k - 1))
    return lmax * num / den


def moments(b, kmax: int) -> list[tuple[int, float]]:
    return [(k, moment(b, k)) for k in range(1, kmax + 1)]


@dataclass(frozen=True)
class SummaryReport:
    n: int
    total_persistence: float
    mean_lifetime: float | None
    tsi: float
    tsigi: float | None
    moments: tuple[tuple[int, float | None], ...] = field(default_factory=tuple)
    entropy: float | None = None
    renyi2: float | None = None
    cvtsi: float | None = None
    cvtsi_over_n: float | None = None
    degree: int = 1

    def columns(self) -> list[str]:
        cols = ["n", "L", "mean", "tsi", "tsigi"]
        cols += [f"M{k}" for k, _ in self.moments]
        cols += ["entropy", "renyi2", "cvtsi", "cvtsi_over_n"]
        return cols

    def values(self) -> list:
        vals = [self.n, self.total_persistence, self.mean_lifetime, self.tsi, self.tsigi]
        vals += [m for _, m in self.moments]
        vals += [self.entropy, self.renyi2, self.cvtsi, self.cvtsi_over_n]
        return vals

    def csv_row(self) -> list[str]:
        out = []
        for v in self.values():
            if v is None:
                out.append("")
            elif isinstance(v, int):
                out.append(str(v))
            else:
                out.append(format_float(v))
        return out

    def to_dict(self) -> dict:
        d = {"degree": self.degree}
        d.update(zip(self.columns(), self.values()))
        return d


def _maybe(fn, *args):
    try:
        return fn(*args)
    except UndefinedResultError:
        return None


def summarize(b: Barcode, n_moments: int = 3) -> SummaryReport:
    """All scalar statistics of one barcode; undefined ones come back as ``None``."""
    from . import entropy as ent

    n = b.n
    return SummaryReport(
        n=n,
        total_persistence=b.total_persistence,
        mean_lifetime=b.mean_lifetime if n else None,
        tsi=tsi(b),
        tsigi=_maybe(tsigi, b),
        moments=tuple((k, _maybe(moment, b, k)) for k in range(1, n_moments + 1)),
        entropy=_maybe(ent.persistent_entropy, b),
        renyi2=_maybe(ent.renyi_entropy, b, 2),
        cvtsi=_maybe(ent.cvtsi, b),
        cvtsi_over_n=_maybe(ent.cvtsi_over_n, b),
        degree=b.degree,
    )
