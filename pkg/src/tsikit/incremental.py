"""Closed-form TSI / cvTSI updates when a single bar is inserted or deleted."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .barcode import Barcode, UndefinedResultError, lifetimes

# absolute tolerance for "this lifetime is in the multiset" on delete
MEMBER_ATOL = 1e-9


@dataclass(frozen=True)
class RunningStats:
    """Power sums ``(n, S1, S2)`` of a lifetime multiset.

    ``members`` optionally keeps the multiset itself, so deletions can be
    checked for membership; the update formulas never read it.
    """

    n: int = 0
    total: float = 0.0
    total_sq: float = 0.0
    members: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n < 0 or self.total < 0:
            raise ValueError("RunningStats needs n >= 0 and a nonnegative sum")

    @classmethod
    def from_lifetimes(cls, values: Iterable[float] | Barcode, keep_members: bool = True) -> RunningStats:
        lt = lifetimes(values)
        return cls(
            len(lt),
            math.fsum(lt),
            math.fsum(lt * lt),
            tuple(float(x) for x in lt) if keep_members else None,
        )

    @property
    def mean(self) -> float:
        if self.n == 0:
            raise UndefinedResultError("mean of an empty multiset")
        return self.total / self.n

    @property
    def tsi(self) -> float:
        if self.n <= 1:
            return 0.0
        return max(self.total_sq - self.total * self.total / self.n, 0.0) / (self.n - 1)

    @property
    def cvtsi(self) -> float:
        if self.n < 2 or self.total <= 0:
            raise UndefinedResultError("cvTSI needs n >= 2 and positive total")
        return self.tsi / self.mean**2

    def insert(self, ell: float) -> RunningStats:
        if ell < 0:
            raise ValueError("lifetimes are nonnegative")
        members = None if self.members is None else self.members + (float(ell),)
        return RunningStats(self.n + 1, self.total + ell, self.total_sq + ell * ell, members)

    def delete(self, ell: float) -> RunningStats:
        members = None
        if self.members is not None:
            idx = _member_index(self.members, ell)
            members = self.members[:idx] + self.members[idx + 1 :]
        if self.n == 0:
            raise ValueError("cannot delete from an empty multiset")
        return RunningStats(
            self.n - 1,
            max(self.total - ell, 0.0),
            max(self.total_sq - ell * ell, 0.0),
            members,
        )


def _member_index(members: tuple[float, ...], ell: float) -> int:
    if members:
        arr = np.asarray(members)
        i = int(np.argmin(np.abs(arr - ell)))
        if abs(arr[i] - ell) <= MEMBER_ATOL:
            return i
    raise ValueError(f"lifetime {ell} is not in the multiset")


def _stats(x) -> RunningStats:
    return x if isinstance(x, RunningStats) else RunningStats.from_lifetimes(x)


def tsi_after_insert(stats, ell: float) -> float:
    s = _stats(stats)
    if s.n < 2:
        raise ValueError("insertion formula needs n >= 2")
    n = s.n
    delta = ell - s.mean
    return (n - 1) / n * s.tsi + delta * delta / (n + 1)


def tsi_after_delete(stats, ell: float) -> float:
    """TSI after removing one bar of length ``ell``.

    Going from two bars to one returns 0, consistent with the TSI of a
    single bar.
    """
    s = _stats(stats)
    if s.members is not None:
        _member_index(s.members, ell)
    if s.n < 2:
        raise ValueError("deletion formula needs n >= 2")
    n = s.n
    if n == 2:
        return 0.0
    delta = ell - s.mean
    return max((n - 1) / (n - 2) * s.tsi - n / ((n - 1) * (n - 2)) * delta * delta, 0.0)


def variance_barrier(stats) -> float:
    """Distance from the mean beyond which an inserted bar raises the TSI."""
    s = _stats(stats)
    if s.n < 2:
        raise ValueError("variance barrier needs n >= 2")
    return math.sqrt((s.n + 1) / s.n * s.tsi)


def increases_tsi(stats, ell: float) -> bool:
    s = _stats(stats)
    if s.n < 2:
        raise ValueError("insertion formula needs n >= 2")
    delta = ell - s.mean
    return delta * delta > (s.n + 1) / s.n * s.tsi


def cvtsi_after_insert(stats, ell: float) -> float:
    s = _stats(stats)
    if s.n < 2:
        raise ValueError("insertion formula needs n >= 2")
    if s.mean <= 0:
        raise ValueError("insertion formula needs a positive mean lifetime")
    n = s.n
    r = (ell - s.mean) / s.mean
    return (n + 1) ** 2 * (n - 1) / (n * (n + 1 + r) ** 2) * s.cvtsi + (n + 1) * (r / (n + 1 + r)) ** 2


def tsi_insert_limit(stats) -> float:
    """Value of ``tsi_after_insert`` as the inserted lifetime tends to 0."""
    s = _stats(stats)
    if s.n < 2:
        raise ValueError("insertion formula needs n >= 2")
    n = s.n
    return (n - 1) / n * s.tsi + s.mean**2 / (n + 1)


def cvtsi_insert_limit(stats) -> float:
    """Limit of ``cvtsi_after_insert`` as the inserted lifetime tends to 0; depends only on n and cvTSI."""
    s = _stats(stats)
    n = s.n
    if n < 2:
        raise ValueError("insertion formula needs n >= 2")
    return (n + 1) ** 2 * (n - 1) / n**3 * s.cvtsi + (n + 1) / n**2
