"""Bars, barcodes and the diagram / point-cloud CSV formats."""

from __future__ import annotations

import contextlib
import csv
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


class UndefinedResultError(ValueError):
    """A statistic is not defined for the given barcode (e.g. zero total persistence)."""


class DiagramParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Bar:
    degree: int
    birth: float
    death: float

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError(f"negative homology degree {self.degree}")
        if math.isnan(self.birth) or math.isnan(self.death):
            raise ValueError("bar endpoints must not be NaN")
        if math.isinf(self.birth):
            raise ValueError("birth must be finite")
        if self.death < self.birth:
            raise ValueError(f"death {self.death!r} < birth {self.birth!r}")

    @property
    def finite(self) -> bool:
        return not math.isinf(self.death)

    @property
    def lifetime(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class Barcode:
    """Multiset of bars of a single homology degree.

    Bars with infinite death are kept (so files round-trip) but are left
    out of ``lifetimes`` and of every statistic derived from it.
    """

    bars: tuple[Bar, ...] = ()
    degree: int = 1
    _lifetimes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bars = tuple(self.bars)
        for bar in bars:
            if bar.degree != self.degree:
                raise ValueError(
                    f"bar of degree {bar.degree} in a degree-{self.degree} barcode"
                )
        object.__setattr__(self, "bars", bars)
        lt = np.array([b.death - b.birth for b in bars if b.finite], dtype=float)
        lt.setflags(write=False)
        object.__setattr__(self, "_lifetimes", lt)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]], degree: int = 1) -> Barcode:
        return cls(tuple(Bar(degree, float(b), float(d)) for b, d in pairs), degree)

    @classmethod
    def from_lifetimes(cls, lifetimes: Iterable[float], degree: int = 1) -> Barcode:
        """Barcode with every bar born at 0."""
        return cls(tuple(Bar(degree, 0.0, float(x)) for x in lifetimes), degree)

    @property
    def lifetimes(self) -> np.ndarray:
        return self._lifetimes

    @property
    def n(self) -> int:
        return len(self._lifetimes)

    @property
    def n_infinite(self) -> int:
        return sum(1 for b in self.bars if not b.finite)

    @property
    def total_persistence(self) -> float:
        return math.fsum(self._lifetimes)

    @property
    def mean_lifetime(self) -> float:
        if self.n == 0:
            raise UndefinedResultError("mean lifetime of an empty barcode")
        return self.total_persistence / self.n

    def finite_bars(self) -> tuple[Bar, ...]:
        return tuple(b for b in self.bars if b.finite)

    def cap_infinite(self, cap: float) -> Barcode:
        """Replace infinite deaths by ``cap`` (or by the birth, if later)."""
        return Barcode(
            tuple(
                b if b.finite else Bar(b.degree, b.birth, max(cap, b.birth))
                for b in self.bars
            ),
            self.degree,
        )

    def drop_infinite(self) -> Barcode:
        return Barcode(self.finite_bars(), self.degree)

    def __len__(self) -> int:
        return len(self.bars)

    def __iter__(self):
        return iter(self.bars)


def lifetimes(b: Barcode | Iterable[float]) -> np.ndarray:
    """Lifetime multiset ``death - birth`` of the finite bars.

    Plain sequences of numbers are accepted and treated as lifetimes already.
    """
    if isinstance(b, Barcode):
        return b.lifetimes
    arr = np.asarray(list(b) if not isinstance(b, np.ndarray) else b, dtype=float)
    if arr.ndim != 1:
        raise ValueError("lifetimes must be one-dimensional")
    if np.any(arr < 0) or np.any(~np.isfinite(arr)):
        raise ValueError("lifetimes must be finite and nonnegative")
    return arr


def total_persistence(b: Barcode | Iterable[float]) -> float:
    return math.fsum(lifetimes(b))


# --- file formats -----------------------------------------------------------

DIAGRAM_HEADER = ("degree", "birth", "death")


def format_float(x: float) -> str:
    """Shortest decimal text that round-trips to the same double."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def _parse_float(text: str, what: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DiagramParseError(f"non-numeric {what} {text!r}", line) from None
    if math.isnan(value):
        raise DiagramParseError(f"NaN {what}", line)
    return value


def _open_read(path):
    """Open ``path`` for CSV reading; ``-`` means standard input."""
    if str(path) == "-":
        return contextlib.nullcontext(sys.stdin)
    return open(path, newline="")


def load_diagram(path: str | Path, cap: float | None = None) -> dict[int, Barcode]:
    """Read a diagram CSV into one barcode per homology degree.

    Infinite bars are kept but excluded from statistics; pass ``cap`` to
    truncate their deaths instead. Bar order follows the file. ``path`` may
    be ``-`` for standard input.
    """
    per_degree: dict[int, list[Bar]] = {}
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return {}
        if tuple(h.strip() for h in header) != DIAGRAM_HEADER:
            raise DiagramParseError(f"expected header {','.join(DIAGRAM_HEADER)}", 1)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise DiagramParseError(f"expected 3 fields, got {len(row)}", line)
            try:
                degree = int(row[0])
            except ValueError:
                raise DiagramParseError(f"non-integer degree {row[0]!r}", line) from None
            birth = _parse_float(row[1], "birth", line)
            death = _parse_float(row[2], "death", line)
            if degree < 0:
                raise DiagramParseError(f"negative degree {degree}", line)
            if math.isinf(birth):
                raise DiagramParseError("infinite birth", line)
            if death < birth:
                raise DiagramParseError(f"death {row[2]} < birth {row[1]}", line)
            if cap is not None and math.isinf(death):
                death = max(cap, birth)
            per_degree.setdefault(degree, []).append(Bar(degree, birth, death))
    return {d: Barcode(tuple(bars), d) for d, bars in sorted(per_degree.items())}


def save_diagram(path: str | Path, diagrams: Mapping[int, Barcode] | Barcode) -> None:
    if isinstance(diagrams, Barcode):
        diagrams = {diagrams.degree: diagrams}
    with open(path, "w", newline="") as fh:
        write_diagram(fh, diagrams)


def write_diagram(fh, diagrams: Mapping[int, Barcode]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(DIAGRAM_HEADER)
    for degree in sorted(diagrams):
        for bar in diagrams[degree].bars:
            writer.writerow([bar.degree, format_float(bar.birth), format_float(bar.death)])


def load_point_cloud(path: str | Path) -> np.ndarray:
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DiagramParseError("empty point-cloud file", 1)
        expected = [f"x{i}" for i in range(len(header))]
        if [h.strip() for h in header] != expected:
            raise DiagramParseError(f"expected header {','.join(expected)}", 1)
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise DiagramParseError(
                    f"expected {len(header)} fields, got {len(row)}", reader.line_num
                )
            vals = [_parse_float(c, "coordinate", reader.line_num) for c in row]
            if not all(math.isfinite(v) for v in vals):
                raise DiagramParseError("non-finite coordinate", reader.line_num)
            rows.append(vals)
    return np.array(rows, dtype=float).reshape(len(rows), len(header))


def write_point_cloud(fh, points: np.ndarray) -> None:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([f"x{i}" for i in range(points.shape[1])])
    for p in points:
        writer.writerow([format_float(v) for v in p])


def save_point_cloud(path: str | Path, points: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        write_point_cloud(fh, points)


def as_point_cloud(points) -> np.ndarray:
    """Validate and return an ``(n, d)`` float array."""
    pc = np.asarray(points, dtype=float)
    if pc.ndim == 1:
        pc = pc[:, None]
    if pc.ndim != 2 or pc.shape[1] < 1:
        raise ValueError("point cloud must be an (n, d) array with d >= 1")
    if not np.all(np.isfinite(pc)):
        raise ValueError("point cloud has non-finite coordinates")
    return pc
