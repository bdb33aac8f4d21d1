"""Finite arc unions on the unit circle, Stolz angles and approach paths."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-12


def reduce_angle(theta: float) -> float:
    """Reduce an angle to [0, 2*pi)."""
    t = math.fmod(theta, TWO_PI)
    if t < 0.0:
        t += TWO_PI
    if t >= TWO_PI - ANGLE_TOL:
        t = 0.0
    return t


@dataclass(frozen=True, init=False)
class Arc:
    """Closed counterclockwise arc from ``start`` to ``end``.

    ``Arc(0, 2*pi)`` (or any raw span of a full turn) is the full circle.
    """

    start: float
    length: float
    full: bool

    def __init__(self, start: float, end: float, full: bool = False):
        raw = end - start
        if full or raw >= TWO_PI - ANGLE_TOL:
            object.__setattr__(self, "start", 0.0)
            object.__setattr__(self, "length", TWO_PI)
            object.__setattr__(self, "full", True)
            return
        length = math.fmod(raw, TWO_PI)
        if length < 0.0:
            length += TWO_PI
        if length <= ANGLE_TOL or length >= TWO_PI - ANGLE_TOL:
            raise ValueError(f"degenerate arc [{start}, {end}]")
        object.__setattr__(self, "start", reduce_angle(start))
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "full", False)

    @classmethod
    def circle(cls) -> "Arc":
        return cls(0.0, TWO_PI, full=True)

    @property
    def end(self) -> float:
        if self.full:
            return TWO_PI
        return reduce_angle(self.start + self.length)

    @property
    def midpoint(self) -> float:
        return reduce_angle(self.start + 0.5 * self.length)

    def endpoints(self) -> tuple[complex, complex]:
        return complex(np.exp(1j * self.start)), complex(np.exp(1j * (self.start + self.length)))

    def offset(self, theta):
        """Counterclockwise offset of ``theta`` from the start, in [0, 2*pi)."""
        return np.mod(np.asarray(theta, dtype=float) - self.start, TWO_PI)

    def contains(self, theta, open_: bool = False):
        if self.full:
            return np.ones(np.shape(theta), dtype=bool)
        d = self.offset(theta)
        if open_:
            return (d > ANGLE_TOL) & (d < self.length - ANGLE_TOL)
        return (d <= self.length + ANGLE_TOL) | (d >= TWO_PI - ANGLE_TOL)

    def intervals(self) -> list[tuple[float, float]]:
        """Non-wrapping sub-intervals of [0, 2*pi] covering the arc."""
        if self.full:
            return [(0.0, TWO_PI)]
        stop = self.start + self.length
        if stop <= TWO_PI:
            return [(self.start, stop)]
        return [(self.start, TWO_PI), (0.0, stop - TWO_PI)]

    def as_pair(self) -> list[float]:
        return [self.start, self.start + self.length]


@dataclass(frozen=True)
class BoundarySet:
    """Normalized finite union of arcs of the unit circle.

    With ``open_=True`` the arc endpoints are excluded from membership; this is
    how the regular part of a closed arc union is represented.
    """

    arcs: tuple[Arc, ...] = ()
    open_: bool = False

    @classmethod
    def empty(cls) -> "BoundarySet":
        return cls(())

    @classmethod
    def circle(cls) -> "BoundarySet":
        return cls((Arc.circle(),))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "BoundarySet":
        return normalize([Arc(float(s), float(e)) for s, e in pairs])

    def to_pairs(self) -> list[list[float]]:
        return [arc.as_pair() for arc in self.arcs]

    @property
    def is_empty(self) -> bool:
        return not self.arcs

    @property
    def is_full(self) -> bool:
        return len(self.arcs) == 1 and self.arcs[0].full

    def measure(self) -> float:
        return measure(self)

    def contains(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape, dtype=bool)
        for arc in self.arcs:
            out |= arc.contains(theta, open_=self.open_)
        return out

    def contains_point(self, z, tol: float = ANGLE_TOL):
        """Membership of points of the plane (only points of the circle can belong)."""
        z = np.asarray(z, dtype=complex)
        on_circle = np.abs(np.abs(z) - 1.0) <= tol
        return on_circle & self.contains(np.angle(z))

    def intervals(self) -> list[tuple[float, float]]:
        out: list[tuple[float, float]] = []
        for arc in self.arcs:
            out.extend(arc.intervals())
        return sorted(out)

    def closure(self) -> "BoundarySet":
        return BoundarySet(self.arcs, open_=False)

    def union(self, other: "BoundarySet") -> "BoundarySet":
        return normalize(list(self.arcs) + list(other.arcs))

    def intersection(self, other: "BoundarySet") -> "BoundarySet":
        pieces = []
        for lo1, hi1 in self.intervals():
            for lo2, hi2 in other.intervals():
                lo, hi = max(lo1, lo2), min(hi1, hi2)
                if hi - lo > ANGLE_TOL:
                    pieces.append((lo, hi))
        return _from_intervals(pieces)

    def complement(self) -> "BoundarySet":
        if self.is_empty:
            return BoundarySet.circle()
        gaps = []
        cursor = 0.0
        for lo, hi in self.intervals():
            if lo - cursor > ANGLE_TOL:
                gaps.append((cursor, lo))
            cursor = max(cursor, hi)
        if TWO_PI - cursor > ANGLE_TOL:
            gaps.append((cursor, TWO_PI))
        return _from_intervals(gaps)

    def difference(self, other: "BoundarySet") -> "BoundarySet":
        return self.intersection(other.complement())

    def issubset(self, other: "BoundarySet", tol: float = 1e-10) -> bool:
        return self.difference(other).measure() <= tol


def _from_intervals(pieces: list[tuple[float, float]]) -> BoundarySet:
    arcs = [Arc(lo, hi) for lo, hi in pieces if hi - lo > ANGLE_TOL]
    return normalize(arcs)


def normalize(arcs: Iterable[Arc]) -> BoundarySet:
    """Merge arcs into a sorted union of pairwise disjoint arcs.

    Overlapping and touching arcs are merged; an arc crossing angle 0 is kept as
    a single wrapping arc.
    """
    pieces: list[tuple[float, float]] = []
    for arc in arcs:
        if not isinstance(arc, Arc):
            raise TypeError(f"expected Arc, got {type(arc).__name__}")
        pieces.extend(arc.intervals())
    if not pieces:
        return BoundarySet(())
    pieces.sort()
    merged = [list(pieces[0])]
    for lo, hi in pieces[1:]:
        if lo <= merged[-1][1] + ANGLE_TOL:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    if len(merged) == 1 and merged[0][0] <= ANGLE_TOL and merged[0][1] >= TWO_PI - ANGLE_TOL:
        return BoundarySet.circle()
    # glue the piece ending at 2*pi onto the piece starting at 0
    if len(merged) > 1 and merged[0][0] <= ANGLE_TOL and merged[-1][1] >= TWO_PI - ANGLE_TOL:
        head = merged.pop(0)
        merged[-1][1] = TWO_PI + head[1]
    out = [Arc(lo, hi) for lo, hi in merged]
    out.sort(key=lambda a: a.start)
    return BoundarySet(tuple(out))


def measure(A: BoundarySet) -> float:
    """Total arc length of ``A`` in radians."""
    return float(sum(arc.length for arc in A.arcs))


def regular_points(A: BoundarySet) -> BoundarySet:
    """Locally regular points of a closed arc union: the arcs without endpoints."""
    if A.is_full or A.is_empty:
        return A.closure()
    return BoundarySet(A.arcs, open_=True)


@dataclass(frozen=True)
class StolzRegion:
    """Angular approach region at ``exp(1j*vertex)`` with half-opening ``opening``."""

    vertex: float
    opening: float

    def __post_init__(self):
        if not 0.0 < self.opening < 0.5 * math.pi:
            raise ValueError("opening must lie in (0, pi/2)")

    @property
    def zeta(self) -> complex:
        return complex(np.exp(1j * self.vertex))

    def contains(self, z):
        return stolz_contains(self, z)


def stolz_contains(S: StolzRegion, z):
    z = np.asarray(z, dtype=complex)
    zeta = S.zeta
    with np.errstate(invalid="ignore"):
        inside = np.abs(z) < 1.0
        ang = np.abs(np.angle((zeta - z) / zeta))
    return inside & (ang < S.opening)


@dataclass(frozen=True)
class ApproachPath:
    vertex: float
    opening: float
    points: np.ndarray
    q: float

    @property
    def zeta(self) -> complex:
        return complex(np.exp(1j * self.vertex))

    def distances(self) -> np.ndarray:
        return np.abs(self.points - self.zeta)


def approach_path(vertex: float, opening: float = math.pi / 4, n: int = 40,
                  q: float = 0.8, start: float = 0.5) -> ApproachPath:
    """Points on the radius ending at ``exp(1j*vertex)`` with distances ``start*q**k``."""
    if not 0.0 < q < 1.0:
        raise ValueError("ratio q must lie in (0, 1)")
    if n < 3:
        raise ValueError("need at least 3 points")
    if not 0.0 < start <= 1.0:
        raise ValueError("start distance must lie in (0, 1]")
    zeta = np.exp(1j * vertex)
    d = start * q ** np.arange(n)
    pts = zeta * (1.0 - d)
    return ApproachPath(vertex, opening, pts, q)


def aitken_limit(values, tol: float = 1e-6):
    """Aitken-extrapolated limit of a geometrically converging sequence.

    Returns ``(value, error, ok)``. ``ok`` is False when the tail differences
    grow (divergence) or the last three extrapolants disagree by more than
    ``tol``. Near-degenerate second differences fall back to the raw value.
    """
    v = np.asarray(values, dtype=complex)
    v = v[np.isfinite(v)]
    if v.size < 5:
        return (complex(v[-1]) if v.size else complex(math.nan)), math.inf, False
    d1 = np.diff(v)
    d2 = np.diff(d1)
    ext = v[2:].copy()
    scale = np.abs(d1[1:])
    good = (np.abs(d2) > 1e-3 * scale) & (scale > 1e-15 * (1.0 + np.abs(v[2:])))
    ext[good] = v[2:][good] - d1[1:][good] ** 2 / d2[good]
    tail = np.abs(d1[-8:])
    floor = 1e-13 * (1.0 + np.max(np.abs(v[-3:])))
    growing = np.any(tail[1:] > tail[:-1] + floor)
    last = ext[-3:]
    err = float(np.max(np.abs(last - last[-1])))
    ok = (not growing) and err <= tol
    return complex(ext[-1]), err, ok
