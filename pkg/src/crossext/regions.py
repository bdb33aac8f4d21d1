"""Membership-defined regions in the bidisc and their rasterization."""

from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .boundary import BoundarySet, regular_points
from .conformal import lens_arc, lens_domain_chain
from .harmonic import angular_harmonic_measure, harmonic_measure, local_harmonic_measure

TIE_TOL = 1e-12

IN_W_STAR_INTERIOR = "in_W_star_interior"
IN_W_INTERIOR = "in_W_interior"
IN_W = "in_W"
OUTSIDE = "outside"


@dataclass(frozen=True)
class Cross:
    """The cross over boundary sets ``A`` (z side) and ``B`` (w side) of the bidisc."""

    A: BoundarySet
    B: BoundarySet

    def validate(self) -> None:
        if self.A.measure() <= 0 or self.B.measure() <= 0:
            raise ValueError("both boundary sets need positive measure")

    def swap(self) -> "Cross":
        return Cross(self.B, self.A)


def _in_cross(A: BoundarySet, B: BoundarySet, z: complex, w: complex, interior: bool) -> bool:
    zin, win = abs(z) < 1.0, abs(w) < 1.0
    za, wb = bool(A.contains_point(z)), bool(B.contains_point(w))
    if interior:
        return (zin and wb) or (za and win)
    return ((zin or za) and wb) or (za and (wb or win))


def cross_contains(X: Cross, z: complex, w: complex) -> str:
    """Classify ``(z, w)`` as in the regular interior, the interior, the cross, or outside."""
    z, w = complex(z), complex(w)
    interior = _in_cross(X.A, X.B, z, w, True)
    if interior:
        star = _in_cross(regular_points(X.A), regular_points(X.B), z, w, False)
        return IN_W_STAR_INTERIOR if star else IN_W_INTERIOR
    if _in_cross(X.A, X.B, z, w, False):
        return IN_W
    return OUTSIDE


def envelope_slack(X: Cross, z, w):
    return 1.0 - np.asarray(harmonic_measure(z, X.A)) - np.asarray(harmonic_measure(w, X.B))


def envelope_contains(X: Cross, z, w):
    """``(member, slack)`` for ``omega(z,A) + omega(w,B) < 1``; ties count as outside."""
    slack = envelope_slack(X, z, w)
    member = slack > TIE_TOL
    if np.ndim(slack) == 0:
        return bool(member), float(slack)
    return member, slack


def envelope_tilde_contains(X: Cross, delta: float, z, w):
    """Membership in the mixed envelope ``omega(z,A)/(1-delta) + omega(w,B) < 1``."""
    wz = angular_harmonic_measure(z, X.A, delta, closure_tol=0.0)
    s = 1.0 - np.asarray(wz) - np.asarray(harmonic_measure(w, X.B))
    out = s > TIE_TOL
    return bool(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class LevelSetRegion:
    """``{z : omega(z, A, domain) < delta}`` with domain E or the lens ``E cap Delta_a(r)``."""

    A: BoundarySet
    delta: float
    center: float | None = None
    radius: float | None = None

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if (self.center is None) != (self.radius is None):
            raise ValueError("localization needs both center and radius")

    @property
    def localized(self) -> bool:
        return self.center is not None

    def in_domain(self, z):
        z = np.asarray(z, dtype=complex)
        ok = np.abs(z) < 1.0
        if self.localized:
            ok &= np.abs(z - np.exp(1j * self.center)) < self.radius
        return ok

    def measure_at(self, z):
        z = np.asarray(z, dtype=complex)
        if self.localized:
            return local_harmonic_measure(z, self.A, self.center, self.radius)
        return harmonic_measure(z, self.A)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        ok = self.in_domain(z)
        out = np.zeros(z.shape, dtype=bool)
        if np.any(ok):
            out[ok] = np.asarray(self.measure_at(z[ok])) < self.delta - TIE_TOL
        return out if out.ndim else bool(out)

    __call__ = contains


@dataclass(frozen=True)
class Annulus:
    center: complex
    inner: float
    outer: float

    def __post_init__(self):
        if not 0.0 < self.inner < self.outer:
            raise ValueError("need 0 < inner < outer")

    def contains(self, w):
        d = np.abs(np.asarray(w, dtype=complex) - self.center)
        return (d > self.inner) & (d < self.outer)

    def inside_disc(self) -> bool:
        """True when the closed annulus lies in the open unit disc."""
        return abs(self.center) + self.outer < 1.0


# --- grids ----------------------------------------------------------------

@dataclass(frozen=True)
class SliceSpec:
    """Complex slice of the bidisc: one coordinate fixed, the other on a grid of cell centers."""

    fixed: str
    value: complex
    bounds: tuple = (-1.0, 1.0, -1.0, 1.0)

    def __post_init__(self):
        if self.fixed not in ("z", "w"):
            raise ValueError("fixed coordinate must be 'z' or 'w'")
        if not abs(complex(self.value)) < 1.0:
            raise ValueError(f"slice value {self.value} lies outside the unit disc")
        x0, x1, y0, y1 = self.bounds
        if not (x1 > x0 and y1 > y0):
            raise ValueError("empty slice bounds")

    def points(self, nx: int, ny: int) -> np.ndarray:
        if nx < 1 or ny < 1:
            raise ValueError("resolution must be positive")
        x0, x1, y0, y1 = self.bounds
        xs = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
        ys = y0 + (np.arange(ny) + 0.5) * (y1 - y0) / ny
        return xs[None, :] + 1j * ys[:, None]

    def pair(self, t):
        """Full ``(z, w)`` arrays for grid points ``t`` of the free coordinate."""
        v = np.full(np.shape(t), complex(self.value))
        return (v, t) if self.fixed == "z" else (t, v)


@dataclass
class GridField:
    """Complex values on a rectangular grid; ``mask`` is True at excluded points."""

    coords: np.ndarray
    values: np.ndarray
    mask: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.coords.shape

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("re_coord,im_coord,mask,re_val,im_val\n")
        c = self.coords.ravel()
        v = self.values.ravel()
        m = self.mask.ravel()
        for ci, vi, mi in zip(c, v, m):
            buf.write("%.17g,%.17g,%d,%.17g,%.17g\n" % (ci.real, ci.imag, int(mi), vi.real, vi.imag))
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def read_csv(cls, path, nx: int, ny: int) -> "GridField":
        data = np.genfromtxt(path, delimiter=",", skip_header=1)
        data = data.reshape(-1, 5)
        coords = (data[:, 0] + 1j * data[:, 1]).reshape(ny, nx)
        mask = data[:, 2].astype(bool).reshape(ny, nx)
        values = (data[:, 3] + 1j * data[:, 4]).reshape(ny, nx)
        return cls(coords, values, mask)


def rasterize(member: Callable, spec: SliceSpec, resolution, values: Callable | None = None) -> GridField:
    """Sample a membership predicate ``member(z, w)`` on a slice.

    Unmasked cells carry ``values(z, w)`` (default 1); masked cells carry nan.
    """
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    nx, ny = resolution
    t = spec.points(nx, ny)
    z, w = spec.pair(t)
    inside = np.asarray(member(z, w), dtype=bool)
    vals = np.full(t.shape, complex(np.nan, np.nan))
    if np.any(inside):
        vals[inside] = 1.0 if values is None else np.asarray(values(z[inside], w[inside]))
    return GridField(t, vals, ~inside, {"fixed": spec.fixed, "value": complex(spec.value)})


# --- strong end-points ------------------------------------------------------

@dataclass(frozen=True)
class EndPointWitness:
    r: float
    delta: float
    rho: float
    n_samples: int


def sample_lens_level_set(A: BoundarySet, center: float, radius: float, delta: float,
                          n: int, rng: np.random.Generator) -> np.ndarray:
    """Points of ``D_{a,r,delta}`` via the inverse lens chain.

    Requires the circle-arc side of the lens to lie in ``A``; then the level set
    is the preimage of the half-plane sector ``0 < arg h < pi*delta``.
    """
    chain = lens_domain_chain(center, radius)
    mod = np.exp(rng.uniform(-8.0, 8.0, n))
    ang = math.pi * delta * rng.uniform(0.0, 1.0, n)
    h = mod * np.exp(1j * ang)
    h = h[(ang > 0) & (ang < math.pi * delta)]
    z = chain.invert(h, check=False)
    region = LevelSetRegion(A, delta, center, radius)
    return z[np.asarray(region.contains(z), dtype=bool)]


def _sample_disc(b: complex, rho: float, n: int, rng: np.random.Generator) -> np.ndarray:
    r = rho * np.sqrt(rng.uniform(0.0, 1.0, n))
    return b + r * np.exp(2j * math.pi * rng.uniform(0.0, 1.0, n))


def strong_end_point_check(omega: Callable, a: float, b: complex, A: BoundarySet,
                           exponents=range(1, 11), n_samples: int = 10_000, seed: int = 0,
                           extra: Callable | None = None) -> EndPointWitness | None:
    """Search ``(r, delta, rho)`` with ``D_{a,r,delta} x Delta_b(rho)`` inside ``omega``.

    ``omega(z, w)`` is a vectorized membership predicate. Candidates are powers
    of 1/2, tried in order of increasing exponent sum; each is verified on a
    256-point pre-sample and then on ``n_samples`` points. ``extra(z, w, r,
    delta, rho)`` can add a geometric test that sampling alone would miss.
    Returns None when the schedule is exhausted.
    """
    b = complex(b)
    exps = list(exponents)
    cands = sorted(itertools.product(exps, exps, exps), key=lambda t: (sum(t), t))
    for i, j, k in cands:
        r, delta, rho = 2.0 ** -i, 2.0 ** -j, 2.0 ** -k
        if abs(b) + rho >= 1.0:
            continue
        if not BoundarySet((lens_arc(a, r),)).issubset(A, tol=1e-12):
            continue
        ok = True
        for n in (256, n_samples):
            rng = np.random.default_rng([seed, i, j, k, n])
            zs = sample_lens_level_set(A, a, r, delta, 2 * n, rng)[:n]
            ws = _sample_disc(b, rho, zs.size, rng)
            if zs.size == 0 or not np.all(omega(zs, ws)):
                ok = False
                break
            if extra is not None and not extra(zs, ws, r, delta, rho):
                ok = False
                break
        if ok:
            return EndPointWitness(r, delta, rho, int(zs.size))
    return None
