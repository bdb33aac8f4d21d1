"""Exact conformal chains: Mobius maps, sector power maps, lens domains.

A lens here is a domain bounded by two circular arcs meeting at two corners.
Sending one corner to 0 and the other to infinity turns it into a sector, a
power map opens the sector to a half-plane, and a final Mobius map lands in
the target (upper half-plane or unit disc).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .boundary import Arc, BoundarySet, approach_path, aitken_limit

CUT_TOL = 1e-9
INF = complex(math.inf, 0.0)


def _is_inf(t: complex) -> bool:
    return cmath.isinf(t)


@dataclass(frozen=True)
class MobiusMap:
    """``t -> (a t + b) / (c t + d)``."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        if abs(self.a * self.d - self.b * self.c) < 1e-300:
            raise ValueError("singular Mobius map (ad - bc = 0)")

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_points(cls, p: Sequence[complex], q: Sequence[complex]) -> "MobiusMap":
        """The unique map sending ``p[k]`` to ``q[k]`` for three distinct points each."""
        return _to_standard(*q).inverse() @ _to_standard(*p)

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.a * t + self.b) / (self.c * t + self.d)

    def extended(self, t: complex) -> complex:
        """Evaluate on the Riemann sphere; infinity is ``complex(inf, 0)``."""
        if _is_inf(t):
            return INF if self.c == 0 else self.a / self.c
        den = self.c * t + self.d
        if den == 0:
            return INF
        return (self.a * t + self.b) / den

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        """Composition ``self o other``."""
        m = self.matrix() @ other.matrix()
        return MobiusMap(*m.ravel())

    # chain-link protocol
    def check_domain(self, t) -> None:
        return None

    def image_contains(self, s) -> bool:
        return True


def _to_standard(z1: complex, z2: complex, z3: complex) -> MobiusMap:
    # z1 -> 0, z2 -> 1, z3 -> inf
    return MobiusMap(z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))


def cross_ratio(z1, z2, z3, z4):
    return (z1 - z3) * (z2 - z4) / ((z1 - z4) * (z2 - z3))


@dataclass(frozen=True)
class PowerMap:
    """Principal power ``t -> t**gamma`` on the sector ``lo <= arg t <= hi``.

    The branch cut is the negative real axis, which must lie outside the sector.
    """

    gamma: float
    lo: float
    hi: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if not -math.pi < self.lo < self.hi < math.pi:
            raise ValueError("sector must avoid the negative real axis")

    def check_domain(self, t) -> None:
        t = np.asarray(t, dtype=complex)
        nz = t != 0
        near_cut = nz & (t.real < 0) & (np.abs(t.imag) < CUT_TOL)
        if np.any(near_cut):
            raise ValueError("point within 1e-9 of the power-map branch cut")
        ang = np.angle(t[nz])
        slack = 1e-7
        if np.any((ang < self.lo - slack) | (ang > self.hi + slack)):
            raise ValueError("point outside the declared sector of the power map")

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        self.check_domain(t)
        out = np.zeros_like(t)
        nz = t != 0
        out[nz] = np.exp(self.gamma * np.log(t[nz]))
        return out

    def extended(self, t: complex) -> complex:
        # corners land on 0 and infinity up to rounding of their angles
        if _is_inf(t) or abs(t) > 1e13:
            return INF
        if abs(t) < 1e-13:
            return 0j
        self.check_domain(t)
        return complex(cmath.exp(self.gamma * cmath.log(t)))

    def inverse(self) -> "PowerMap":
        return PowerMap(1.0 / self.gamma, self.lo * self.gamma, self.hi * self.gamma)


Link = MobiusMap | PowerMap


@dataclass(frozen=True)
class ConformalChain:
    """Composition of elementary maps applied left to right.

    ``domain`` and ``codomain`` are vectorized membership predicates; ``None``
    means no restriction.
    """

    links: tuple
    domain: Callable | None = None
    codomain: Callable | None = None

    def apply(self, t, check: bool = True):
        t = np.asarray(t, dtype=complex)
        if check and self.domain is not None and not np.all(self.domain(t)):
            raise ValueError("point outside the declared domain of the chain")
        for link in self.links:
            t = link(t)
        return t

    __call__ = apply

    def invert(self, s, check: bool = True):
        s = np.asarray(s, dtype=complex)
        if check and self.codomain is not None and not np.all(self.codomain(s)):
            raise ValueError("point outside the declared image of the chain")
        for link in reversed(self.links):
            s = link.inverse()(s)
        return s

    def extended(self, t: complex) -> complex:
        """Pointwise evaluation on the closed domain, corners included."""
        t = complex(t)
        for link in self.links:
            t = link.extended(t)
        return t

    def inverse(self) -> "ConformalChain":
        return ConformalChain(tuple(l.inverse() for l in reversed(self.links)), self.codomain, self.domain)

    def validate(self, samples) -> dict:
        """Push samples through every link and report link-domain and injectivity status."""
        t = np.asarray(samples, dtype=complex)
        for link in self.links:
            link.check_domain(t)
            t = link(t)
        finite = np.isfinite(t)
        uniq = np.unique(np.round(t[finite], 12)).size == np.unique(np.round(np.asarray(samples)[finite], 12)).size
        return {"finite": bool(finite.all()), "injective": bool(uniq)}


def compose(*links) -> ConformalChain:
    return ConformalChain(tuple(links))


def disc_to_half_plane() -> MobiusMap:
    """``t -> i (1 + t) / (1 - t)``: unit disc onto the upper half-plane."""
    return MobiusMap(1j, 1j, -1, 1)


def right_half_plane_to_disc() -> MobiusMap:
    """``h -> (h - 1) / (h + 1)``; sends 0 to -1 and infinity to 1."""
    return MobiusMap(1, -1, 1, 1)


def _lune_links(p1: complex, p2: complex, base: complex, interior: complex,
                opening: float | None = None, other: complex | None = None):
    """Links sending a lune with corners p1, p2 onto the right half-plane.

    ``base`` is a point of the marked boundary arc; it ends up on the negative
    imaginary axis. The corners go to 0 and infinity. Either ``opening`` (the
    interior corner angle) or a point ``other`` on the second arc is required.
    """
    for _ in range(2):
        m0 = MobiusMap(1, -p1, 1, -p2)
        phi_u = cmath.phase(m0.extended(base))
        if opening is None:
            theta = (cmath.phase(m0.extended(other)) - phi_u) % (2 * math.pi)
        else:
            theta = opening
        side = (cmath.phase(m0.extended(interior)) - phi_u) % (2 * math.pi)
        if 0 < side < theta:
            break
        p1, p2 = p2, p1
    else:
        raise ValueError("could not orient the lune")
    rot = cmath.exp(-1j * (phi_u + 0.5 * theta))
    m1 = MobiusMap(rot, -rot * p1, 1, -p2)
    power = PowerMap(math.pi / theta, -0.5 * theta, 0.5 * theta)
    return m1, power, theta, p1, p2


def lens_domain_chain(center_angle: float, radius: float, target: str = "half_plane") -> ConformalChain:
    """Chain for the lens ``E cap Delta_a(radius)``, ``a = exp(1j*center_angle)``.

    With ``target='half_plane'`` the circle-arc side of the lens goes onto the
    positive real axis of the upper half-plane, the corner at angle
    ``center_angle - phi`` to 0 and the one at ``center_angle + phi`` to infinity
    (``phi`` the half-width of the circle arc, see ``lens_arc``).
    """
    if not 0.0 < radius < 2.0:
        raise ValueError("radius must lie in (0, 2)")
    a = cmath.exp(1j * center_angle)
    phi = 2.0 * math.asin(radius / 2.0)
    p1 = cmath.exp(1j * (center_angle - phi))
    p2 = cmath.exp(1j * (center_angle + phi))
    m1, power, theta, q1, q2 = _lune_links(p1, p2, a, a * (1 - radius / 2), other=a * (1 - radius))

    def domain(t):
        t = np.asarray(t, dtype=complex)
        return (np.abs(t) < 1.0) & (np.abs(t - a) < radius)

    if target == "half_plane":
        last = MobiusMap(1j, 0, 0, 1)

        def codomain(s):
            return np.asarray(s).imag > 0
    elif target == "disc":
        last = right_half_plane_to_disc()

        def codomain(s):
            return np.abs(np.asarray(s)) < 1.0
    else:
        raise ValueError(f"unknown target {target!r}")
    return ConformalChain((m1, power, last), domain, codomain)


def lens_arc(center_angle: float, radius: float) -> Arc:
    """The arc of the unit circle lying inside ``Delta_a(radius)``."""
    phi = 2.0 * math.asin(min(radius, 2.0) / 2.0)
    return Arc(center_angle - phi, center_angle + phi)


def view_angle(z, arc: Arc):
    """Counterclockwise angle at ``z`` from the start point to the end point of ``arc``.

    Lies in (0, 2*pi) for ``z`` in the open disc; the level curves are circular
    arcs through the two endpoints.
    """
    z = np.asarray(z, dtype=complex)
    p1, p2 = arc.endpoints()
    ratio = (p2 - z) / (p1 - z)
    return math.pi + np.angle(-ratio)


def level_set_lens_contains(z, arc: Arc, delta: float):
    """Membership in ``{omega(., arc, E) < 1 - delta}`` for a single arc, via the view angle."""
    z = np.asarray(z, dtype=complex)
    out = np.abs(z) < 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        va = view_angle(z, arc)
    return out & (va > math.pi * delta + 0.5 * arc.length)


def lens_chain(A: BoundarySet, delta: float) -> ConformalChain:
    """Chain from the component of ``{omega(., A, E) < 1 - delta}`` adjacent to ``A`` onto E.

    Only a single proper arc ``A`` is supported. The arc endpoints go to -1
    and 1, and ``A`` itself onto the lower half of the circle.
    """
    if len(A.arcs) != 1 or A.is_full:
        raise ValueError("exact lens chains need a single proper arc")
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")
    arc = A.arcs[0]
    p_start, p_end = arc.endpoints()
    mid = cmath.exp(1j * arc.midpoint)
    eps = 1e-6 * min(1.0, arc.length)
    m1, power, theta, q1, q2 = _lune_links(p_end, p_start, mid, mid * (1 - eps),
                                           opening=math.pi * (1.0 - delta))

    def domain(t):
        return level_set_lens_contains(t, arc, delta)

    def codomain(s):
        return np.abs(np.asarray(s)) < 1.0

    return ConformalChain((m1, power, right_half_plane_to_disc()), domain, codomain)


def boundary_limit(chain: ConformalChain, vertex: float, opening: float = math.pi / 4,
                   n: int = 40, q: float = 0.8, start: float = 1e-3,
                   tol: float = 1e-8) -> complex:
    """Limit of ``chain`` along the radius ending at ``exp(1j*vertex)``."""
    path = approach_path(vertex, opening, n, q, start)
    pts = path.points
    if chain.domain is not None:
        keep = np.asarray(chain.domain(pts))
        pts = pts[keep]
    if pts.size < 3:
        raise ValueError("approach path does not enter the chain domain")
    vals = chain.apply(pts, check=False)
    value, _err, ok = aitken_limit(vals, tol=tol)
    if not ok:
        raise ValueError("chain has no boundary limit along the path")
    return complex(value)


def end_set_image(chain: ConformalChain, A: BoundarySet) -> BoundarySet:
    """Image on the unit circle of the end-points of the lens lying on ``A``."""
    arc = A.arcs[0]
    p_start, p_end = arc.endpoints()
    s0 = chain.extended(p_start)
    s1 = chain.extended(p_end)
    smid = boundary_limit(chain, arc.midpoint)
    a0, a1, am = cmath.phase(s0), cmath.phase(s1), cmath.phase(smid)
    cand = Arc(a0, a1)
    if not bool(cand.contains(am)):
        cand = Arc(a1, a0)
    return BoundarySet((cand,))


def verify_measure_transfer(A: BoundarySet, delta: float, probes=None, n: int = 100, seed: int = 0):
    """Compare both sides of the measure-transfer identity on probes in the lens.

    Left side: harmonic measure in E of the image of the end set at the image
    point. Right side: ``omega(z, A, E) / (1 - delta)``.
    """
    from .harmonic import harmonic_measure
    from .report import CheckReport

    chain = lens_chain(A, delta)
    if probes is None:
        rng = np.random.default_rng(seed)
        r = 0.999 * np.sqrt(rng.random(n))
        s = r * np.exp(2j * math.pi * rng.random(n))
        probes = chain.invert(s)
    probes = np.asarray(probes, dtype=complex)
    if not np.all(chain.domain(probes)):
        raise ValueError("probe outside the lens component")
    image_set = end_set_image(chain, A)
    lhs = harmonic_measure(chain.apply(probes), image_set)
    rhs = harmonic_measure(probes, A) / (1.0 - delta)
    err = float(np.max(np.abs(lhs - rhs)))
    rep = CheckReport(meta={"delta": delta, "arc": A.to_pairs(), "image": image_set.to_pairs()})
    rep.add("measure_transfer", err <= 1e-8, err, 1e-8, n_probes=int(probes.size))
    return rep
