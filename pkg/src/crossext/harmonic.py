"""Harmonic measure of arc unions in the unit disc.

Convention: ``omega(z, A, E) = 1 - P[1_A](z)`` where ``P`` is the Poisson
integral, so the measure is small near ``A`` and level sets ``{omega < d}``
cluster around ``A``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import TWO_PI, Arc, BoundarySet
from .conformal import lens_arc, lens_domain_chain, view_angle
from .report import CheckReport

MIN_PANELS = 8
GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


def _check_inside(z: np.ndarray) -> None:
    if np.any(~np.isfinite(z)) or np.any(np.abs(z) >= 1.0):
        raise ValueError("harmonic measure needs points with |z| < 1")


def arc_poisson_mass(z, arc: Arc):
    """Poisson integral of the indicator of one arc, in closed form."""
    if arc.full:
        return np.ones(np.shape(z))
    return view_angle(z, arc) / math.pi - arc.length / TWO_PI


def harmonic_measure(z, A: BoundarySet, mode: str = "closed", panels: int = MIN_PANELS):
    """``omega(z, A, E)`` for an arc union ``A``; vectorized over ``z``."""
    z = np.asarray(z, dtype=complex)
    _check_inside(z)
    if mode == "closed":
        mass = np.zeros(z.shape)
        for arc in A.arcs:
            mass = mass + arc_poisson_mass(z, arc)
    elif mode == "quadrature":
        mass = poisson_quadrature(z, A, panels=panels)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    out = np.clip(1.0 - mass, 0.0, 1.0)
    return out if out.ndim else float(out)


def _breakpoints(z: complex, lo: float, hi: float) -> np.ndarray:
    # geometric grading towards the Poisson peak at arg z
    d = max(1.0 - abs(z), 1e-16)
    phi = math.atan2(z.imag, z.real) % TWO_PI
    jmax = int(math.ceil(math.log2(TWO_PI / d))) + 1
    offs = d * 2.0 ** np.arange(jmax + 1)
    pts = [lo, hi]
    for c in (phi - TWO_PI, phi, phi + TWO_PI):
        pts.append(c)
        pts.extend(c - offs)
        pts.extend(c + offs)
    pts = np.asarray(pts)
    pts = pts[(pts >= lo) & (pts <= hi)]
    return np.unique(pts)


def _gauss_sum(z: complex, edges: np.ndarray) -> float:
    a, b = edges[:-1, None], edges[1:, None]
    t = 0.5 * (b - a) * _GL_X[None, :] + 0.5 * (a + b)
    w = 0.5 * (b - a) * _GL_W[None, :]
    kern = (1.0 - abs(z) ** 2) / np.abs(np.exp(1j * t) - z) ** 2
    return float(np.sum(w * kern)) / TWO_PI


def _refine(edges: np.ndarray, m: int) -> np.ndarray:
    if m == 1:
        return edges
    frac = np.arange(m) / m
    inner = edges[:-1, None] + (edges[1:] - edges[:-1])[:, None] * frac[None, :]
    return np.append(inner.ravel(), edges[-1])


def poisson_quadrature(z, A: BoundarySet, panels: int = MIN_PANELS,
                       tol: float = 1e-14, max_panels: int = 2 ** 16):
    """Poisson integral of ``1_A`` by composite Gauss-Legendre with panel doubling.

    Each arc piece is split into ``panels`` equal panels, further split at a
    geometric grading around ``arg z``; panels double until successive sums
    differ by less than ``tol``.
    """
    if panels < MIN_PANELS:
        raise ValueError(f"need at least {MIN_PANELS} panels")
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape)
    flat = out.reshape(-1)
    for idx, zz in enumerate(z.reshape(-1)):
        total = 0.0
        for lo, hi in A.intervals():
            base = np.union1d(np.linspace(lo, hi, panels + 1), _breakpoints(complex(zz), lo, hi))
            m, prev = 1, _gauss_sum(zz, base)
            while True:
                m *= 2
                cur = _gauss_sum(zz, _refine(base, m))
                if abs(cur - prev) < tol or m * panels >= max_panels:
                    break
                prev = cur
            total += cur
        flat[idx] = total
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MeasureField:
    """``omega(., A, E)`` as a callable field."""

    A: BoundarySet
    mode: str = "closed"

    def __call__(self, z):
        return harmonic_measure(z, self.A, self.mode)


def local_harmonic_measure(z, A: BoundarySet, center: float, radius: float):
    """Harmonic measure of ``A cap Delta_a(r)`` relative to the lens ``E cap Delta_a(r)``.

    The lens is mapped onto the upper half-plane with its circle-arc side on the
    positive real axis; each marked interval ``[x1, x2]`` then carries Poisson
    mass ``(arg(h - x2) - arg(h - x1)) / pi``.
    """
    z = np.asarray(z, dtype=complex)
    a = np.exp(1j * center)
    if np.any(np.abs(z) >= 1.0) or np.any(np.abs(z - a) >= radius):
        raise ValueError("point outside the lens E cap Delta_a(r)")
    chain = lens_domain_chain(center, radius)
    marked = A.intersection(BoundarySet((lens_arc(center, radius),)))
    h = chain.apply(z, check=False)
    mass = np.zeros(z.shape)
    for arc in marked.arcs:
        p, q = arc.endpoints()
        xs = []
        for t in (p, q):
            x = chain.extended(t)
            xs.append(math.inf if not math.isfinite(abs(x)) else max(x.real, 0.0))
        x1, x2 = min(xs), max(xs)
        hi = math.pi if math.isinf(x2) else np.angle(h - x2)
        lo = np.angle(h - x1)
        mass = mass + (hi - lo) / math.pi
    out = np.clip(1.0 - mass, 0.0, 1.0)
    return out if out.ndim else float(out)


def angular_harmonic_measure(z, A: BoundarySet, delta: float, closure_tol: float = 1e-12):
    """``omega(z, A, E) / (1 - delta)`` on ``{omega < 1 - delta}``.

    Points on the level curve itself are accepted within ``closure_tol`` so the
    boundary calibration (value 1 there) can be checked.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")
    w = np.asarray(harmonic_measure(z, A))
    if np.any(w >= 1.0 - delta + closure_tol):
        raise ValueError("point outside the level set {omega < 1 - delta}")
    out = w / (1.0 - delta)
    return out if out.ndim else float(out)


def check_monotone_convergence(seq, A: BoundarySet, probes, tol: float = 1e-6,
                               mono_tol: float = 1e-14) -> CheckReport:
    """Check that ``omega(., A_k, E)`` decreases to ``omega(., A, E)`` at the probes."""
    seq = list(seq)
    if not seq:
        raise ValueError("empty sequence")
    for k, Ak in enumerate(seq):
        if not Ak.issubset(A):
            raise ValueError(f"A_{k} is not contained in A")
        if k and not seq[k - 1].issubset(Ak):
            raise ValueError(f"sequence not nested at index {k}")
    probes = np.asarray(probes, dtype=complex).ravel()
    vals = np.array([harmonic_measure(probes, Ak) for Ak in seq]).reshape(len(seq), -1)
    limit = np.asarray(harmonic_measure(probes, A)).reshape(-1)
    rise = float(np.max(np.diff(vals, axis=0), initial=0.0))
    gap = float(np.max(np.abs(vals[-1] - limit)))
    rep = CheckReport(meta={"n_sets": len(seq), "n_probes": int(probes.size)})
    rep.add("monotone", rise <= mono_tol, rise, mono_tol)
    rep.add("terminal_gap", gap <= tol, gap, tol)
    return rep


def laplacian_residual(field, h: float, radius: float, center: complex = 0j) -> float:
    """Max five-point discrete Laplacian of ``field`` on grid nodes in a disc.

    The disc ``|z - center| <= radius`` must keep a margin of two grid steps
    from the unit circle.
    """
    if h <= 0 or radius <= 0:
        raise ValueError("grid step and radius must be positive")
    if abs(center) + radius + 2 * h > 1.0:
        raise ValueError("grid touches the unit circle (need a 2h margin)")
    n = int(math.floor(radius / h))
    x = np.arange(-n - 1, n + 2) * h
    Z = center + x[None, :] + 1j * x[:, None]
    inside = np.abs(Z - center) <= radius + 1e-15
    U = np.zeros(Z.shape)
    inside_ext = np.abs(Z - center) <= radius + h * 1.5
    U[inside_ext] = field(Z[inside_ext])
    lap = (U[1:-1, :-2] + U[1:-1, 2:] + U[:-2, 1:-1] + U[2:, 1:-1] - 4 * U[1:-1, 1:-1]) / h ** 2
    core = inside[1:-1, 1:-1]
    return float(np.max(np.abs(lap[core]), initial=0.0))
