"""Cauchy and Laurent machinery, graph singular sets, gluing and uniqueness probes."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .boundary import BoundarySet, ApproachPath, aitken_limit, approach_path
from .expression import Disc, EnclosureFailed, Expr, diff, enclose, evaluate_array
from .harmonic import harmonic_measure
from .report import CheckReport


class SplitRejected(ValueError):
    pass


class GlueRejected(ValueError):
    def __init__(self, message: str, report: CheckReport):
        super().__init__(message)
        self.report = report


class HypothesisError(ValueError):
    pass


# --- Cauchy integrals on circles ---------------------------------------------

def circle_nodes(center: complex, radius: float, n: int) -> np.ndarray:
    return center + radius * np.exp(2j * np.pi * np.arange(n) / n)


def cauchy_circle(samples, center: complex, radius: float, w):
    """``(1/2 pi i) * integral f(eta)/(eta - w) d eta`` over the positively oriented circle.

    ``samples`` holds f at ``circle_nodes(center, radius, N)``; a 2-D array is
    read as one function per row. Inside the circle this is the Cauchy value;
    outside it is the exterior contribution (e.g. ``-1/w`` for ``f = 1/eta``).
    """
    f = np.asarray(samples, dtype=complex)
    n = f.shape[-1]
    w = np.asarray(w, dtype=complex)
    d = np.abs(w - center)
    if np.any(np.abs(d - radius) <= 1e-6 * radius):
        raise ValueError("target within 1e-6*s of the integration circle")
    eta = circle_nodes(center, radius, n)
    kern = (eta - center)[None, :] / (eta[None, :] - w.reshape(-1, 1)) / n
    out = f @ kern.T if f.ndim > 1 else kern @ f
    return out.reshape(f.shape[:-1] + w.shape) if f.ndim > 1 else out.reshape(w.shape)


@dataclass(frozen=True)
class LaurentSplit:
    """``f = f_plus + f_minus`` on an annulus around ``center``.

    ``plus[k]`` multiplies ``(w - c)**k`` (k >= 0), ``minus[k-1]`` multiplies
    ``(w - c)**(-k)`` (k >= 1).
    """

    center: complex
    inner: float
    outer: float
    plus: np.ndarray
    minus: np.ndarray
    order: int
    nodes: int
    residual: float

    def f_plus(self, w):
        t = np.asarray(w, dtype=complex) - self.center
        return np.polynomial.polynomial.polyval(t, self.plus)

    def f_minus(self, w):
        t = np.asarray(w, dtype=complex) - self.center
        with np.errstate(divide="ignore", invalid="ignore"):
            u = 1.0 / t
        return u * np.polynomial.polynomial.polyval(u, self.minus)

    def __call__(self, w):
        return self.f_plus(w) + self.f_minus(w)

    def in_annulus(self, w):
        d = np.abs(np.asarray(w, dtype=complex) - self.center)
        return (d > self.inner) & (d < self.outer)


def laurent_split(f: Callable, center: complex, inner: float, outer: float,
                  order: int = 64, nodes: int | None = None, tol: float = 1e-9) -> LaurentSplit:
    """Split ``f`` (vectorized callable) into parts holomorphic inside ``outer`` and outside ``inner``.

    Coefficients come from trapezoid sums on the two circles; the residual is
    measured on the mid-circle at points between the quadrature nodes.
    """
    if not 0.0 < inner < outer:
        raise ValueError("need 0 < inner < outer")
    if order < 1:
        raise ValueError("order must be positive")
    nodes = 4 * order if nodes is None else nodes
    if nodes <= 2 * order:
        raise ValueError("need more quadrature nodes than twice the order")
    u = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    fo = np.asarray(f(center + outer * u), dtype=complex)
    fi = np.asarray(f(center + inner * u), dtype=complex)
    if not (np.all(np.isfinite(fo)) and np.all(np.isfinite(fi))):
        raise SplitRejected("non-finite samples on the splitting circles")
    plus, minus = laurent_coefficients(fo[None, :], fi[None, :], inner, outer, order)
    plus, minus = plus[0], minus[0]
    mid = 0.5 * (inner + outer)
    probe = center + mid * np.exp(2j * np.pi * (np.arange(2 * nodes) + 0.5) / (2 * nodes))
    split = LaurentSplit(center, inner, outer, plus, minus, order, nodes, math.nan)
    exact = np.asarray(f(probe), dtype=complex)
    res = float(np.max(np.abs(split(probe) - exact) / np.maximum(1.0, np.abs(exact))))
    split = LaurentSplit(center, inner, outer, plus, minus, order, nodes, res)
    if not res <= tol:
        raise SplitRejected(f"Laurent residual {res:.3g} above tolerance {tol:.3g}")
    return split


def laurent_coefficients(f_outer, f_inner, inner: float, outer: float, order: int):
    """Row-wise Laurent coefficients from samples on the outer and inner circles.

    ``c_k = mean(f * (s u)**-k)`` on the outer circle gives the non-negative
    powers, ``c_{-k} = mean(f * (s u)**k)`` on the inner one the negative powers.
    """
    n = f_outer.shape[-1]
    u = np.exp(2j * np.pi * np.arange(n) / n)
    k = np.arange(order + 1)
    km = np.arange(1, order + 1)
    plus = f_outer @ (np.conj(u)[:, None] ** k[None, :]) / n / outer ** k
    minus = f_inner @ (u[:, None] ** km[None, :]) / n * inner ** km
    return plus, minus


def laurent_eval_rows(plus, minus, center: complex, w):
    """Evaluate row ``k`` of the coefficient arrays at ``w[k]``."""
    t = np.asarray(w, dtype=complex) - center
    with np.errstate(divide="ignore", invalid="ignore"):
        u = 1.0 / t
    return _horner_rows(plus, t) + u * _horner_rows(minus, u)


def poisson_reconstruct(samples, z):
    """Harmonic extension into the disc of equispaced boundary samples.

    Samples are at angles ``2*pi*j/N``. For boundary values of a function
    holomorphic on the closed disc this reproduces the function itself.
    """
    z = np.asarray(z, dtype=complex)
    f = np.asarray(samples, dtype=complex)
    flat = z.reshape(-1)
    out = poisson_reconstruct_rows(f.reshape(1, -1), flat)
    return out.reshape(z.shape)


def poisson_reconstruct_rows(samples, z):
    """Row-wise version of ``poisson_reconstruct``: row ``k`` of samples is evaluated at ``z[k]``.

    A single row is broadcast against all of ``z``.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("reconstruction needs |z| < 1")
    f = np.asarray(samples, dtype=complex)
    n = f.shape[-1]
    c = np.fft.fft(f, axis=-1) / n
    half = n // 2
    pos = c[:, : half + 1].copy()
    neg = np.zeros_like(pos)
    neg[:, 1:] = c[:, ::-1][:, :half]  # neg[:, k] = c_{-k}
    if n % 2 == 0:
        pos[:, half] *= 0.5
        neg[:, half] = pos[:, half]
    return _horner_rows(pos, z) + _horner_rows(neg, np.conj(z))


def _horner_rows(coef, x):
    out = np.zeros(x.shape, dtype=complex)
    for j in range(coef.shape[1] - 1, -1, -1):
        out = out * x + coef[:, j]
    return out


def negative_frequency_norm(samples) -> float:
    """l2 norm of the negative Fourier modes; zero for boundary values of holomorphic functions."""
    f = np.asarray(samples, dtype=complex)
    n = f.size
    c = np.fft.fft(f) / n
    return float(np.sqrt(np.sum(np.abs(c[n // 2 + 1:]) ** 2)))


# --- graph singular sets ------------------------------------------------------

@dataclass(frozen=True)
class GraphFiber:
    """``w = map(z)`` (over 'z') or ``z = map(w)`` (over 'w'); ``map`` uses variable z."""

    orientation: str
    map: Expr

    def __post_init__(self):
        if self.orientation not in ("z", "w"):
            raise ValueError("orientation must be 'z' or 'w'")
        if "w" in self.map.variables:
            raise ValueError("graph maps are written in the single variable z")

    @property
    def dmap(self) -> Expr:
        return diff(self.map, "z")

    def image(self, t):
        return evaluate_array(self.map, t)

    def preimages(self, targets) -> list[np.ndarray]:
        """All solutions ``t`` in the open unit disc of ``map(t) = target``."""
        return newton_roots(self.map, self.dmap, targets)


_START_R = np.array([0.0, 0.25, 0.5, 0.75, 0.95, 1.2, 1.5])
_START_A = np.exp(2j * np.pi * (np.arange(12) + 0.25) / 12)
NEWTON_STARTS = np.unique(np.round((_START_R[:, None] * _START_A[None, :]).ravel(), 15))


def _newton(g: Expr, dg: Expr, targets, iters: int, tol: float, radius: float):
    targets = np.atleast_1d(np.asarray(targets, dtype=complex))
    t = np.broadcast_to(NEWTON_STARTS, (targets.size, NEWTON_STARTS.size)).copy()
    tgt = np.broadcast_to(targets[:, None], t.shape)
    active = np.ones(t.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(iters):
            ta, ga = t[active], tgt[active]
            step = (evaluate_array(g, ta) - ga) / evaluate_array(dg, ta)
            step = np.where(np.isfinite(step), step, 0.0)
            ta = ta - step
            t[active] = ta
            # converged or escaped iterates leave the active set
            still = (np.abs(step) > 1e-15 * (1.0 + np.abs(ta))) & (np.abs(ta) < 1e3)
            active[active] = still
            if not active.any():
                break
        resid = np.abs(evaluate_array(g, t) - tgt)
    good = np.isfinite(resid) & (resid <= tol * (1.0 + np.abs(tgt))) & (np.abs(t) < radius)
    return t, good


def newton_roots(g: Expr, dg: Expr, targets, iters: int = 60, tol: float = 1e-12,
                 radius: float = 1.0) -> list[np.ndarray]:
    """Roots of ``g(t) = target`` with ``|t| < radius``, from a fixed polar grid of starts."""
    t, good = _newton(g, dg, targets, iters, tol, radius)
    out = []
    for row, ok in zip(t, good):
        roots = np.sort_complex(row[ok])
        keep: list[complex] = []
        for r in roots:
            if all(abs(r - q) > 1e-8 for q in keep):
                keep.append(complex(r))
        out.append(np.array(sorted(keep, key=lambda c: (round(c.real, 10), round(c.imag, 10))),
                            dtype=complex))
    return out


@dataclass(frozen=True)
class SingularSet:
    graphs: tuple = ()

    @property
    def is_empty(self) -> bool:
        return not self.graphs

    def points_over_z(self, z: complex, radius: float = 1.0) -> np.ndarray:
        """``{w : |w| < radius, (z, w) on some graph}`` for one ``z``."""
        return self._points(complex(z), "z", radius)

    def points_over_w(self, w: complex, radius: float = 1.0) -> np.ndarray:
        """``{z : |z| < radius, (z, w) on some graph}`` for one ``w``."""
        return self._points(complex(w), "w", radius)

    def _points(self, x: complex, side: str, radius: float) -> np.ndarray:
        pts = []
        for g in self.graphs:
            if g.orientation == side:
                v = complex(g.image(np.asarray(x)))
                if np.isfinite(v) and abs(v) < radius:
                    pts.append(v)
            else:
                pts.extend(newton_roots(g.map, g.dmap, [x], radius=radius)[0])
        return _sorted_points(pts)

    def near_over(self, side: str, xs, center: complex, lo: float, hi: float) -> np.ndarray:
        """Per ``x``: does the slice over ``x`` (fixed coordinate ``side``) meet
        ``lo <= |t - center| <= hi``? Use ``lo = 0`` for a disc test."""
        xs = np.atleast_1d(np.asarray(xs, dtype=complex))
        hit = np.zeros(xs.shape, dtype=bool)
        reach = abs(center) + hi
        for g in self.graphs:
            if g.orientation == side:
                d = np.abs(g.image(xs) - center)
                hit |= np.isfinite(d) & (d >= lo) & (d <= hi)
            else:
                t, good = _newton(g.map, g.dmap, xs, 60, 1e-12, reach + 1e-9)
                d = np.abs(t - center)
                hit |= (good & (d >= lo) & (d <= hi)).any(axis=1)
        return hit


def _sorted_points(pts) -> np.ndarray:
    keep: list[complex] = []
    for p in pts:
        if all(abs(p - q) > 1e-8 for q in keep):
            keep.append(complex(p))
    return np.array(sorted(keep, key=lambda c: (c.real, c.imag)), dtype=complex)


def fibers(M: SingularSet, a: float) -> np.ndarray:
    """``M_a``: points ``w`` in E with ``(exp(1j*a), w)`` in M."""
    return M.points_over_z(complex(np.exp(1j * a)))


def cofibers(M: SingularSet, b: float) -> np.ndarray:
    """``M^b``: points ``z`` in E with ``(z, exp(1j*b))`` in M."""
    return M.points_over_w(complex(np.exp(1j * b)))


# --- collars -----------------------------------------------------------------

@dataclass(frozen=True)
class Collar:
    r: tuple
    s: tuple
    n_cells: int = 0


def _arc_distance(c: complex, B: BoundarySet) -> float:
    """Distance from ``c`` to the closed arc union ``B``."""
    best = math.inf
    for arc in B.arcs:
        if bool(arc.contains(math.atan2(c.imag, c.real))) and c != 0:
            best = min(best, abs(abs(c) - 1.0))
        for p in arc.endpoints():
            best = min(best, abs(c - p))
        if arc.full:
            best = min(best, abs(abs(c) - 1.0))
    return best


def _collar_cells(arc, r: float, max_cell: float = 0.05):
    """Enclosing discs for polar cells covering ``{|z| <= 1, dist(z, arc) < r}``."""
    if arc.full:
        lo, span = 0.0, 2 * math.pi
    else:
        margin = math.asin(min(1.0, r / (1.0 - r))) if r < 0.5 else math.pi / 2
        margin = min(margin, 0.5 * (2 * math.pi - arc.length))
        lo, span = arc.start - margin, arc.length + 2 * margin
    h = min(r / 8, max_cell)
    nr = max(1, int(math.ceil(r / h)))
    nt = max(1, int(math.ceil(span / h)))
    rho = 1.0 - r + (np.arange(nr) + 0.5) * r / nr
    th = lo + (np.arange(nt) + 0.5) * span / nt
    rad = 0.5 * r / nr + 0.5 * span / nt + 1e-15
    for p in rho:
        for t in th:
            yield Disc(complex(p * np.exp(1j * t)), rad)


def _graph_clear(expr: Expr, src_arcs, r: float, dst: BoundarySet, s: float) -> bool:
    for arc in src_arcs:
        for cell in _collar_cells(arc, r):
            try:
                img = enclose(expr, cell)
            except EnclosureFailed:
                return False
            lo_abs = abs(img.center) - img.radius
            if lo_abs > 1.0:
                continue
            if _arc_distance(img.center, dst) - img.radius < s:
                return False
    return True


def singular_free_collar(M: SingularSet, A: BoundarySet, B: BoundarySet,
                         exponents=range(1, 11), n_check: int = 2000, seed: int = 0) -> Collar:
    """Collar radii ``r`` (around A) and ``s`` (around B) whose product misses every graph.

    Uses disc-arithmetic enclosures of each graph over a polar cell cover of the
    collar, followed by a dense sampling check. Raises ``HypothesisError`` when
    no radii in the schedule work, which in particular happens when a graph
    meets ``A x B``.
    """
    if M.is_empty:
        return Collar(tuple(0.5 for _ in A.arcs), tuple(0.5 for _ in B.arcs))
    exps = list(exponents)
    for i, j in sorted(itertools.product(exps, exps), key=lambda t: (max(t), sum(t), t)):
        r, s = 2.0 ** -i, 2.0 ** -j
        ok = True
        for g in M.graphs:
            src, dst, rr, ss = (A, B, r, s) if g.orientation == "z" else (B, A, s, r)
            if not _graph_clear(g.map, src.arcs, rr, dst, ss):
                ok = False
                break
        if ok and _sampled_clear(M, A, B, r, s, n_check, seed):
            return Collar(tuple(r for _ in A.arcs), tuple(s for _ in B.arcs))
    raise HypothesisError("no singular-free collar found: M may meet A x B")


def _sampled_clear(M, A, B, r, s, n, seed) -> bool:
    rng = np.random.default_rng(seed)
    for g in M.graphs:
        src, dst, rr, ss = (A, B, r, s) if g.orientation == "z" else (B, A, s, r)
        for arc in src.arcs:
            th = arc.start + arc.length * rng.uniform(0, 1, n)
            pts = np.exp(1j * th) * (1.0 - rr * rng.uniform(0, 1, n))
            img = g.image(pts)
            img = img[np.isfinite(img) & (np.abs(img) <= 1.0)]
            if any(_arc_distance(complex(c), dst) < ss for c in img):
                return False
    return True


# --- hull ----------------------------------------------------------------------

@dataclass(frozen=True)
class SingularHull:
    """Candidate ``M-hat``: the full graphs of M restricted to a membership region."""

    M: SingularSet
    region: Callable | None = None

    @property
    def is_empty(self) -> bool:
        return self.M.is_empty

    def slice_at_z(self, z: complex) -> np.ndarray:
        pts = self.M.points_over_z(z)
        if self.region is not None and pts.size:
            pts = pts[np.asarray(self.region(np.full(pts.shape, z), pts), dtype=bool)]
        return pts

    def slice_at_w(self, w: complex) -> np.ndarray:
        pts = self.M.points_over_w(w)
        if self.region is not None and pts.size:
            pts = pts[np.asarray(self.region(pts, np.full(pts.shape, w)), dtype=bool)]
        return pts

    def distance(self, z, w):
        """Coordinate distance from ``(z, w)`` to the graphs (inf when M is empty)."""
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        d = np.full(np.broadcast_shapes(z.shape, w.shape), np.inf)
        for g in self.M.graphs:
            if g.orientation == "z":
                gap = np.abs(w - g.image(z))
            else:
                gap = np.abs(z - g.image(w))
            d = np.fmin(d, np.where(np.isfinite(gap), gap, np.inf))
        return d

    def contains(self, z, w, tol: float = 1e-10):
        on = self.distance(z, w) <= tol
        if self.region is not None:
            on &= np.asarray(self.region(z, w), dtype=bool)
        return on


def candidate_singular_hull(M: SingularSet, region: Callable | None = None) -> SingularHull:
    """Union of the full graphs of ``M`` inside ``region`` (empty when M is empty)."""
    return SingularHull(M, region)


# --- patches and gluing ----------------------------------------------------------

@dataclass(frozen=True)
class LocalPatch:
    name: str
    region: Callable
    evaluate: Callable
    provenance: str = ""


@dataclass
class GluedEvaluator:
    patches: list

    def __call__(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        z, w = np.broadcast_arrays(z, w)
        out = np.full(z.shape, np.nan + 0j)
        todo = np.ones(z.shape, dtype=bool)
        for p in self.patches:
            if not np.any(todo):
                break
            hit = np.zeros(z.shape, dtype=bool)
            hit[todo] = np.asarray(p.region(z[todo], w[todo]), dtype=bool)
            if np.any(hit):
                out[hit] = p.evaluate(z[hit], w[hit])
            todo &= ~hit
        return out

    def source(self, z, w) -> np.ndarray:
        """Index of the answering patch (-1 where none accepts)."""
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        out = np.full(z.shape, -1)
        for k, p in enumerate(self.patches):
            free = out < 0
            if np.any(free):
                hit = np.zeros(z.shape, dtype=bool)
                hit[free] = np.asarray(p.region(z[free], w[free]), dtype=bool)
                out[hit] = k
        return out


def glue(patches: Sequence[LocalPatch], z, w, tol: float = 1e-8, scaled: bool = True):
    """Check pairwise agreement of patches on overlap samples and combine them.

    Returns ``(evaluator, report)``; raises ``GlueRejected`` when some overlap
    discrepancy exceeds ``tol``. With ``scaled`` the discrepancy is divided by
    ``max(1, |value|)`` over both patches.
    """
    patches = list(patches)
    if not patches:
        raise ValueError("need at least one patch")
    z = np.asarray(z, dtype=complex).ravel()
    w = np.asarray(w, dtype=complex).ravel()
    inside = [np.asarray(p.region(z, w), dtype=bool) for p in patches]
    vals = []
    for p, m in zip(patches, inside):
        v = np.full(z.shape, np.nan + 0j)
        if np.any(m):
            v[m] = p.evaluate(z[m], w[m])
        vals.append(v)
    rep = CheckReport(meta={"patches": [p.name for p in patches], "n_samples": int(z.size)})
    for i, j in itertools.combinations(range(len(patches)), 2):
        both = inside[i] & inside[j]
        if np.any(both):
            d = np.abs(vals[i][both] - vals[j][both])
            if scaled:
                d = d / np.maximum(1.0, np.maximum(np.abs(vals[i][both]), np.abs(vals[j][both])))
            disc = float(np.max(d)) if np.all(np.isfinite(d)) else math.inf
        else:
            disc = 0.0
        names = sorted((patches[i].name, patches[j].name))
        rep.add(f"overlap:{names[0]}|{names[1]}", disc <= tol, disc, tol, n_overlap=int(both.sum()))
    if not rep.passed:
        raise GlueRejected("patch disagreement on overlaps: " + ", ".join(rep.failed()), rep)
    return GluedEvaluator(patches), rep


# --- angular limits and uniqueness -------------------------------------------

@dataclass(frozen=True)
class AngularLimit:
    value: complex
    error: float
    exists: bool


def angular_limit(f: Callable, path: ApproachPath, w=None, tol: float = 1e-6) -> AngularLimit:
    """Extrapolated limit of ``f`` along ``path`` (``f(z, w)`` with ``w`` fixed when given)."""
    pts = path.points
    vals = f(pts) if w is None else f(pts, np.full(pts.shape, complex(w)))
    vals = np.asarray(vals, dtype=complex)
    if not np.all(np.isfinite(vals)):
        return AngularLimit(complex(math.nan), math.inf, False)
    value, err, ok = aitken_limit(vals, tol=tol)
    return AngularLimit(value, err, ok)


def two_constants_bound(eps: float, sup: float, t: float) -> float:
    """``eps**(1-t) * sup**t``, the harmonic-measure interpolation bound."""
    return eps ** (1.0 - t) * max(sup, eps) ** t


def uniqueness_probe(g: Callable, A: BoundarySet, delta: float = 0.5, vertices=None,
                     n_vertices: int = 8, tol: float = 1e-6, n_control: int = 400,
                     seed: int = 0) -> CheckReport:
    """Test whether ``g`` is consistent with vanishing identically near ``A``.

    Angular limits are estimated at ``vertices`` (default: equispaced points in
    the interior of the arcs of A). When they all vanish to ``tol``, ``|g|`` on
    the control set ``{omega(., A) <= delta/2}`` must stay below the bound
    ``eps**(1-t) * M**t`` with ``eps`` the largest limit, ``M`` the sampled sup
    of ``|g|`` on ``{omega < delta}`` and ``t`` the largest control value of
    ``omega/delta``.
    """
    if vertices is None:
        vertices = []
        for arc in A.arcs:
            frac = (np.arange(n_vertices) + 0.5) / n_vertices
            vertices.extend(arc.start + arc.length * frac)
    vertices = np.asarray(vertices, dtype=float)
    limits = [angular_limit(g, approach_path(v, n=40, q=0.8, start=0.5), tol=tol) for v in vertices]
    rep = CheckReport(meta={"vertices": vertices.tolist(), "delta": delta})
    n_missing = sum(not L.exists for L in limits)
    rep.add("angular_limits_exist", n_missing == 0, n_missing, 0)
    lam = np.array([abs(L.value) + L.error if L.exists else math.inf for L in limits])
    worst = float(np.max(lam)) if lam.size else 0.0
    rep.add("angular_limits_vanish", worst <= tol, worst, tol,
            nonzero=[float(v) for v, l in zip(vertices, lam) if not l <= tol])
    if not worst <= tol:
        return rep
    rng = np.random.default_rng(seed)
    pts = np.sqrt(rng.uniform(0, 1, 20 * n_control)) * np.exp(2j * np.pi * rng.uniform(0, 1, 20 * n_control))
    pts = pts[np.abs(pts) < 1 - 1e-9]
    om = np.asarray(harmonic_measure(pts, A))
    region = pts[om < delta]
    control = pts[om <= 0.5 * delta][:n_control]
    if control.size == 0:
        rep.add("interior_bound", False, math.inf, 0.0, reason="empty control set")
        return rep
    sup = float(np.max(np.abs(g(region)))) if region.size else 0.0
    t = float(np.max(np.asarray(harmonic_measure(control, A)) / delta))
    eps = max(worst, 1e-12)
    bound = two_constants_bound(eps, sup, t)
    interior = float(np.max(np.abs(g(control))))
    rep.add("interior_bound", interior <= bound, interior, bound, sup=sup, t=t, eps=eps)
    return rep
