"""End-to-end extension scenarios: load, verify, emit grids."""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .boundary import Arc, BoundarySet, approach_path, regular_points
from .expression import Expr, evaluate_array, load as load_expr, to_dict
from .extension import (GlueRejected, GraphFiber, HypothesisError, LocalPatch, SingularSet,
                        SplitRejected, candidate_singular_hull, cauchy_circle, circle_nodes, glue,
                        laurent_coefficients, laurent_eval_rows, laurent_split,
                        poisson_reconstruct_rows, singular_free_collar, uniqueness_probe,
                        angular_limit)
from .harmonic import check_monotone_convergence, harmonic_measure
from .regions import (Cross, GridField, LevelSetRegion, SliceSpec, envelope_contains, rasterize,
                      strong_end_point_check)
from .report import CheckReport

POISSON_CLEAR = 1.25      # Poisson patches need the singular slice outside this radius
LAURENT_BAND = 1.2        # evaluation band inside the splitting annulus
LAURENT_CLEAR = 1.25      # singular points must avoid the widened annulus
HULL_MARGIN = 1e-3        # samples closer than this to the singular hull are skipped
LIMIT_STEPS = 60          # points per approach path for the angular-limit check


class ScenarioError(ValueError):
    """Malformed scenario file or specification."""


@dataclass
class Scenario:
    name: str
    A: BoundarySet
    B: BoundarySet
    M: SingularSet
    F: Expr
    delta_count: int = 6
    exhaustion_steps: int = 20
    tol_quad: float = 1e-8
    tol_limit: float = 1e-6
    tol_negative: float = 1e-3
    quad_nodes: int = 256
    order: int = 64
    laurent_center: complex = 0j
    laurent_inner: float = 0.6
    laurent_outer: float = 0.95
    grid_n: int = 64
    slices: list = field(default_factory=lambda: [("w", 0j), ("z", 0.6 + 0j)])
    n_glue: int = 10_000
    n_limits: int = 200
    seed: int = 0

    @property
    def cross(self) -> Cross:
        return Cross(self.A, self.B)

    def validate(self) -> None:
        if self.A.measure() <= 0 or self.B.measure() <= 0:
            raise ScenarioError("A and B need positive measure")
        if self.F.variables - {"z", "w"}:
            raise ScenarioError("F may only use z and w")
        if self.delta_count < 1 or self.exhaustion_steps < 1:
            raise ScenarioError("schedules need at least one step")
        if self.quad_nodes <= 2 * self.order:
            raise ScenarioError("quad_nodes must exceed twice the Laurent order")
        if not 0 < self.laurent_inner < self.laurent_outer:
            raise ScenarioError("need 0 < laurent inner < outer")
        if abs(self.laurent_center) + self.laurent_outer >= 1.0:
            raise ScenarioError("splitting annulus must lie in the unit disc")
        for fixed, value in self.slices:
            SliceSpec(fixed, value)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "A": self.A.to_pairs(),
            "B": self.B.to_pairs(),
            "M": [{"orientation": g.orientation, "expression": to_dict(g.map)} for g in self.M.graphs],
            "F": to_dict(self.F),
            "schedules": {"delta_count": self.delta_count, "exhaustion_steps": self.exhaustion_steps},
            "tolerances": {"quad": self.tol_quad, "limit": self.tol_limit,
                           "negative_control": self.tol_negative},
            "quadrature": {"nodes": self.quad_nodes, "order": self.order},
            "laurent": {"center": [self.laurent_center.real, self.laurent_center.imag],
                        "inner": self.laurent_inner, "outer": self.laurent_outer},
            "grids": {"n": self.grid_n,
                      "slices": [{"fixed": f, "value": [v.real, v.imag]} for f, v in self.slices]},
            "samples": {"glue": self.n_glue, "limits": self.n_limits},
            "seed": self.seed,
        }


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ScenarioError(f"complex value needs [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return complex(v)


def scenario_from_dict(d: dict) -> Scenario:
    try:
        A = BoundarySet.from_pairs(d["A"])
        B = BoundarySet.from_pairs(d["B"])
        graphs = tuple(GraphFiber(g["orientation"], load_expr(g["expression"])) for g in d.get("M", []))
        F = load_expr(d["F"])
        sched = d.get("schedules", {})
        tols = d.get("tolerances", {})
        quad = d.get("quadrature", {})
        lau = d.get("laurent", {})
        grids = d.get("grids", {})
        samples = d.get("samples", {})
        kw = dict(
            name=str(d.get("name", "scenario")), A=A, B=B, M=SingularSet(graphs), F=F,
            delta_count=int(sched.get("delta_count", 6)),
            exhaustion_steps=int(sched.get("exhaustion_steps", 20)),
            tol_quad=float(tols.get("quad", 1e-8)), tol_limit=float(tols.get("limit", 1e-6)),
            tol_negative=float(tols.get("negative_control", 1e-3)),
            quad_nodes=int(quad.get("nodes", 256)), order=int(quad.get("order", 64)),
            laurent_center=_complex(lau.get("center", 0)),
            laurent_inner=float(lau.get("inner", 0.6)), laurent_outer=float(lau.get("outer", 0.95)),
            grid_n=int(grids.get("n", 64)),
            n_glue=int(samples.get("glue", 10_000)), n_limits=int(samples.get("limits", 200)),
            seed=int(d.get("seed", 0)),
        )
        if "slices" in grids:
            kw["slices"] = [(s["fixed"], _complex(s["value"])) for s in grids["slices"]]
        sc = Scenario(**kw)
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid scenario: {exc}") from None
    try:
        sc.validate()
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    return sc


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    return scenario_from_dict(data)


def bundled_dir() -> Path:
    return Path(__file__).parent / "scenarios"


# --- the extension model --------------------------------------------------------

class Model:
    """Regions, singular hull and local patches for one scenario."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        self.X = sc.cross
        self.hull = candidate_singular_hull(sc.M, self.envelope)
        self.theta = 2 * np.pi * np.arange(sc.quad_nodes) / sc.quad_nodes
        self.circle = np.exp(1j * self.theta)

    def F(self, z, w):
        return evaluate_array(self.sc.F, z, w)

    def envelope(self, z, w):
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        ok = (np.abs(z) < 1) & (np.abs(w) < 1)
        out = np.zeros(z.shape, dtype=bool)
        if np.any(ok):
            out[ok] = envelope_contains(self.X, z[ok], w[ok])[0]
        return out

    def domain(self, z, w):
        """``W-hat`` minus the singular hull."""
        inside = self.envelope(z, w)
        return inside & (self.hull.distance(z, w) > 1e-12)

    # Poisson patches: F(., w) from boundary samples when the slice over w stays outside 1.25
    def poisson_ok(self, side: str, z, w):
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        ok = self.domain(z, w)
        other = w if side == "z" else z
        if np.any(ok) and not self.sc.M.is_empty:
            ok[ok] = ~self.sc.M.near_over("w" if side == "z" else "z", other[ok], 0j, 0.0, POISSON_CLEAR)
        return ok

    def poisson_eval(self, side: str, z, w, data=None):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        if side == "z":
            S = self.F(self.circle[None, :], w[:, None]) if data is None else data
            return poisson_reconstruct_rows(S, z)
        S = self.F(z[:, None], self.circle[None, :]) if data is None else data
        return poisson_reconstruct_rows(S, w)

    # Laurent patch: F(z, .) split across the singular slice on an annulus around w0
    def laurent_ok(self, z, w):
        sc = self.sc
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        d = np.abs(w - sc.laurent_center)
        ok = self.domain(z, w) & (d > LAURENT_BAND * sc.laurent_inner) & (d < sc.laurent_outer / LAURENT_BAND)
        if np.any(ok) and not sc.M.is_empty:
            ok[ok] = ~sc.M.near_over("z", z[ok], sc.laurent_center, sc.laurent_inner / LAURENT_CLEAR,
                                     sc.laurent_outer * LAURENT_CLEAR)
        return ok

    def laurent_eval(self, z, w):
        sc = self.sc
        z = np.asarray(z, dtype=complex)
        c = sc.laurent_center
        fo = self.F(z[:, None], c + sc.laurent_outer * self.circle[None, :])
        fi = self.F(z[:, None], c + sc.laurent_inner * self.circle[None, :])
        plus, minus = laurent_coefficients(fo, fi, sc.laurent_inner, sc.laurent_outer, sc.order)
        return laurent_eval_rows(plus, minus, c, w)

    def patches(self) -> list[LocalPatch]:
        return [
            LocalPatch("poisson_z", lambda z, w: self.poisson_ok("z", z, w),
                       lambda z, w: self.poisson_eval("z", z, w), "boundary samples over z"),
            LocalPatch("poisson_w", lambda z, w: self.poisson_ok("w", z, w),
                       lambda z, w: self.poisson_eval("w", z, w), "boundary samples over w"),
            LocalPatch("laurent", self.laurent_ok, self.laurent_eval, "Laurent split in w"),
            LocalPatch("closed_form", self.domain, self.F, "closed-form ground truth"),
        ]

    def sample_domain(self, n: int, rng: np.random.Generator, margin: float = HULL_MARGIN):
        zs, ws = [], []
        have = 0
        while have < n:
            m = 4 * (n - have) + 64
            z = np.sqrt(rng.uniform(0, 1, m)) * np.exp(2j * np.pi * rng.uniform(0, 1, m))
            w = np.sqrt(rng.uniform(0, 1, m)) * np.exp(2j * np.pi * rng.uniform(0, 1, m))
            keep = self.envelope(z, w) & (self.hull.distance(z, w) > margin)
            zs.append(z[keep])
            ws.append(w[keep])
            have += int(keep.sum())
        return np.concatenate(zs)[:n], np.concatenate(ws)[:n]


def _interior_angles(A: BoundarySet, n: int, rng: np.random.Generator, trim: float = 0.02):
    lengths = np.array([a.length for a in A.arcs])
    idx = rng.choice(len(A.arcs), size=n, p=lengths / lengths.sum())
    u = rng.uniform(trim, 1 - trim, n)
    return np.array([A.arcs[i].start + A.arcs[i].length * t for i, t in zip(idx, u)])


def _shrunk(A: BoundarySet, eps_frac: float) -> BoundarySet:
    arcs = []
    for a in A.arcs:
        if a.full:
            arcs.append(Arc(0.0, 2 * math.pi * (1 - eps_frac)))
        else:
            e = a.length * eps_frac / 2
            arcs.append(Arc(a.start + e, a.start + a.length - e))
    return BoundarySet(tuple(arcs))


# --- checks -------------------------------------------------------------------

def _check_hull(model: Model, rng) -> tuple[float, dict]:
    """Hull consistency: boundary fibers lie on the hull, and graphs of both
    orientations describing the same set give the same fibers."""
    M = model.sc.M
    if M.is_empty:
        return 0.0, {"empty": True}
    worst = 0.0
    for a in _interior_angles(model.sc.A, 16, rng):
        z = complex(np.exp(1j * a))
        pts = M.points_over_z(z)
        if pts.size:
            worst = max(worst, float(np.max(model.hull.distance(np.full(pts.shape, z), pts))))
    for b in _interior_angles(model.sc.B, 16, rng):
        w = complex(np.exp(1j * b))
        pts = M.points_over_w(w)
        if pts.size:
            worst = max(worst, float(np.max(model.hull.distance(pts, np.full(pts.shape, w)))))
    sides = {g.orientation for g in M.graphs}
    sym = None
    if sides == {"z", "w"}:
        Mz = SingularSet(tuple(g for g in M.graphs if g.orientation == "z"))
        Mw = SingularSet(tuple(g for g in M.graphs if g.orientation == "w"))
        sym = 0.0
        for x in 0.9 * np.exp(2j * np.pi * (np.arange(12) + 0.5) / 12):
            p, q = Mz.points_over_z(x), Mw.points_over_z(x)
            if p.size != q.size:
                sym = math.inf
                break
            if p.size:
                sym = max(sym, float(np.max(np.abs(p - q))))
        worst = max(worst, sym)
    return worst, {"orientation_symmetry": sym}


def _separate_holomorphy(model: Model, rng) -> float:
    sc = model.sc
    worst = 0.0
    for side, S in (("z", sc.A), ("w", sc.B)):
        for t in _interior_angles(S, 8, rng):
            zeta = complex(np.exp(1j * t))
            sing = sc.M.points_over_z(zeta, 1.5) if side == "z" else sc.M.points_over_w(zeta, 1.5)
            for _ in range(4):
                c = 0.7 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
                gap = float(np.min(np.abs(sing - c))) if sing.size else math.inf
                rho = min(0.2, 0.5 * (1 - abs(c)), 0.5 * gap)
                eta = circle_nodes(c, rho, sc.quad_nodes)
                f = model.F(zeta, eta) if side == "z" else model.F(eta, zeta)
                target = c + 0.3 * rho
                val = cauchy_circle(f, c, rho, target)
                exact = model.F(zeta, target) if side == "z" else model.F(target, zeta)
                worst = max(worst, float(abs(val - exact) / max(1.0, abs(exact))))
    return worst


def _laurent_check(model: Model, rng) -> tuple[float, dict]:
    sc = model.sc
    zs = np.concatenate([np.exp(1j * _interior_angles(sc.A, 8, rng)),
                         0.9 * np.sqrt(rng.uniform(0, 1, 8)) * np.exp(2j * np.pi * rng.uniform(0, 1, 8))])
    worst, used, skipped = 0.0, 0, 0
    for z in zs:
        if not sc.M.is_empty and sc.M.near_over("z", [z], sc.laurent_center, sc.laurent_inner / LAURENT_CLEAR,
                                                sc.laurent_outer * LAURENT_CLEAR)[0]:
            skipped += 1
            continue
        try:
            split = laurent_split(lambda w: model.F(z, w), sc.laurent_center, sc.laurent_inner,
                                  sc.laurent_outer, order=sc.order, nodes=sc.quad_nodes, tol=sc.tol_quad)
        except SplitRejected:
            return math.inf, {"rejected_at": complex(z)}
        r = sc.laurent_inner + (sc.laurent_outer - sc.laurent_inner) * rng.uniform(0.15, 0.85, 200)
        w = sc.laurent_center + r * np.exp(2j * np.pi * rng.uniform(0, 1, 200))
        exact = model.F(z, w)
        err = np.abs(split(w) - exact) / np.maximum(1.0, np.abs(exact))
        worst = max(worst, split.residual, float(np.max(err)))
        used += 1
    return worst, {"splits": used, "skipped": skipped}


def _limit_samples(model: Model, rng, n: int):
    """Boundary points of the regular cross interior away from M, with their approach data."""
    sc = model.sc
    out = []
    for side, S in (("z", sc.A), ("w", sc.B)):
        need = n // 2 if side == "z" else n - n // 2
        while need > 0:
            t = float(_interior_angles(S, 1, rng)[0])
            zeta = complex(np.exp(1j * t))
            x = complex(0.95 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform()))
            sing = sc.M.points_over_z(zeta) if side == "z" else sc.M.points_over_w(zeta)
            if sing.size and np.min(np.abs(sing - x)) < 0.05:
                continue
            start = 0.5
            for _ in range(6):
                path = approach_path(t, n=LIMIT_STEPS, start=start)
                fixed = np.full(LIMIT_STEPS, x)
                zp, wp = (path.points, fixed) if side == "z" else (fixed, path.points)
                if np.all(model.domain(zp, wp) & (model.hull.distance(zp, wp) > HULL_MARGIN)):
                    break
                start *= 0.5
            else:
                continue
            out.append((side, t, x, path))
            need -= 1
    return out


def _angular_limits(model: Model, glued, rng, n: int, tol: float) -> tuple[float, dict]:
    worst, missing = 0.0, 0
    samples = _limit_samples(model, rng, n)
    for side, t, x, path in samples:
        zeta = complex(np.exp(1j * t))
        if side == "z":
            lim = angular_limit(glued, path, w=x, tol=tol)
            exact = complex(model.F(zeta, x))
        else:
            lim = angular_limit(lambda w: glued(np.full(w.shape, x), w), path, tol=tol)
            exact = complex(model.F(x, zeta))
        if not lim.exists:
            missing += 1
            continue
        worst = max(worst, abs(lim.value - exact) / max(1.0, abs(exact)))
    if missing:
        worst = math.inf
    return worst, {"n": len(samples), "missing": missing}


def _strong_end_points(model: Model, rng) -> tuple[float, dict]:
    sc = model.sc
    M = sc.M

    def extra(zs, ws, r, delta, rho):
        for g in M.graphs:
            if g.orientation == "z":
                img = g.image(zs)
                b = ws.mean()
                if np.any(np.isfinite(img) & (np.abs(img - b) <= rho * 1.01)):
                    return False
            else:
                img = g.image(ws)
                a = np.angle(zs.mean())
                fin = img[np.isfinite(img)]
                if fin.size and np.any(LevelSetRegion(sc.A, delta, a, r).contains(fin)):
                    return False
        return True

    found, tried, wits = 0, 0, []
    for a in sorted(_interior_angles(sc.A, 3, rng)):
        fib = M.points_over_z(complex(np.exp(1j * a)))
        b = next((c for c in (0.8, -0.8, 0.8j, -0.8j, 0.0)
                  if not fib.size or np.min(np.abs(fib - c)) > 0.3), 0.0)
        tried += 1
        wit = strong_end_point_check(model.domain, float(a), b, sc.A, n_samples=10_000,
                                     seed=sc.seed, extra=extra)
        if wit is not None:
            found += 1
            wits.append([float(a), [b.real, b.imag] if isinstance(b, complex) else b,
                         wit.r, wit.delta, wit.rho])
    return tried - found, {"witnesses": wits}


def _poisson_side(model: Model, rng):
    """Pick a side and a fixed value for which a full-circle Poisson patch is valid."""
    sc = model.sc
    for side in ("z", "w"):
        other = "w" if side == "z" else "z"
        cands = np.sqrt(rng.uniform(0.0, 0.81, 256)) * np.exp(2j * np.pi * rng.uniform(0, 1, 256))
        ok = np.ones(cands.shape, dtype=bool) if sc.M.is_empty else \
            ~sc.M.near_over(other, cands, 0j, 0.0, POISSON_CLEAR)
        if np.any(ok):
            return side, complex(cands[np.argmax(ok)])
    raise HypothesisError("no fixed value admits a full-circle Poisson patch")


def _perturbed_data(model: Model, side: str, x: complex, amplitude: float):
    S = model.sc.A if side == "z" else model.sc.B
    arc = S.arcs[0]
    lo = arc.start + arc.length / 3
    sub = Arc(lo, lo + arc.length / 3)
    bump = amplitude * sub.contains(model.theta).astype(float)
    if side == "z":
        data = model.F(model.circle, x) + bump
    else:
        data = model.F(x, model.circle) + bump
    return data, S


def negative_control(sc: Scenario, amplitude: float = 1e-3, seed: int = 0) -> tuple[bool, dict]:
    """Perturb boundary data of F on a sub-arc and report whether the pipeline flags it.

    The perturbed data feed a Poisson patch on one slice. It is flagged when
    gluing it with the closed-form patch is rejected or when the uniqueness
    probe on the difference finds nonzero angular limits or a violated
    interior bound.
    """
    model = Model(sc)
    rng = np.random.default_rng([sc.seed, seed, 7])
    side, x = _poisson_side(model, rng)
    data, S = _perturbed_data(model, side, x, amplitude)

    if side == "z":
        def recon(z):
            return poisson_reconstruct_rows(data[None, :], np.asarray(z, dtype=complex))

        def truth(z):
            return model.F(z, x)

        def region(z, w):
            return model.domain(z, np.full(np.shape(z), x))
    else:
        def recon(w):
            return poisson_reconstruct_rows(data[None, :], np.asarray(w, dtype=complex))

        def truth(w):
            return model.F(x, w)

        def region(z, w):
            return model.domain(np.full(np.shape(w), x), w)

    pts = np.sqrt(rng.uniform(0, 1, 4000)) * np.exp(2j * np.pi * rng.uniform(0, 1, 4000))
    zz, ww = (pts, np.full(pts.shape, x)) if side == "z" else (np.full(pts.shape, x), pts)
    patches = [LocalPatch("perturbed", lambda z, w: region(z, w),
                          lambda z, w: recon(z if side == "z" else w)),
               LocalPatch("closed_form", lambda z, w: region(z, w),
                          lambda z, w: truth(z if side == "z" else w))]
    glue_flag, glue_metric = False, 0.0
    try:
        _, rep = glue(patches, zz, ww, tol=sc.tol_quad)
        glue_metric = max(c.metric for c in rep.checks)
    except GlueRejected as exc:
        glue_flag = True
        glue_metric = max(c.metric for c in exc.report.checks)
    probe = uniqueness_probe(lambda t: recon(t) - truth(t), S, tol=sc.tol_limit, seed=seed)
    flagged = glue_flag or not probe.passed
    detail = {"side": side, "fixed": x, "amplitude": amplitude, "glue_flag": glue_flag,
              "glue_metric": glue_metric, "probe_failed": probe.failed()}
    return flagged, detail


def delta_schedule(count: int) -> list[float]:
    return [2.0 ** -n for n in range(1, count + 1)]


def level_set_grids(sc: Scenario, n: int | None = None) -> list[tuple[str, GridField]]:
    n = sc.grid_n if n is None else n
    spec = SliceSpec("w", 0j)
    out = []
    for k, d in enumerate(delta_schedule(sc.delta_count), start=1):
        region = LevelSetRegion(sc.A, d)
        out.append((f"level_A_delta{k}", rasterize(lambda z, w: region.contains(z), spec, n)))
    return out


def _nesting_violations(grids) -> int:
    bad = 0
    for (_, g1), (_, g2) in zip(grids, grids[1:]):
        bad += int(np.sum(~g2.mask & g1.mask))
    return bad


def hull_grid(model: Model, spec: SliceSpec, n: int) -> GridField:
    """Cells within one cell size of the singular hull slice; all masked when M is empty."""
    x0, x1, y0, y1 = spec.bounds
    cell = max((x1 - x0) / n, (y1 - y0) / n)
    pts = model.hull.slice_at_z(spec.value) if spec.fixed == "z" else model.hull.slice_at_w(spec.value)

    def member(z, w):
        t = w if spec.fixed == "z" else z
        hit = np.zeros(t.shape, dtype=bool)
        for p in pts:
            hit |= np.abs(t - p) <= cell
        return hit

    return rasterize(member, spec, n)


def emit_region_grids(sc: Scenario, out_dir=None, slices=None, n: int | None = None) -> dict:
    """Envelope, level-set and hull grids; written as CSV when ``out_dir`` is given."""
    n = sc.grid_n if n is None else n
    model = Model(sc)
    slices = sc.slices if slices is None else slices
    grids: dict[str, GridField] = {}
    for fixed, value in slices:
        spec = SliceSpec(fixed, value)
        tag = f"{fixed}_{value.real:+.6g}_{value.imag:+.6g}"
        grids[f"envelope_{tag}"] = rasterize(model.domain, spec, n, values=model.F)
        grids[f"hull_{tag}"] = hull_grid(model, spec, n)
    for name, g in level_set_grids(sc, n):
        grids[name] = g
    if out_dir is not None:
        gdir = Path(out_dir)
        gdir.mkdir(parents=True, exist_ok=True)
        for name, g in grids.items():
            g.write_csv(gdir / f"{name}.csv")
    return grids


# --- pipeline -------------------------------------------------------------------

def run_scenario(sc: Scenario, out_dir=None, timings: bool = False, emit_grids: bool = True) -> CheckReport:
    """Run every verification step for a scenario; check failures are recorded, not raised."""
    sc.validate()
    rep = CheckReport(meta={"scenario": sc.name, "seed": sc.seed,
                            "delta_schedule": delta_schedule(sc.delta_count)})
    rng = np.random.default_rng(sc.seed)
    model = Model(sc)

    def step(name, tol, fn):
        t0 = time.perf_counter()
        metric, passed, detail = fn()
        rep.add(name, passed, metric, tol, time.perf_counter() - t0, **detail)

    step("hypothesis_measure", 0.0, lambda: (min(sc.A.measure(), sc.B.measure()),
                                            sc.A.measure() > 0 and sc.B.measure() > 0, {}))
    t0 = time.perf_counter()
    try:
        collar = singular_free_collar(sc.M, sc.A, sc.B, seed=sc.seed)
        rep.add("hypothesis_M_disjoint_AxB", True, min(collar.r + collar.s), 0.0,
                time.perf_counter() - t0, r=list(collar.r), s=list(collar.s))
    except HypothesisError as exc:
        rep.add("hypothesis_M_disjoint_AxB", False, 0.0, 0.0, time.perf_counter() - t0,
                diagnostic=str(exc))
        rep.meta["aborted"] = "hypothesis failed"
        return _finish(rep, sc, out_dir, timings)

    def schedule():
        ds = delta_schedule(sc.delta_count)
        dev = max(abs(d - 2.0 ** -k) for k, d in enumerate(ds, start=1))
        return dev, dev == 0.0, {"values": ds}
    step("delta_schedule", 0.0, schedule)

    def exhaustion():
        steps = sc.exhaustion_steps
        gap = 0.0
        probes = 0.9 * np.exp(2j * np.pi * (np.arange(8) + 0.5) / 8)
        mono = 0.0
        for S in (sc.A, sc.B):
            seq = [_shrunk(S, 2.0 ** -k) for k in range(1, steps + 1)]
            for s1, s2 in zip(seq, seq[1:]):
                if not s1.issubset(s2):
                    return math.inf, False, {"reason": "not nested"}
            gap = max(gap, S.measure() - seq[-1].measure())
            r = check_monotone_convergence(seq, S, probes, tol=1e-5)
            mono = max(mono, r["monotone"].metric)
        return gap, gap <= 1e-5 and mono <= 1e-14, {"monotone_rise": mono}
    step("exhaustion", 1e-5, exhaustion)

    def hull():
        worst, detail = _check_hull(model, rng)
        return worst, worst <= 1e-10, detail
    step("hull_consistency", 1e-10, hull)

    def hull_empty():
        # an empty M must give an empty hull, and then every hull grid is fully masked
        grids = [hull_grid(model, SliceSpec(f, v), sc.grid_n) for f, v in sc.slices]
        members = sum(int(np.sum(~g.mask)) for g in grids)
        ok = model.hull.is_empty == sc.M.is_empty and (members == 0 or not sc.M.is_empty)
        return members if sc.M.is_empty else 0, ok, {"hull_empty": model.hull.is_empty}
    step("hull_empty_iff_M_empty", 0.0, hull_empty)
    rep.meta["hull_empty"] = model.hull.is_empty

    zs, ws = model.sample_domain(sc.n_glue, rng)

    def sampling():
        vals = model.F(zs, ws)
        bad = int(np.sum(~np.isfinite(vals)))
        return bad, bad == 0, {"n": int(zs.size)}
    step("sampling_F", 0.0, sampling)

    def sep():
        m = _separate_holomorphy(model, rng)
        return m, m <= sc.tol_quad, {}
    step("separate_holomorphy", sc.tol_quad, sep)

    def lau():
        m, detail = _laurent_check(model, rng)
        return m, m <= sc.tol_quad, detail
    step("laurent_split", sc.tol_quad, lau)

    glued = None
    t0 = time.perf_counter()
    try:
        glued, grep = glue(model.patches(), zs, ws, tol=sc.tol_quad)
        metric = max((c.metric for c in grep.checks), default=0.0)
        rep.add("glue", True, metric, sc.tol_quad, time.perf_counter() - t0,
                overlaps={c.name: c.metric for c in grep.checks})
    except GlueRejected as exc:
        metric = max(c.metric for c in exc.report.checks)
        rep.add("glue", False, metric, sc.tol_quad, time.perf_counter() - t0, diagnostic=str(exc))

    if glued is not None:
        def matches():
            g = glued(zs, ws)
            f = model.F(zs, ws)
            err = np.abs(g - f) / np.maximum(1.0, np.abs(f))
            m = float(np.max(err)) if np.all(np.isfinite(err)) else math.inf
            src = glued.source(zs, ws)
            cover = {p.name: int(np.sum(src == k)) for k, p in enumerate(glued.patches)}
            return m, m <= sc.tol_quad, {"n": int(zs.size), "coverage": cover}
        step("glued_matches_F", sc.tol_quad, matches)

        def limits():
            m, detail = _angular_limits(model, glued, rng, sc.n_limits, sc.tol_limit)
            return m, m <= sc.tol_limit, detail
        step("angular_limits", sc.tol_limit, limits)

    def strong():
        m, detail = _strong_end_points(model, rng)
        return m, m == 0, detail
    step("strong_end_points", 0.0, strong)

    def unperturbed():
        flagged, detail = negative_control(sc, amplitude=0.0, seed=0)
        return float(flagged), not flagged, detail
    step("uniqueness_unperturbed", 0.0, unperturbed)

    def negative():
        flagged, detail = negative_control(sc, amplitude=sc.tol_negative, seed=0)
        return float(flagged), flagged, detail
    step("negative_control_flagged", 1.0, negative)

    def nested():
        grids = level_set_grids(sc)
        bad = _nesting_violations(grids)
        return bad, bad == 0, {"n_grids": len(grids)}
    step("grids_nested", 0.0, nested)

    if out_dir is not None and emit_grids:
        emit_region_grids(sc, Path(out_dir) / sc.name / "grids")
    return _finish(rep, sc, out_dir, timings)


def _finish(rep: CheckReport, sc: Scenario, out_dir, timings: bool) -> CheckReport:
    if out_dir is not None:
        d = Path(out_dir) / sc.name
        d.mkdir(parents=True, exist_ok=True)
        (d / "report.json").write_text(rep.to_json(timings))
    return rep


def run_suite(directory, out_dir=None, overrides: dict | None = None,
              timings: bool = False) -> tuple[CheckReport, dict]:
    """Run every ``*.json`` scenario in ``directory``; unreadable files count as failures."""
    files = sorted(Path(directory).glob("*.json"))
    if not files:
        raise ScenarioError(f"no scenario files in {directory}")
    agg = CheckReport(meta={"directory": os.fspath(directory)})
    reports = {}
    for path in files:
        try:
            sc = load_scenario(path)
            if overrides:
                sc = replace(sc, **overrides)
                sc.validate()
            r = run_scenario(sc, out_dir, timings)
            reports[path.name] = r
            agg.add(path.name, r.passed, len(r.failed()), 0.0, failed=r.failed())
        except (ScenarioError, ValueError) as exc:
            agg.add(path.name, False, math.inf, 0.0, diagnostic=str(exc))
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "suite.json").write_text(agg.to_json(timings))
    return agg, reports
