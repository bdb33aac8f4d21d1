import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crossext.boundary import BoundarySet, approach_path
from crossext.harmonic import harmonic_measure
from crossext.regions import (IN_W, IN_W_INTERIOR, IN_W_STAR_INTERIOR, OUTSIDE, Annulus, Cross,
                              GridField, LevelSetRegion, SliceSpec, cross_contains,
                              envelope_contains, envelope_tilde_contains, rasterize,
                              sample_lens_level_set, strong_end_point_check)

PI = math.pi
SEMI = BoundarySet.from_pairs([(0, PI)])


def random_disc(rng, n, rmax=0.999):
    return rmax * np.sqrt(rng.random(n)) * np.exp(2j * PI * rng.random(n))


def bisect_radius(A, direction, target, mode="quadrature"):
    """Point ``r * exp(1j*direction)`` with ``omega(., A) = target``, omega decreasing in r."""
    lo, hi = 0.0, 1.0 - 1e-15
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if harmonic_measure(mid * np.exp(1j * direction), A, mode) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) * np.exp(1j * direction)


def circle_through(p, q, r):
    """Center and radius of the circle through three points."""
    ax, ay, bx, by, cx, cy = p.real, p.imag, q.real, q.imag, r.real, r.imag
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax ** 2 + ay ** 2) * (by - cy) + (bx ** 2 + by ** 2) * (cy - ay) + (cx ** 2 + cy ** 2) * (ay - by)) / d
    uy = ((ax ** 2 + ay ** 2) * (cx - bx) + (bx ** 2 + by ** 2) * (ax - cx) + (cx ** 2 + cy ** 2) * (bx - ax)) / d
    c = complex(ux, uy)
    return c, abs(p - c)


# --- cross -------------------------------------------------------------------

def test_cross_examples():
    X = Cross(BoundarySet.from_pairs([(0, 1)]), BoundarySet.from_pairs([(2, 3)]))
    assert cross_contains(X, 0, np.exp(2.5j)) == IN_W_STAR_INTERIOR
    assert cross_contains(X, np.exp(1j * 0.0), 0) == IN_W_INTERIOR
    assert cross_contains(X, 0.5, 0.5j) == OUTSIDE
    # both coordinates on the boundary sets: in W but not in the interior
    assert cross_contains(X, np.exp(0.5j), np.exp(2.5j)) == IN_W
    assert cross_contains(X, np.exp(2j), 0.1) == OUTSIDE
    with pytest.raises(ValueError):
        Cross(BoundarySet.empty(), SEMI).validate()


# --- envelope ---------------------------------------------------------------

def test_envelope_examples():
    X = Cross(SEMI, SEMI)
    member, slack = envelope_contains(X, 0, 0)
    assert not member and abs(slack) <= 1e-15
    full = Cross(BoundarySet.circle(), BoundarySet.circle())
    z = random_disc(np.random.default_rng(0), 100)
    assert np.all(envelope_contains(full, z, z[::-1])[0])
    big = BoundarySet.from_pairs([(0, 3 * PI / 2)])
    member, slack = envelope_contains(Cross(big, big), 0, 0)
    assert member and slack == pytest.approx(0.5, abs=1e-15)


def test_envelope_symmetry():
    rng = np.random.default_rng(1)
    X = Cross(BoundarySet.from_pairs([(0, 2), (3, 4)]), BoundarySet.from_pairs([(1, 5)]))
    z, w = random_disc(rng, 1000), random_disc(rng, 1000)
    m1, s1 = envelope_contains(X, z, w)
    m2, s2 = envelope_contains(X.swap(), w, z)
    assert np.array_equal(m1, m2) and np.array_equal(s1, s2)


def test_envelope_radial_slack_continuity():
    rng = np.random.default_rng(2)
    A = BoundarySet.from_pairs([(0.5, 2.5)])
    B = BoundarySet.from_pairs([(1.0, 4.0)])
    X = Cross(A, B)
    for _ in range(20):
        a = rng.uniform(0.6, 2.4)
        w = random_disc(rng, 1, 0.95)[0]
        if harmonic_measure(w, B) >= 1 - 1e-6:
            continue
        pts = approach_path(a, n=60).points
        member, _ = envelope_contains(X, pts, np.full(pts.shape, w))
        assert member[-1]
        # once inside, stays inside along the radius
        first = np.argmax(member)
        assert np.all(member[first:])


def test_envelope_tilde_examples():
    X = Cross(SEMI, SEMI)
    rng = np.random.default_rng(3)
    z = random_disc(rng, 500, 0.99)
    z = z[harmonic_measure(z, SEMI) < 1 - 1e-9]
    w = random_disc(rng, z.size, 0.99)
    assert np.array_equal(envelope_tilde_contains(X, 0.0, z, w), envelope_contains(X, z, w)[0])
    zt = bisect_radius(SEMI, PI / 2, 0.3)
    wt = bisect_radius(SEMI, PI / 2, 0.35)
    assert harmonic_measure(zt, SEMI) == pytest.approx(0.3, abs=1e-12)
    assert envelope_tilde_contains(X, 0.5, zt, wt)
    zb = bisect_radius(SEMI, PI / 2, 0.25)
    wb = bisect_radius(SEMI, PI / 2, 0.5)
    assert not envelope_tilde_contains(X, 0.5, zb, wb)
    with pytest.raises(ValueError):
        envelope_tilde_contains(X, 0.5, -0.5j, 0)


# --- level sets ---------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_level_set_monotone(d1, d2):
    lo, hi = sorted((d1, d2))
    z = random_disc(np.random.default_rng(4), 10_000)
    A = BoundarySet.from_pairs([(0.3, 2.0), (4.0, 5.0)])
    small = LevelSetRegion(A, lo).contains(z)
    big = LevelSetRegion(A, hi).contains(z)
    assert np.all(big[small])


def test_level_set_exhaustion():
    z = random_disc(np.random.default_rng(5), 10_000, 0.99)
    A = BoundarySet.from_pairs([(0.3, 2.0)])
    fractions = [LevelSetRegion(A, 1 - 2.0 ** -k).contains(z).mean() for k in range(1, 41)]
    assert np.all(np.diff(fractions) >= 0)
    assert fractions[-1] == 1.0


def test_level_set_strict_and_validated():
    assert not LevelSetRegion(SEMI, 0.5).contains(0.0)
    with pytest.raises(ValueError):
        LevelSetRegion(SEMI, 1.0)
    with pytest.raises(ValueError):
        LevelSetRegion(SEMI, 0.5, center=1.0)


def test_localized_level_set_sampling():
    rng = np.random.default_rng(6)
    z = sample_lens_level_set(SEMI, PI / 2, 0.5, 0.25, 2000, rng)
    region = LevelSetRegion(SEMI, 0.25, PI / 2, 0.5)
    assert z.size > 1000 and np.all(region.contains(z))
    assert np.all(np.abs(z - 1j) < 0.5) and np.all(np.abs(z) < 1)


def test_annulus():
    Q = Annulus(0.1, 0.3, 0.6)
    assert Q.contains(0.55) and not Q.contains(0.1) and Q.inside_disc()
    with pytest.raises(ValueError):
        Annulus(0, 0.5, 0.5)


# --- rasterization -------------------------------------------------------------------

def test_rasterize_examples():
    full = Cross(BoundarySet.circle(), BoundarySet.circle())
    member = lambda z, w: (np.abs(z) < 1) & envelope_contains(full, np.where(np.abs(z) < 1, z, 0), w)[0]
    g = rasterize(member, SliceSpec("w", 0), 32)
    inside = np.abs(g.coords) < 1
    assert np.array_equal(~g.mask, inside)
    one = rasterize(lambda z, w: np.abs(z) < 0.5, SliceSpec("w", 0), (1, 1))
    assert one.shape == (1, 1) and not one.mask[0, 0]
    with pytest.raises(ValueError):
        rasterize(member, SliceSpec("w", 0), 0)
    with pytest.raises(ValueError):
        SliceSpec("w", 1.5)


def test_rasterized_level_curve_within_one_cell():
    A = BoundarySet.from_pairs([(0.4, 2.4)])
    delta = 0.3
    n = 128
    region = LevelSetRegion(A, delta)
    g = rasterize(lambda z, w: region.contains(z), SliceSpec("w", 0), n)
    # exact curve: the circle through both arc endpoints and one bisected point
    p1, p2 = A.arcs[0].endpoints()
    q = bisect_radius(A, 1.4, delta)
    c, R = circle_through(p1, p2, q)
    cell = 2.0 / n * math.sqrt(2)
    inside = ~g.mask
    edge = np.zeros_like(inside)
    edge[:, 1:] |= inside[:, 1:] != inside[:, :-1]
    edge[:, :-1] |= inside[:, 1:] != inside[:, :-1]
    edge[1:, :] |= inside[1:, :] != inside[:-1, :]
    edge[:-1, :] |= inside[1:, :] != inside[:-1, :]
    pts = g.coords[edge & (np.abs(g.coords) < 1 - cell)]
    assert pts.size > 50
    assert np.max(np.abs(np.abs(pts - c) - R)) <= cell


def test_csv_format_and_round_trip(tmp_path):
    g = rasterize(lambda z, w: np.abs(z) < 0.7, SliceSpec("w", 0.1j), 9, values=lambda z, w: np.exp(z) / 3)
    text = g.to_csv()
    lines = text.splitlines()
    assert lines[0] == "re_coord,im_coord,mask,re_val,im_val"
    assert len(lines) == 82
    assert any(",nan,nan" in ln for ln in lines[1:])
    path = tmp_path / "g.csv"
    g.write_csv(path)
    back = GridField.read_csv(path, 9, 9)
    assert np.array_equal(back.coords, g.coords)
    assert np.array_equal(back.mask, g.mask)
    ok = ~g.mask
    assert np.array_equal(back.values[ok], g.values[ok])
    assert back.to_csv() == text


# --- strong end-points ------------------------------------------------------------------

def test_strong_end_point_examples():
    X = Cross(SEMI, SEMI)

    def omega(z, w):
        return envelope_contains(X, z, w)[0] & (np.abs(w - z / 2) > 1e-9)

    def off_graph(z, w, r, delta, rho):
        return bool(np.min(np.abs(z / 2 - 0.8j)) > rho)

    wit = strong_end_point_check(omega, PI / 2, 0.8j, SEMI, extra=off_graph)
    assert wit is not None and wit.n_samples == 10_000
    assert strong_end_point_check(lambda z, w: np.zeros(np.shape(z), bool), PI / 2, 0, SEMI) is None
    first = strong_end_point_check(lambda z, w: np.ones(np.shape(z), bool), PI / 2, 0, SEMI)
    assert (first.r, first.delta, first.rho) == (0.5, 0.5, 0.5)
