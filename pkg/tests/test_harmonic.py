import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crossext.boundary import BoundarySet, approach_path, regular_points
from crossext.harmonic import (MeasureField, angular_harmonic_measure, check_monotone_convergence,
                               harmonic_measure, laplacian_residual, local_harmonic_measure,
                               poisson_quadrature)

PI = math.pi


def random_set(rng, k=None):
    k = rng.integers(1, 4) if k is None else k
    pairs = []
    for _ in range(k):
        s = rng.uniform(0, 2 * PI)
        pairs.append((s, s + rng.uniform(0.05, 2.0)))
    return BoundarySet.from_pairs(pairs)


def random_points(rng, n, rmax=0.99):
    return rmax * np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * PI * rng.uniform(0, 1, n))


def test_center_and_trivial_values():
    A = BoundarySet.from_pairs([(0, PI)])
    assert harmonic_measure(0.0, A) == pytest.approx(0.5, abs=1e-15)
    z = random_points(np.random.default_rng(0), 50)
    assert np.all(harmonic_measure(z, BoundarySet.circle()) == 0.0)
    assert np.all(harmonic_measure(z, BoundarySet.empty()) == 1.0)


def test_reject_outside():
    with pytest.raises(ValueError):
        harmonic_measure(1.0, BoundarySet.circle())


def test_closed_vs_quadrature_example():
    A = BoundarySet.from_pairs([(PI / 2, 3 * PI / 2)])
    assert abs(harmonic_measure(0.5, A) - harmonic_measure(0.5, A, "quadrature")) <= 1e-10


def test_quadrature_vs_scipy():
    # a third, independent integrator for the Poisson integral
    integrate = pytest.importorskip("scipy.integrate")
    A = BoundarySet.from_pairs([(0.3, 2.0), (3.0, 4.1)])
    for z in (0.2 + 0.1j, -0.6 + 0.3j, 0.9j):
        def kern(t):
            return (1 - abs(z) ** 2) / abs(np.exp(1j * t) - z) ** 2 / (2 * PI)
        mass = sum(integrate.quad(kern, lo, hi, epsabs=1e-14, epsrel=1e-14, limit=200)[0]
                   for lo, hi in A.intervals())
        assert poisson_quadrature(z, A) == pytest.approx(mass, abs=1e-12)
        assert harmonic_measure(z, A) == pytest.approx(1 - mass, abs=1e-12)


def test_complement_additivity_and_rotation():
    rng = np.random.default_rng(2)
    for _ in range(20):
        A = random_set(rng)
        if A.is_full:
            continue
        z = random_points(rng, 50)
        total = harmonic_measure(z, A) + harmonic_measure(z, A.complement())
        assert np.max(np.abs(total - 1)) <= 1e-10
        t = rng.uniform(0, 2 * PI)
        rot = BoundarySet.from_pairs([(a + t, b + t) for a, b in A.to_pairs()])
        assert np.max(np.abs(harmonic_measure(np.exp(1j * t) * z, rot) - harmonic_measure(z, A))) <= 1e-12


def test_disjoint_additivity():
    z = random_points(np.random.default_rng(3), 200)
    A, B = BoundarySet.from_pairs([(0, 1)]), BoundarySet.from_pairs([(2, 3.5)])
    lhs = 1 - harmonic_measure(z, A.union(B))
    rhs = (1 - harmonic_measure(z, A)) + (1 - harmonic_measure(z, B))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_regular_points_same_measure():
    A = BoundarySet.from_pairs([(0.2, 2.5)])
    z = random_points(np.random.default_rng(4), 100)
    assert np.array_equal(harmonic_measure(z, A), harmonic_measure(z, regular_points(A)))


def test_boundary_behaviour_along_radii():
    A = BoundarySet.from_pairs([(0, PI)])
    inside = harmonic_measure(approach_path(PI / 2, n=40).points, A)
    outside = harmonic_measure(approach_path(3 * PI / 2, n=40).points, A)
    assert inside[-1] < 1e-4 and outside[-1] > 1 - 1e-4
    # at an endpoint the radial limit is 1/2
    end = harmonic_measure(approach_path(0.0, n=40).points, A)
    assert end[-1] == pytest.approx(0.5, abs=1e-3)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * PI), st.floats(0.05, 6.0), st.floats(0, 0.98), st.floats(0, 2 * PI))
def test_range(s, L, r, t):
    A = BoundarySet.from_pairs([(s, s + L)])
    v = harmonic_measure(r * np.exp(1j * t), A)
    assert 0.0 <= v < 1.0


def test_angular_measure():
    A = BoundarySet.from_pairs([(0, PI)])
    z = random_points(np.random.default_rng(5), 50, 0.9)
    w = harmonic_measure(z, A)
    z = z[w < 0.5]
    assert np.allclose(angular_harmonic_measure(z, A, 0.0), harmonic_measure(z, A), atol=0, rtol=0)
    quad = harmonic_measure(z, A, "quadrature")
    assert np.max(np.abs(angular_harmonic_measure(z, A, 0.5) - 2 * quad)) <= 1e-10
    with pytest.raises(ValueError):
        angular_harmonic_measure(-0.5j, A, 0.5)


def test_monotone_convergence_examples():
    A = BoundarySet.from_pairs([(0, PI)])
    probes = 0.9j * np.linspace(0.05, 0.95, 10) + 0.05
    ks = [2 ** j for j in range(1, 25)]
    seq = [BoundarySet.from_pairs([(1 / k, PI - 1 / k)]) for k in ks]
    rep = check_monotone_convergence(seq, A, probes)
    assert rep.passed and rep["terminal_gap"].metric <= 1e-6
    const = check_monotone_convergence([A] * 5, A, probes)
    assert const["terminal_gap"].metric == 0.0 and const["monotone"].metric == 0.0
    center = np.array([harmonic_measure(0.0, S) for S in seq])
    expect = np.array([1 - S.measure() / (2 * PI) for S in seq])
    assert np.max(np.abs(center - expect)) <= 1e-14
    assert np.all(np.diff(center) <= 0)


def test_monotone_rejects_non_nested():
    A = BoundarySet.from_pairs([(0, PI)])
    bad = [BoundarySet.from_pairs([(0.5, 1)]), BoundarySet.from_pairs([(1.5, 2)])]
    with pytest.raises(ValueError):
        check_monotone_convergence(bad, A, [0.1])


def test_laplacian_residual():
    A = MeasureField(BoundarySet.from_pairs([(0, 2.0)]))
    r1 = laplacian_residual(A, 0.02, 0.8)
    r2 = laplacian_residual(A, 0.01, 0.8)
    # second-order scheme: halving h divides the residual by about four
    assert r2 < r1 / 3
    assert laplacian_residual(MeasureField(BoundarySet.circle()), 0.05, 0.8) == 0.0
    assert laplacian_residual(MeasureField(BoundarySet.empty()), 0.05, 0.8) == 0.0
    with pytest.raises(ValueError):
        laplacian_residual(A, 0.1, 0.95)


def walk_on_spheres(z0, center, radius, marked, n, rng, eps=1e-6):
    """Brownian exit from the lens E cap Delta_a(r); returns the fraction exiting on ``marked``."""
    a = np.exp(1j * center)
    z = np.full(n, z0, dtype=complex)
    alive = np.ones(n, dtype=bool)
    for _ in range(10_000):
        if not alive.any():
            break
        za = z[alive]
        d = np.minimum(1 - np.abs(za), radius - np.abs(za - a))
        done = d < eps
        step = d * np.exp(2j * PI * rng.uniform(0, 1, za.size))
        za = np.where(done, za, za + step)
        z[alive] = za
        idx = np.flatnonzero(alive)
        alive[idx[done]] = False
    on_circle = np.abs(1 - np.abs(z)) <= np.abs(radius - np.abs(z - a))
    hit = on_circle & marked.contains(np.angle(z))
    return hit.mean(), hit.std() / math.sqrt(n)


def test_local_measure_against_monte_carlo():
    rng = np.random.default_rng(6)
    c, r = 0.3, 1.0
    z0 = 0.5 * np.exp(1j * c)
    # symmetric lens, whole unit-circle side marked: value 1/2 at the center
    p, sd = walk_on_spheres(z0, c, r, BoundarySet.circle(), 1_000_000, rng)
    assert abs((1 - p) - local_harmonic_measure(z0, BoundarySet.circle(), c, r)) <= 3 * sd + 1e-6
    assert local_harmonic_measure(z0, BoundarySet.circle(), c, r) == pytest.approx(0.5, abs=1e-12)
    # an asymmetric marked piece and an off-center point
    marked = BoundarySet.from_pairs([(c - 0.2, c + 0.9)])
    z1 = 0.6 * np.exp(1j * (c + 0.2))
    p, sd = walk_on_spheres(z1, c, r, marked, 200_000, rng)
    assert abs((1 - p) - local_harmonic_measure(z1, marked, c, r)) <= 3 * sd + 2e-3


def test_local_measure_trivial_cases():
    c, r = 1.0, 0.5
    a = np.exp(1j * c)
    assert local_harmonic_measure(a * 0.9, BoundarySet.empty(), c, r) == 1.0
    near = local_harmonic_measure(a * (1 - 1e-6), BoundarySet.circle(), c, r)
    assert near < 1e-5
    with pytest.raises(ValueError):
        local_harmonic_measure(0.0, BoundarySet.circle(), c, r)
