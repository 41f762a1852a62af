import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from density_fingerprint import lattice as lat
from density_fingerprint.errors import DuplicateMotifPoint, SingularBasis

from conftest import random_rotation, random_set


def brute_points(pset, center, radius, span=6):
    """Points of the set in the ball by scanning a wide coefficient box."""
    d = pset.dim
    out = []
    for n in itertools.product(range(-span, span + 1), repeat=d):
        for i, f in enumerate(pset.motif):
            p = pset.lattice.to_cartesian(f + np.array(n))
            if np.linalg.norm(p - center) <= radius + 1e-12:
                out.append(tuple(np.round(p, 9)))
    return sorted(out)


# -- canonicalize ------------------------------------------------------------

def test_canonicalize_wraps_into_unit_cell():
    p = lat.canonicalize(lat.periodic_set(np.eye(2), [[1.25, -0.5]]))
    np.testing.assert_allclose(p.motif, [[0.25, 0.5]])


def test_exact_duplicate_rejected():
    with pytest.raises(DuplicateMotifPoint):
        lat.periodic_set(np.eye(2), [[0, 0], [0, 0]])


def test_near_duplicate_rejected():
    with pytest.raises(DuplicateMotifPoint):
        lat.periodic_set(np.eye(2), [[0, 0], [1e-12, 0]])


def test_duplicate_across_cell_boundary_rejected():
    with pytest.raises(DuplicateMotifPoint):
        lat.periodic_set(np.eye(2), [[0, 0], [1 - 1e-13, 0]])


def test_singular_basis_rejected():
    with pytest.raises(SingularBasis):
        lat.Lattice.from_rows([[1, 2], [2, 4]])


def test_canonicalize_idempotent():
    p = lat.periodic_set([[1, 0.3], [0.2, 1]], [[0.7, 0.1], [0.2, 0.9]])
    q = lat.canonicalize(lat.canonicalize(p))
    np.testing.assert_array_equal(p.motif, q.motif)


# -- reduce_basis ----------------------------------------------------------------

def _check_same_lattice(a, b):
    t = np.linalg.solve(a, b)
    np.testing.assert_allclose(t, np.rint(t), atol=1e-9)
    assert abs(abs(np.linalg.det(np.rint(t))) - 1) < 1e-9


def test_reduce_skewed_square_basis():
    red = lat.reduce_basis(lat.Lattice([[1, 10], [0, 1]])).basis
    np.testing.assert_allclose(np.linalg.norm(red, axis=0), [1, 1])
    _check_same_lattice(np.array([[1.0, 10], [0, 1]]), red)


def test_reduce_identity_is_identity():
    np.testing.assert_allclose(lat.reduce_basis(lat.Lattice(np.eye(3))).basis, np.eye(3))


def test_reduce_keeps_determinant():
    b = np.array([[2.0, 1], [0, 1]])
    red = lat.reduce_basis(lat.Lattice(b)).basis
    assert abs(abs(np.linalg.det(red)) - 2) < 1e-9
    assert np.all(np.sort(np.linalg.norm(red, axis=0)) <= np.sort(np.linalg.norm(b, axis=0)) + 1e-12)
    _check_same_lattice(b, red)


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
def test_reduction_preserves_point_set(seed, dim):
    rng = np.random.default_rng(seed)
    u = np.eye(dim, dtype=int)
    for _ in range(4):  # random unimodular skew
        i, j = rng.choice(dim, 2, replace=False)
        u[:, j] += int(rng.integers(-3, 4)) * u[:, i]
    base = random_set(rng, dim)
    skew = lat.Lattice(base.lattice.basis @ u)
    p2 = lat.PeriodicSet(skew, skew.to_fractional(base.positions))
    c = rng.normal(size=dim)
    a = np.round(lat.periodic_points(base, c, 1.7).positions, 9)
    b = np.round(lat.periodic_points(p2, c, 1.7).positions, 9)
    assert sorted(map(tuple, a)) == sorted(map(tuple, b))
    assert abs(abs(np.linalg.det(lat.reduce_basis(skew).basis)) - base.lattice.volume) < 1e-9 * base.lattice.volume


# -- enumerate_points -------------------------------------------------------------

def test_enumerate_square_radius_one(z2):
    pts = lat.enumerate_points(z2, [0, 0], 1.0)
    assert len(pts) == 5
    assert pts[0].cell_coeffs == (0, 0)


def test_enumerate_square_radius_one_and_half(z2):
    assert len(lat.enumerate_points(z2, [0, 0], 1.5)) == 9


def test_enumerate_hexagonal(hexagonal):
    pts = lat.enumerate_points(hexagonal, [0, 0], 1.01)
    assert len(pts) == 7
    assert len(brute_points(hexagonal, np.zeros(2), 1.01)) == 7


def test_enumerate_sorted_by_distance_then_index(z2):
    pts = lat.enumerate_points(z2, [0.5, 0.5], 1.0)
    d = [np.linalg.norm(np.array(p.position) - 0.5) for p in pts]
    assert d == sorted(d)
    assert [p.cell_coeffs for p in pts[:4]] == sorted(p.cell_coeffs for p in pts[:4])


def test_cloud_point_position_matches_coefficients():
    p = lat.periodic_set([[1, 0.2], [0.1, 0.9]], [[0.1, 0.2], [0.6, 0.7]])
    for cp in lat.enumerate_points(p, [0.3, -0.2], 2.0):
        expect = p.lattice.to_cartesian(p.motif[cp.motif_index] + np.array(cp.cell_coeffs))
        np.testing.assert_allclose(cp.position, expect, atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2, 3]))
def test_enumeration_matches_brute_force(seed, dim):
    rng = np.random.default_rng(seed)
    p = random_set(rng, dim, max_motif=3)
    c = rng.normal(size=dim)
    radius = float(rng.uniform(0.1, 2.0))
    got = sorted(tuple(np.round(cp.position, 9)) for cp in lat.enumerate_points(p, c, radius))
    assert got == brute_points(p, c, radius)


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 1.5), st.floats(0.0, 1.0))
def test_enumeration_monotone_in_radius(seed, r1, extra):
    rng = np.random.default_rng(seed)
    p = random_set(rng, 2)
    c = rng.normal(size=2)
    small = {tuple(np.round(x.position, 9)) for x in lat.enumerate_points(p, c, r1)}
    big = {tuple(np.round(x.position, 9)) for x in lat.enumerate_points(p, c, r1 + extra)}
    assert small <= big


def test_negative_radius_rejected(z2):
    with pytest.raises(ValueError):
        lat.enumerate_points(z2, [0, 0], -1.0)


# -- nearest_neighbors ------------------------------------------------------------

def test_nearest_two_on_edge(z2):
    nn = lat.nearest_neighbors(z2, [0.5, 0], 2)
    assert {p.cell_coeffs for p, _ in nn} == {(0, 0), (1, 0)}
    assert all(abs(d - 0.5) < 1e-12 for _, d in nn)


def test_nearest_one(z2):
    (p, d), = lat.nearest_neighbors(z2, [0.1, 0.1], 1)
    assert p.cell_coeffs == (0, 0)
    assert abs(d - np.sqrt(0.02)) < 1e-12


def test_nearest_four_corners(z2):
    nn = lat.nearest_neighbors(z2, [0.5, 0.5], 4)
    assert {p.cell_coeffs for p, _ in nn} == {(0, 0), (1, 0), (0, 1), (1, 1)}
    assert all(abs(d - np.sqrt(0.5)) < 1e-12 for _, d in nn)


def test_nearest_rejects_zero(z2):
    with pytest.raises(ValueError):
        lat.nearest_neighbors(z2, [0, 0], 0)


# -- radii -----------------------------------------------------------------------

@pytest.mark.parametrize("dim", [1, 2, 3])
def test_packing_radius_integer_lattice(dim):
    assert lat.packing_radius(lat.periodic_set(np.eye(dim), [[0] * dim])) == pytest.approx(0.5)


def test_packing_radius_two_points():
    p = lat.periodic_set(np.eye(2), [[0, 0], [0.5, 0]])
    assert lat.packing_radius(p) == pytest.approx(0.25)


def test_packing_radius_hexagonal(hexagonal):
    assert lat.packing_radius(hexagonal) == pytest.approx(0.5)


@pytest.mark.parametrize(
    "dim,expected", [(1, 0.5), (2, np.sqrt(2) / 2), (3, np.sqrt(3) / 2)]
)
def test_covering_radius_integer_lattice(dim, expected):
    tol = 1e-6
    got = lat.covering_radius(lat.periodic_set(np.eye(dim), [[0] * dim]), tol)
    assert expected - 1e-12 <= got <= expected + tol


def test_covering_radius_hexagonal(hexagonal):
    tol = 1e-6
    got = lat.covering_radius(hexagonal, tol)
    # independent check: dense grid maximum of the distance to the lattice
    g = (np.arange(400) + 0.5) / 400
    frac = np.stack(np.meshgrid(g, g, indexing="ij"), -1).reshape(-1, 2)
    x = hexagonal.lattice.to_cartesian(frac)
    pts = lat.periodic_points(hexagonal, [0.75, 0.43], 3.0).positions
    dense = np.min(np.linalg.norm(x[:, None] - pts[None], axis=2), axis=1).max()
    assert abs(dense - 1 / np.sqrt(3)) < 2e-3
    assert 1 / np.sqrt(3) - 1e-12 <= got <= 1 / np.sqrt(3) + tol


@given(st.integers(0, 2**32 - 1))
def test_covering_bounds_distances(seed):
    rng = np.random.default_rng(seed)
    p = random_set(rng, 2)
    rep = lat.radii(p)
    assert 0 < rep.packing <= rep.covering
    x = rng.normal(size=(20, 2)) * 3
    for xi in x:
        (_, d), = lat.nearest_neighbors(p, xi, 1)
        assert d <= rep.covering + rep.covering_tolerance
    pts = lat.periodic_points(p, x[0], 2.0).positions
    gaps = np.linalg.norm(pts[:, None] - pts[None], axis=2)
    assert gaps[np.triu_indices(len(pts), 1)].min() >= 2 * rep.packing - 1e-12


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
def test_radii_invariant_under_isometry(seed, dim):
    rng = np.random.default_rng(seed)
    p = random_set(rng, dim, max_motif=3)
    q = lat.isometric_copy(p, random_rotation(rng, dim), rng.normal(size=dim))
    assert lat.packing_radius(q) == pytest.approx(lat.packing_radius(p), rel=1e-9)
    tol = 1e-6
    assert abs(lat.covering_radius(q, tol) - lat.covering_radius(p, tol)) <= tol


def test_kth_covering_bound_dominates_true_value(z2):
    # the 4th nearest lattice point is farthest, at distance sqrt(0.5), from cell centres
    assert lat.kth_covering_bound(z2, 4) >= np.sqrt(0.5)
    assert lat.kth_covering_bound(z2, 1) >= lat.covering_radius(z2) - 1e-6


def test_torus_distance_wraps(z2):
    assert lat.torus_distance(z2.lattice, [0.05, 0], [0.95, 0]) == pytest.approx(0.1)


def test_supercell_has_same_points(z2):
    big = lat.supercell(z2, (2, 2))
    assert len(big) == 4
    a = sorted(tuple(np.round(x.position, 9)) for x in lat.enumerate_points(z2, [0.3, 0.1], 2.2))
    b = sorted(tuple(np.round(x.position, 9)) for x in lat.enumerate_points(big, [0.3, 0.1], 2.2))
    assert a == b
