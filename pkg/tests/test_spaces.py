"""Geometry and spectral bookkeeping for the three supported space families."""

import math

import numpy as np
import pytest

from decompound import (
    Space,
    SpaceKind,
    circle,
    conjugate_index,
    distance_to_origin,
    geodesic_step,
    make_index,
    parse_space,
    spectrum,
    sphere,
    spherical,
    torus,
    trapezoid_angles,
    weyl_census,
    zonal_quadrature,
    zonal_values,
)

TWO_PI = 2.0 * math.pi


def test_constructors_and_dimensions():
    c = circle()
    assert (c.dim, c.rank, c.ambient_dim) == (1, 1, 1)
    t = torus(3)
    assert (t.dim, t.rank, t.ambient_dim) == (3, 3, 3)
    s = sphere(2)
    assert (s.dim, s.rank, s.ambient_dim) == (2, 1, 3)
    assert s.origin().tolist() == [0.0, 0.0, 1.0]
    assert c.is_flat and t.is_flat and not s.is_flat


def test_invalid_spaces_rejected():
    with pytest.raises(ValueError):
        sphere(1)  # one-dimensional sphere is spelled circle()
    with pytest.raises(ValueError):
        torus(0)
    with pytest.raises(ValueError):
        Space(SpaceKind.SPHERE, 2, 2)  # spheres have rank 1


def test_parse_space_round_trip():
    for text in ("circle", "torus:2", "sphere:3"):
        assert parse_space(text).spec_string() == text
    assert parse_space(" SPHERE:2 ") == sphere(2)
    with pytest.raises(ValueError):
        parse_space("klein:2")
    with pytest.raises(ValueError):
        parse_space("torus:x")


def test_circle_spectrum_inclusive_cutoff():
    # n^2 <= 25 keeps n = 0, +-1, ..., +-5: the boundary level is included.
    idx = spectrum(circle(), 25.0)
    assert len(idx) == 11
    assert idx[0].label == (0,) and idx[0].casimir == 0.0
    assert all(i.multiplicity == 1 for i in idx)
    # sorted by (casimir, label)
    cas = [i.casimir for i in idx]
    assert cas == sorted(cas)


def test_torus_spectrum_order():
    labels = [i.label for i in spectrum(torus(2), 2.0)]
    assert labels == [
        (0, 0),
        (-1, 0),
        (0, -1),
        (0, 1),
        (1, 0),
        (-1, -1),
        (-1, 1),
        (1, -1),
        (1, 1),
    ]


def test_sphere_spectrum_casimir_and_multiplicity():
    idx = spectrum(sphere(2), 6.0)
    assert [i.label for i in idx] == [(0,), (1,), (2,)]
    assert [i.casimir for i in idx] == [0.0, 2.0, 6.0]  # l(l + d - 1)
    assert [i.multiplicity for i in idx] == [1, 3, 5]
    idx3 = spectrum(sphere(3), 8.0)
    assert [i.multiplicity for i in idx3] == [1, 4, 9]  # (l+1)^2 on S^3


def test_make_index_validates_labels():
    with pytest.raises(ValueError):
        make_index(circle(), (1, 2))  # wrong arity
    with pytest.raises(ValueError):
        make_index(sphere(2), (-1,))  # sphere degrees are nonnegative
    i = make_index(torus(2), (1, -2))
    assert i.casimir == 5.0 and i.multiplicity == 1


def test_conjugate_index():
    t = torus(2)
    assert conjugate_index(t, make_index(t, (1, -2))).label == (-1, 2)
    s = sphere(2)
    i = make_index(s, (4,))
    assert conjugate_index(s, i) == i  # real spherical functions are self-paired


def test_spherical_flat_is_complex_exponential():
    c = circle()
    val = spherical(c, make_index(c, (1,)), np.array([math.pi / 2]))
    assert val == pytest.approx(1j, abs=1e-12)
    t = torus(2)
    got = spherical(t, make_index(t, (1, -2)), np.array([0.3, 0.5]))
    assert got == pytest.approx(np.exp(1j * (0.3 - 1.0)), abs=1e-12)


def test_spherical_sphere_is_normalized_gegenbauer():
    s = sphere(2)
    pt = geodesic_step(s, s.origin(), 1.1, np.array([1.0, 0.0, 0.0]))
    got = spherical(s, make_index(s, (2,)), pt)
    # Legendre P_2(cos 1.1) for the 2-sphere
    assert got == pytest.approx(0.5 * (3 * math.cos(1.1) ** 2 - 1), abs=1e-12)
    assert spherical(s, make_index(s, (5,)), s.origin()) == pytest.approx(1.0)


def test_zonal_values_match_classical_polynomials():
    x = np.array([0.3])
    # lam = 1/2 gives Legendre, lam = 1 gives Chebyshev-U scaled to 1 at x=1
    legendre = zonal_values(0.5, 3, x)
    assert legendre[2][0] == pytest.approx((3 * 0.09 - 1) / 2)
    assert legendre[3][0] == pytest.approx(0.5 * (5 * 0.3**3 - 3 * 0.3))
    cheb = zonal_values(1.0, 2, x)
    assert cheb[2][0] == pytest.approx((4 * 0.09 - 1) / 3)


def test_zonal_values_bounded_by_one():
    rng = np.random.default_rng(7)
    x = rng.uniform(-1.0, 1.0, size=200)
    for lam in (0.5, 1.0, 1.5):
        vals = zonal_values(lam, 12, x)
        assert np.all(np.abs(vals) <= 1.0 + 1e-12)


def test_zonal_quadrature_orthogonality():
    s = sphere(2)
    nodes, weights = zonal_quadrature(s, 64)
    vals = zonal_values(0.5, 6, np.cos(nodes))
    assert float(np.sum(weights)) == pytest.approx(1.0, abs=1e-12)
    # normalized surface measure: <phi_l, phi_k> = delta_{lk} / multiplicity
    for ell in range(1, 7):
        assert float(np.sum(weights * vals[ell] ** 2)) == pytest.approx(
            1.0 / (2 * ell + 1), abs=1e-12
        )
        assert float(np.sum(weights * vals[ell] * vals[ell - 1])) == pytest.approx(
            0.0, abs=1e-12
        )


def test_trapezoid_angles_equispaced():
    th = trapezoid_angles(8)
    assert th.shape == (8,)
    assert np.allclose(np.diff(th), TWO_PI / 8)
    assert th[0] == 0.0


def test_geodesic_step_wraps_flat():
    got = geodesic_step(circle(), np.array([6.0]), 0.8, np.array([1.0]))
    assert float(got[0]) == pytest.approx(6.8 % TWO_PI)


def test_geodesic_step_sphere_preserves_norm():
    s = sphere(3)
    rng = np.random.default_rng(3)
    p = s.origin()
    for _ in range(50):
        v = rng.normal(size=4)
        v -= (v @ p) * p
        v /= np.linalg.norm(v)
        p = geodesic_step(s, p, rng.uniform(0, math.pi), v)
        assert np.linalg.norm(p) == pytest.approx(1.0, abs=1e-12)


def test_geodesic_step_moves_stated_distance():
    s = sphere(2)
    p = geodesic_step(s, s.origin(), 0.7, np.array([1.0, 0.0, 0.0]))
    assert np.allclose(p, [math.sin(0.7), 0.0, math.cos(0.7)], atol=1e-14)
    assert float(distance_to_origin(s, p[None, :])[0]) == pytest.approx(0.7)


def test_distance_to_origin_circle_takes_short_arc():
    d = distance_to_origin(circle(), np.array([[5.0]]))
    assert float(d[0]) == pytest.approx(TWO_PI - 5.0)


def test_weyl_census_small_counts():
    # casimir thresholds are inclusive and counts follow the standard spectra
    assert weyl_census(circle(), [100.0]) == [(21, 21)]
    assert weyl_census(sphere(2), [100.0]) == [(10, 100)]  # l(l+1) <= 100: l = 0..9
    assert weyl_census(sphere(3), [100.0]) == [(10, 385)]  # sum (l+1)^2, l = 0..9
    assert weyl_census(torus(2), [100.0]) == [(317, 317)]  # lattice points in a disk


def test_weyl_census_monotone_in_threshold():
    for sp in (circle(), torus(2), sphere(2)):
        counts = weyl_census(sp, [10.0, 100.0, 1000.0])
        sph = [c[0] for c in counts]
        wtd = [c[1] for c in counts]
        assert sph == sorted(sph) and wtd == sorted(wtd)
        assert all(w >= s for s, w in counts)
