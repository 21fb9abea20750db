import math

import numpy as np
import pytest

from orthospec import convex, spectrum


@pytest.fixture(scope="module")
def points2_60():
    p = convex.point((0.0, 0.0))
    return spectrum.enumerate(p, p, T=60.0)


def test_point_lattice_lengths(points2_60):
    spec = points2_60
    want = 2.0 * math.pi * np.linalg.norm(spec.xi, axis=1)
    assert np.max(np.abs(spec.lengths - want)) < 1e-10


def test_four_fold_multiplicity(points2_60):
    spec = points2_60
    first = 2.0 * math.pi
    hits = np.sum(np.abs(spec.lengths - first) < 1e-9)
    assert hits == 4
    hits_sqrt2 = np.sum(np.abs(spec.lengths - first * math.sqrt(2.0)) < 1e-9)
    assert hits_sqrt2 == 4


def test_counting_density_ratio(points2_60):
    n = spectrum.counting(points2_60, 60.0)
    assert abs(n * 4.0 * math.pi / 60.0**2 - 1.0) < 0.05


def test_counting_monotone(points2_60):
    counts = [spectrum.counting(points2_60, T) for T in (15.0, 30.0, 45.0, 60.0)]
    assert counts == sorted(counts)
    assert counts[0] > 0


def test_lengths_sorted_and_in_window(points2_60):
    spec = points2_60
    assert np.all(np.diff(spec.lengths) >= 0)
    assert spec.lengths[0] > spec.T0
    assert spec.lengths[-1] <= spec.T + 1e-9


def test_newton_closing_relation():
    K1 = convex.ellipsoid((0.3, 0.1), (1.3, 0.7))
    K2 = convex.ball((-0.2, 0.4), 0.5)
    spec = spectrum.enumerate(K1, K2, T=40.0)
    L = spectrum.difference_body(K1, K2, "+-")
    resid = 2.0 * math.pi * spec.xi - spec.lengths[:, None] * spec.theta - L.grad(spec.theta)
    assert np.max(np.linalg.norm(resid, axis=1)) < 1e-9


def test_feet_close_up_on_the_cover(points2_60):
    # start at the first body, land on the lattice translate of the second
    spec = points2_60
    assert np.max(np.abs(spec.foot1)) < 1e-12
    assert np.max(np.abs(spec.foot2 - 2.0 * math.pi * spec.xi)) < 1e-9
    assert np.max(np.abs(spec.foot2 - spec.foot1 - spec.lengths[:, None] * spec.theta)) < 1e-9


def test_ball_pair_closed_form_lengths():
    b1 = convex.ball((0.0, 0.0, 0.0), 0.35)
    b2 = convex.ball((0.0, 0.0, 0.0), 0.35)
    spec = spectrum.enumerate(b1, b2, T=70.0)
    axis = np.all(spec.xi[:, 1:] == 0, axis=1) & (spec.xi[:, 0] > 0)
    ks = spec.xi[axis, 0]
    want = 2.0 * math.pi * ks - 0.7
    assert np.max(np.abs(spec.lengths[axis] - want)) < 1e-10


def test_translation_invariance():
    e = convex.ellipsoid((0.0, 0.0), (1.3, 0.7))
    p = convex.point((0.4, -0.9))
    v = np.array([1.7, -0.3])
    e2 = convex.ellipsoid(v, (1.3, 0.7))
    p2 = convex.point(v + [0.4, -0.9])
    a = spectrum.enumerate(e, p, T=30.0)
    b = spectrum.enumerate(e2, p2, T=30.0)
    assert np.allclose(a.lengths, b.lengths, atol=1e-9)
    assert np.array_equal(a.xi, b.xi)


def test_quarter_turn_invariance():
    # a lattice-preserving rotation permutes the spectrum without changing it
    R = np.array([[0.0, -1.0], [1.0, 0.0]])
    a = spectrum.enumerate(convex.ellipsoid((0.0, 0.0), (1.3, 0.7)),
                           convex.point((0.0, 0.0)), T=30.0)
    b = spectrum.enumerate(convex.ellipsoid((0.0, 0.0), (1.3, 0.7), rotation=R),
                           convex.point((0.0, 0.0)), T=30.0)
    assert a.lengths.size == b.lengths.size
    assert np.max(np.abs(np.sort(a.lengths) - np.sort(b.lengths))) < 1e-9


def test_worker_determinism():
    p = convex.point((0.2, 0.1, -0.4))
    q = convex.point((0.0, 0.0, 0.0))
    a = spectrum.enumerate(p, q, T=25.0, workers=1)
    b = spectrum.enumerate(p, q, T=25.0, workers=3)
    assert np.array_equal(a.xi, b.xi)
    assert np.array_equal(a.lengths, b.lengths)
    assert np.array_equal(a.theta, b.theta)


def test_orientation_reflection():
    # swapping the reversed pair mirrors the spectrum: lengths agree
    K1 = convex.ellipsoid((0.3, 0.0), (1.1, 0.6))
    K2 = convex.ball((0.0, -0.2), 0.4)
    fwd = spectrum.enumerate(K1, K2, orient="+-", T=30.0)
    bwd = spectrum.enumerate(K2, K1, orient="+-", T=30.0)
    assert np.max(np.abs(fwd.lengths - bwd.lengths)) < 1e-9


def test_enumerate_window_validation():
    p = convex.point((0.0, 0.0))
    with pytest.raises(ValueError):
        spectrum.enumerate(p, p, T0=10.0, T=5.0)


def test_twist_form_requires_hermitian_modes():
    with pytest.raises(ValueError):
        spectrum.TwistForm((0.0, 0.0), {(1, 0): 1.0 + 0.5j})
    tf = spectrum.TwistForm((0.0, 0.0), {(1, 0): 1.0 + 0.5j, (-1, 0): 1.0 - 0.5j})
    x = np.array([[0.3, 0.4], [0.0, 0.0]])
    assert np.max(np.abs(tf.f_eval(x).imag)) < 1e-14


def test_trivial_twist_weighted_count_equals_count(points2_60):
    beta = spectrum.TwistForm((0.0, 0.0))
    n = spectrum.counting(points2_60, 50.0)
    w = spectrum.counting_weighted(points2_60, beta, 50.0)
    assert w == pytest.approx(n, abs=1e-12)


def test_twisted_count_is_suppressed(points2_60):
    beta = spectrum.TwistForm((math.sqrt(2.0) - 1.0, 1.0 / math.sqrt(3.0)))
    n = spectrum.counting(points2_60, 60.0)
    w = spectrum.counting_weighted(points2_60, beta, 60.0)
    assert abs(w) < 0.25 * n


def test_density_coeffs_ball_pair():
    b1 = convex.ball((0.0, 0.0, 0.0), 0.3)
    b2 = convex.ball((0.0, 0.0, 0.0), 0.2)
    rho = spectrum.density_coeffs(b1, b2)
    r = 0.5
    want = 4.0 * math.pi * np.array([r**2, 2.0 * r, 1.0]) / (2.0 * math.pi) ** 3
    assert np.max(np.abs(rho - want)) < 1e-10


def test_steiner_density_points():
    p = convex.point((0.0, 0.0, 0.0))
    # rho'(t) = t^2 |S^2| / (2 pi)^3
    t = 7.0
    want = t**2 * 4.0 * math.pi / (2.0 * math.pi) ** 3
    assert abs(spectrum.steiner_density(p, p, "+-", t) - want) < 1e-12


def test_to_csv_round_trip(tmp_path, points2_60):
    csv_path = tmp_path / "spec.csv"
    meta_path = tmp_path / "spec.meta.json"
    spectrum.to_csv(points2_60, csv_path, meta_path)
    rows = csv_path.read_text().strip().splitlines()
    assert rows[0].split(",")[:2] == ["xi_1", "xi_2"]
    assert len(rows) == 1 + len(points2_60)
    first = rows[1].split(",")
    assert float(first[4]) == pytest.approx(2.0 * math.pi, abs=1e-12)
