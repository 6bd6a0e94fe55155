import math

import numpy as np
import pytest
from scipy import stats

from lorafix import (
    CollinearGatewaysError,
    GatewayTriple,
    Position,
    barycentric,
    canonical_triangle,
    circumcenter,
    contains,
    distance,
    sample_in_triangle,
    sample_points_in_triangle,
)


def test_distance_identity():
    p = Position(3.0, -7.0)
    assert distance(p, p) == 0.0


def test_distance_pythagorean():
    assert distance(Position(0.0, 0.0), Position(3.0, 4.0)) == 5.0


def test_distance_symmetry_random():
    rng = np.random.default_rng(11)
    for _ in range(200):
        a = Position(*rng.uniform(-1e4, 1e4, 2))
        b = Position(*rng.uniform(-1e4, 1e4, 2))
        assert distance(a, b) == distance(b, a)
        assert distance(a, b) >= 0.0


def test_distance_triangle_inequality():
    rng = np.random.default_rng(12)
    for _ in range(200):
        a, b, c = (Position(*rng.uniform(-1e4, 1e4, 2)) for _ in range(3))
        assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9


def test_position_rejects_non_finite():
    with pytest.raises(ValueError):
        Position(math.nan, 0.0)
    with pytest.raises(ValueError):
        Position(0.0, math.inf)


class TestCanonicalTriangle:
    def test_vertices(self):
        """Equilateral layout on a 10 km circle: apex down, two up."""
        tri = canonical_triangle(10000.0)
        g1, g2, g3 = tri.g1, tri.g2, tri.g3
        assert (g1.x, g1.y) == (0.0, -5000.0)
        assert g2.x == pytest.approx(4330.13, abs=0.01)
        assert g2.y == pytest.approx(2500.0, abs=1e-9)
        assert g3.x == pytest.approx(-4330.13, abs=0.01)
        assert g3.y == pytest.approx(2500.0, abs=1e-9)

    def test_side_length(self):
        tri = canonical_triangle(10000.0)
        side = distance(tri.g1, tri.g2)
        assert side == pytest.approx(8660.25, abs=0.01)
        assert distance(tri.g2, tri.g3) == pytest.approx(side, rel=1e-12)
        assert distance(tri.g3, tri.g1) == pytest.approx(side, rel=1e-12)

    def test_circumradius_scales_with_diameter(self):
        for d in (2.0, 10000.0, 12345.6):
            tri = canonical_triangle(d)
            for g in (tri.g1, tri.g2, tri.g3):
                assert math.hypot(g.x, g.y) == pytest.approx(d / 2, rel=1e-12)

    def test_invalid_diameter(self):
        with pytest.raises(ValueError):
            canonical_triangle(0.0)
        with pytest.raises(ValueError):
            canonical_triangle(-1.0)


def test_gateway_triple_rejects_collinear():
    with pytest.raises(CollinearGatewaysError):
        GatewayTriple(Position(0.0, 0.0), Position(1.0, 1.0), Position(2.0, 2.0))


def test_gateway_triple_as_array():
    tri = canonical_triangle(10000.0)
    arr = tri.as_array()
    assert arr.shape == (3, 2)
    assert arr[0, 1] == -5000.0


class TestCircumcenter:
    def test_canonical_is_origin(self):
        c = circumcenter(canonical_triangle(10000.0))
        assert math.hypot(c.x, c.y) < 1e-9 * 10000.0

    def test_right_triangle(self):
        # Circumcenter of a right triangle sits at the hypotenuse midpoint.
        tri = GatewayTriple(Position(0.0, 0.0), Position(2.0, 0.0), Position(0.0, 2.0))
        c = circumcenter(tri)
        assert c.x == pytest.approx(1.0, abs=1e-12)
        assert c.y == pytest.approx(1.0, abs=1e-12)

    def test_translation_equivariance(self):
        rng = np.random.default_rng(21)
        base = canonical_triangle(10000.0)
        c0 = circumcenter(base)
        for _ in range(20):
            dx, dy = rng.uniform(-1e5, 1e5, 2)
            shifted = GatewayTriple(
                Position(base.g1.x + dx, base.g1.y + dy),
                Position(base.g2.x + dx, base.g2.y + dy),
                Position(base.g3.x + dx, base.g3.y + dy),
            )
            c = circumcenter(shifted)
            assert c.x == pytest.approx(c0.x + dx, abs=1e-6)
            assert c.y == pytest.approx(c0.y + dy, abs=1e-6)

    def test_equidistance(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            pts = rng.uniform(-1e4, 1e4, (3, 2))
            try:
                tri = GatewayTriple(*(Position(*p) for p in pts))
            except CollinearGatewaysError:
                continue
            c = circumcenter(tri)
            r = [distance(c, g) for g in (tri.g1, tri.g2, tri.g3)]
            assert max(r) - min(r) < 1e-6 * max(r)


def test_barycentric_vertices_and_centroid():
    tri = canonical_triangle(10000.0)
    w = barycentric(tri, tri.g1)
    assert w[0] == pytest.approx(1.0, abs=1e-12)
    assert abs(w[1]) < 1e-12 and abs(w[2]) < 1e-12
    cx = (tri.g1.x + tri.g2.x + tri.g3.x) / 3
    cy = (tri.g1.y + tri.g2.y + tri.g3.y) / 3
    w = barycentric(tri, Position(cx, cy))
    assert w == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-12)


def test_contains():
    tri = canonical_triangle(10000.0)
    assert contains(tri, Position(0.0, 0.0))
    assert not contains(tri, Position(0.0, -6000.0))
    assert not contains(tri, Position(9000.0, 9000.0))
    # Vertex is boundary: included non-strictly, excluded strictly.
    assert contains(tri, tri.g1)
    assert not contains(tri, tri.g1, strict=True)


class TestSampling:
    def test_samples_strictly_interior(self):
        tri = canonical_triangle(10000.0)
        rng = np.random.default_rng(31)
        for _ in range(2000):
            p = sample_in_triangle(tri, rng)
            assert contains(tri, p, strict=True)

    def test_batch_matches_containment(self):
        tri = canonical_triangle(10000.0)
        pts = sample_points_in_triangle(tri, 5000, np.random.default_rng(32))
        assert pts.shape == (5000, 2)
        for x, y in pts[::97]:
            assert contains(tri, Position(x, y), strict=True)

    def test_deterministic_for_seed(self):
        tri = canonical_triangle(10000.0)
        a = sample_points_in_triangle(tri, 1000, np.random.default_rng(7))
        b = sample_points_in_triangle(tri, 1000, np.random.default_rng(7))
        assert np.array_equal(a, b)

    def test_mean_approaches_centroid(self):
        tri = canonical_triangle(10000.0)
        pts = sample_points_in_triangle(tri, 100000, np.random.default_rng(33))
        # Centroid of the canonical layout is the origin; the sample mean of
        # 1e5 uniform draws lands within a few standard errors of it.
        assert abs(pts[:, 0].mean()) < 30.0
        assert abs(pts[:, 1].mean()) < 30.0

    def test_uniformity_chi_squared(self):
        """Counts over the four midpoint sub-triangles are equidistributed."""
        tri = canonical_triangle(10000.0)
        n = 40000
        pts = sample_points_in_triangle(tri, n, np.random.default_rng(34))
        counts = np.zeros(4, dtype=int)
        for x, y in pts:
            w = barycentric(tri, Position(x, y))
            corner = [i for i in range(3) if w[i] > 0.5]
            counts[corner[0] if corner else 3] += 1
        chi2 = float(((counts - n / 4) ** 2 / (n / 4)).sum())
        assert chi2 < stats.chi2.ppf(0.999, df=3)
