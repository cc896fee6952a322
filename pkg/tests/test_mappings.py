import numpy as np
import pytest

from areawarp.errors import MapSpecError, SingularMapError
from areawarp.formats import write_awf
from areawarp.grid import GridFrame, IntensityImage
from areawarp.mappings import (map_arcsin, map_from_grid, map_identity,
                               map_perspective, map_sin, map_wavy,
                               numeric_jacobian, numeric_jacobian_gradient,
                               parse_map_spec)

BUILTINS = [map_identity, map_wavy, map_perspective, map_sin]


def interior_points(n, seed=0, lo=0.05, hi=0.95):
    rng = np.random.default_rng(seed)
    return rng.uniform(lo, hi, n), rng.uniform(lo, hi, n)


class TestWavy:
    def test_fixed_corners(self):
        m = map_wavy()
        for c in [(0.0, 0.0), (1.0, 1.0)]:
            X, Y = m.forward(*c)
            assert (X, Y) == pytest.approx(c, abs=1e-15)

    def test_frozen_value(self):
        X, Y = map_wavy().forward(0.5, 0.25)
        assert X == pytest.approx(0.65, abs=1e-15)
        assert Y == pytest.approx(0.10, abs=1e-15)

    def test_jacobian_range(self):
        g = (np.arange(100) + 0.5) / 100
        gx, gy = np.meshgrid(g, g)
        J = map_wavy().jacobian(gx, gy)
        assert J.min() > 0.45 and J.max() < 1.65


class TestPerspective:
    def test_default_parameters(self):
        p = map_perspective()
        assert p.params == {"a": 0.25, "b": -0.1, "c": 0.5, "d": 0.0}

    def test_rederived_inverse_composition(self):
        p = map_perspective()
        x, y = interior_points(1000, seed=5, lo=0.0, hi=1.0)
        X, Y = p.forward(x, y)
        xi, yi = p.inverse(X, Y)
        assert np.max(np.abs(xi - x)) <= 1e-12
        assert np.max(np.abs(yi - y)) <= 1e-12

    def test_jacobian_range_negative(self):
        y = np.linspace(1e-3, 1 - 1e-3, 500)
        J = map_perspective().jacobian(np.full_like(y, 0.5), y)
        assert np.all(J < 0)
        assert J.min() > -5.0 and J.max() < -5.0 / 1331.0

    def test_singular_at_b(self):
        with pytest.raises(SingularMapError):
            map_perspective().forward(0.5, -0.1)


class TestSinArcsin:
    def test_center_fixed_point_and_jacobian(self):
        m = map_sin()
        X, Y = m.forward(0.5, 0.5)
        assert (X, Y) == pytest.approx((0.5, 0.5), abs=1e-15)
        assert m.jacobian(0.5, 0.5) == pytest.approx(np.pi ** 2 / 4, rel=1e-15)

    def test_corners_fixed(self):
        m = map_sin()
        for c in [(0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (1.0, 0.0)]:
            assert m.forward(*c) == pytest.approx(c, abs=1e-15)

    def test_inverse_identity(self):
        m = map_sin()
        x, y = interior_points(1000, seed=6, lo=0.0, hi=1.0)
        X, Y = m.forward(x, y)
        xi, yi = m.inverse(X, Y)
        assert np.max(np.hypot(xi - x, yi - y)) <= 1e-12

    def test_arcsin_is_packaged_inverse(self):
        a = map_arcsin()
        m = map_sin()
        x, y = interior_points(200, seed=7)
        X, Y = m.forward(x, y)
        xa, ya = a.forward(X, Y)
        assert np.max(np.hypot(xa - x, ya - y)) <= 1e-12

    def test_inverse_jacobian_singular_on_edges(self):
        with pytest.raises(SingularMapError):
            map_sin().inverse_jacobian(0.0, 0.5)
        with pytest.raises(SingularMapError):
            map_arcsin().jacobian(0.5, 1.0)

    def test_inverse_jacobian_is_reciprocal(self):
        m = map_sin()
        x, y = interior_points(50, seed=8)
        X, Y = m.forward(x, y)
        np.testing.assert_allclose(m.inverse_jacobian(X, Y),
                                   1.0 / m.jacobian(x, y), rtol=1e-12)


class TestNumericJacobian:
    def test_identity_and_linear(self):
        assert numeric_jacobian(map_identity(), 0.5, 0.5) == pytest.approx(1.0)
        from areawarp.mappings import CoordinateMap
        lin = CoordinateMap(forward=lambda x, y: (2.0 * np.asarray(x, float),
                                                  3.0 * np.asarray(y, float)))
        assert numeric_jacobian(lin, 0.4, 0.6) == pytest.approx(6.0, abs=1e-9)

    def test_matches_analytic_for_builtins(self):
        x, y = interior_points(1000, seed=9)
        for factory in BUILTINS:
            m = factory()
            if m.jacobian is None:
                continue
            num = np.array([numeric_jacobian(m, float(a), float(b), 1e-5)
                            for a, b in zip(x[:50], y[:50])])
            ana = np.array([float(m.jacobian(float(a), float(b)))
                            for a, b in zip(x[:50], y[:50])])
            np.testing.assert_allclose(num, ana, atol=1e-7)

    def test_sin_frozen_point(self):
        m = map_sin()
        assert abs(numeric_jacobian(m, 0.3, 0.7, 1e-5)
                   - float(m.jacobian(0.3, 0.7))) <= 1e-8

    def test_stencil_domain_guard(self):
        with pytest.raises(ValueError):
            numeric_jacobian(map_sin(), 0.0, 0.5)

    def test_gradient_matches_analytic(self):
        m = map_sin()
        for (px, py) in [(0.3, 0.7), (0.25, 0.5), (0.6, 0.4)]:
            gx, gy = numeric_jacobian_gradient(m, px, py, 1e-5)
            ax, ay = m.jacobian_gradient(px, py)
            assert (gx, gy) == pytest.approx((float(ax), float(ay)), abs=1e-6)


class TestGridMap:
    def test_identity_nodes(self):
        f = GridFrame.unit(8, 8)
        gx, gy = np.meshgrid(f.x_edges, f.y_edges)
        m = map_from_grid(gx, gy, f)
        x, y = interior_points(100, seed=10)
        X, Y = m.forward(x, y)
        np.testing.assert_allclose(np.column_stack((X, Y)),
                                   np.column_stack((x, y)), atol=1e-15)

    def test_translation_nodes(self):
        f = GridFrame.unit(4, 4)
        gx, gy = np.meshgrid(f.x_edges, f.y_edges)
        m = map_from_grid(gx + 2.5, gy - 1.0, f)
        X, Y = m.forward(0.3, 0.8)
        assert (float(X), float(Y)) == pytest.approx((2.8, -0.2), abs=1e-15)

    def test_sampled_sin_exact_at_corners_near_at_centers(self):
        f = GridFrame.unit(32, 32)
        gx, gy = np.meshgrid(f.x_edges, f.y_edges)
        NX, NY = map_sin().forward(gx, gy)
        m = map_from_grid(NX, NY, f)
        Xc, Yc = m.forward(gx, gy)
        assert np.array_equal(Xc, NX) and np.array_equal(Yc, NY)
        mx, my = np.meshgrid(f.x_centers, f.y_centers)
        Xm, Ym = m.forward(mx, my)
        Xa, Ya = map_sin().forward(mx, my)
        assert np.max(np.hypot(Xm - Xa, Ym - Ya)) <= 2.0 * f.dx ** 2 * 10

    def test_size_mismatch(self):
        f = GridFrame.unit(4, 4)
        with pytest.raises(ValueError):
            map_from_grid(np.zeros((4, 4)), np.zeros((4, 4)), f)


class TestMapSpecGrammar:
    def test_builtins(self):
        assert parse_map_spec("wavy()").name == "wavy"
        assert parse_map_spec("sin").name == "sin"
        assert parse_map_spec(" identity() ").name == "identity"
        p = parse_map_spec("perspective(a=0.3, b=-0.2)")
        assert p.params["a"] == 0.3 and p.params["b"] == -0.2
        assert p.params["c"] == 0.5  # default preserved

    def test_grid_spec(self, tmp_path):
        f = GridFrame.unit(4, 4)
        gx, gy = np.meshgrid(f.x_edges, f.y_edges)
        write_awf(IntensityImage(GridFrame.unit(5, 5), gx), tmp_path / "x.awf")
        write_awf(IntensityImage(GridFrame.unit(5, 5), gy), tmp_path / "y.awf")
        m = parse_map_spec(f"grid(x={tmp_path}/x.awf,y={tmp_path}/y.awf)")
        X, Y = m.forward(0.3, 0.6)
        assert (float(X), float(Y)) == pytest.approx((0.3, 0.6), abs=1e-12)

    def test_errors(self):
        for bad in ["nosuchmap()", "perspective(a=x)", "perspective(0.25)",
                    "wavy(q=1)", "grid(x=only)", ""]:
            with pytest.raises(MapSpecError):
                parse_map_spec(bad)
