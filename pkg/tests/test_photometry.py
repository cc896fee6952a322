import csv

import numpy as np
import pytest
from scipy.integrate import dblquad

from areawarp import photometry
from areawarp.grid import GridFrame, IntensityImage, total_intensity
from areawarp.mappings import map_identity, map_sin
from areawarp.warp import destination_frame


class TestSourceSynthesis:
    def test_single_interior_source_unit_flux(self):
        f = GridFrame.unit(200, 200)
        v = photometry.source_pixel_values(f, 0.47, 0.52, 0.01)
        assert v.sum() == pytest.approx(1.0, abs=1e-9)

    def test_field_of_k_sources(self):
        f = GridFrame.unit(256, 256)
        field = photometry.synthesize_sources(f, k=12, sigma=0.01, seed=3)
        assert len(field.centers) == 12
        assert total_intensity(field.image) == pytest.approx(12.0, abs=12e-9)

    def test_separation_and_margin_honored(self):
        f = GridFrame.unit(128, 128)
        field = photometry.synthesize_sources(f, k=15, sigma=0.01,
                                              min_sep=0.1, margin=0.06, seed=4)
        c = field.centers
        assert np.all((c >= 0.06) & (c <= 0.94))
        d2 = ((c[:, None, :] - c[None, :, :]) ** 2).sum(-1)
        d2[np.diag_indices(len(c))] = np.inf
        assert d2.min() >= 0.1 ** 2 - 1e-12

    def test_deterministic_for_seed(self):
        f = GridFrame.unit(64, 64)
        a = photometry.synthesize_sources(f, k=5, sigma=0.02, seed=9)
        b = photometry.synthesize_sources(f, k=5, sigma=0.02, seed=9)
        assert np.array_equal(a.centers, b.centers)
        assert np.array_equal(a.image.values, b.image.values)

    def test_placement_failure_raises(self):
        f = GridFrame.unit(32, 32)
        with pytest.raises(RuntimeError):
            photometry.synthesize_sources(f, k=100, sigma=0.01,
                                          min_sep=0.5, seed=1)

    def test_pixel_values_match_quadrature_oracle(self):
        # independent check: integrate the implied Gaussian density over
        # pixel boxes; source center aligned with a pixel edge
        f = GridFrame.unit(400, 400)
        sigma = 0.01
        cx, cy = 0.5, 0.25  # both are exact pixel edges of a 400-grid
        values = photometry.source_pixel_values(f, cx, cy, sigma)

        def density(y, x):
            return np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / sigma ** 2) \
                / (np.pi * sigma ** 2)

        for (i, j) in [(200, 100), (199, 99), (202, 100), (200, 97), (205, 104)]:
            x0, x1 = f.x_edges[i], f.x_edges[i + 1]
            y0, y1 = f.y_edges[j], f.y_edges[j + 1]
            ref, err = dblquad(density, x0, x1, y0, y1,
                               epsabs=1e-13, epsrel=1e-13)
            assert values[j, i] == pytest.approx(ref, abs=1e-10)
            assert err < 1e-11


class TestApertureSum:
    def test_whole_raster_radius(self):
        f = GridFrame.unit(32, 32)
        rng = np.random.default_rng(5)
        img = IntensityImage(f, rng.uniform(0, 1, f.shape))
        assert photometry.aperture_sum(img, (0.5, 0.5), 10.0) \
            == pytest.approx(total_intensity(img), rel=1e-12)

    def test_single_pixel_radius(self):
        f = GridFrame.unit(16, 16)
        v = np.zeros(f.shape)
        v[7, 4] = 3.25
        img = IntensityImage(f, v)
        center = (f.x_centers[4], f.y_centers[7])
        assert photometry.aperture_sum(img, center, 0.4 * f.dx) == 3.25

    def test_four_sigma_captures_unit_flux(self):
        f = GridFrame.unit(400, 400)
        field = photometry.synthesize_sources(f, k=1, sigma=0.01, seed=6)
        s = photometry.aperture_sum(field.image, field.centers[0], 0.04)
        assert s >= 0.9999


class TestEstimators:
    def test_identity_map_makes_all_methods_agree(self):
        f = GridFrame.unit(128, 128)
        field = photometry.synthesize_sources(f, k=6, sigma=0.02, seed=7)
        results = photometry.run_estimators(field, map_identity(), f)
        ref = {r.method: r.s_tilde for r in results}
        for method in photometry.METHODS[1:]:
            np.testing.assert_allclose(ref[method], ref["Orig"],
                                       rtol=1e-9, atol=1e-9)

    def test_epsilon_definition(self):
        r = photometry.EstimatorResult("X", np.array([1.1, 0.9, 1.0]),
                                       np.zeros(3, bool))
        assert r.epsilon == pytest.approx(np.sqrt(np.mean([0.01, 0.01, 0.0])))

    def test_gradient_ranking_values(self):
        f = GridFrame.unit(64, 64)
        field = photometry.SourceField(
            centers=np.array([[0.5, 0.5], [0.25, 0.5]]), sigma=0.01,
            image=IntensityImage(f, np.zeros(f.shape)))
        grads = photometry.jacobian_gradient_ranking(field, map_sin())
        assert grads[0] == pytest.approx(0.0, abs=1e-12)
        assert grads[1] == pytest.approx(np.pi ** 3 * np.sqrt(2) / 8, rel=1e-12)

    def test_csv_layout(self, tmp_path):
        f = GridFrame.unit(64, 64)
        field = photometry.synthesize_sources(f, k=3, sigma=0.02, seed=8)
        m = map_sin()
        dst = destination_frame(m, f, 16, 16)
        results = photometry.run_estimators(field, m, dst)
        path = tmp_path / "phot.csv"
        photometry.write_photometry_csv(path, field, m, results)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["k", "method", "x", "y", "X", "Y", "grad_J", "s_tilde"]
        body = rows[1:]
        assert len(body) == 6 * 3 + 6  # per-source rows plus summary rows
        eps_rows = [r for r in body if r[0] == "epsilon"]
        assert {r[1] for r in eps_rows} == set(photometry.METHODS)

    def test_sigma_validation(self):
        f = GridFrame.unit(32, 32)
        with pytest.raises(ValueError):
            photometry.synthesize_sources(f, k=1, sigma=0.0)
