from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fieldobs.errors import ConfigError, DimensionError, DomainError, NumericError
from fieldobs.grid import (
    apply_kernel,
    build_circle_grid,
    gaussian_kernel,
    geodesic_distance,
    hs_norm,
    l2_inner_product,
    l2_norm,
    operator_norm,
    outer_product,
    read_kernel_csv,
    write_kernel_csv,
)


def dft_operator_norm(w, grid):
    """Independent oracle for circulant kernels: largest DFT magnitude of the
    first row, times the quadrature weight. Valid because circulant matrices
    are normal with eigenvalues given by the DFT of their first row."""
    return float(np.max(np.abs(np.fft.fft(np.asarray(w)[0]))) * grid.spacing)


class TestBuildGrid:
    def test_four_points_from_spacing(self):
        g = build_circle_grid(spacing=math.tau / 4, length=math.tau)
        assert g.n_points == 4
        np.testing.assert_allclose(g.coords, [0.0, math.pi / 2, math.pi, 3 * math.pi / 2], atol=1e-15)

    def test_126_points_from_count(self):
        g = build_circle_grid(n_points=126, length=math.tau)
        assert g.spacing == pytest.approx(0.049866550056980846, abs=1e-18)
        assert g.coords[0] == 0.0
        # closure on the circle: the gap from the last node back to 0 is one spacing
        assert g.length - g.coords[-1] == pytest.approx(g.spacing, rel=1e-12)

    def test_non_divisible_spacing_rejected(self):
        with pytest.raises(ConfigError) as exc:
            build_circle_grid(spacing=0.05, length=1.02)
        assert "0.05" in str(exc.value) and "1.02" in str(exc.value)

    def test_single_point_rejected(self):
        with pytest.raises(ConfigError):
            build_circle_grid(spacing=1.0, length=1.0)

    def test_exactly_one_resolution_argument(self):
        with pytest.raises(ConfigError):
            build_circle_grid(spacing=0.5, length=2.0, n_points=4)
        with pytest.raises(ConfigError):
            build_circle_grid(length=2.0)

    def test_coords_are_read_only(self):
        g = build_circle_grid(n_points=8, length=1.0)
        with pytest.raises(ValueError):
            g.coords[0] = 5.0


class TestInnerProduct:
    def test_sin_cos_orthogonal(self, grid126):
        f = np.sin(grid126.coords)
        g = np.cos(grid126.coords)
        assert l2_inner_product(f, g, grid126) == pytest.approx(0.0, abs=1e-12)

    def test_sin_sin_is_pi(self, grid126):
        # discrete counterpart of the integral of sin^2 over a full period
        f = np.sin(grid126.coords)
        assert l2_inner_product(f, f, grid126) == pytest.approx(math.pi, abs=1e-12)

    def test_norm_of_constant_one(self, grid126):
        one = np.ones(grid126.n_points)
        assert l2_norm(one, grid126) == pytest.approx(math.sqrt(math.tau), rel=1e-14)

    def test_shape_mismatch(self, grid126):
        with pytest.raises(DimensionError):
            l2_inner_product(np.ones(5), np.ones(5), grid126)


class TestApplyKernel:
    def test_constant_kernel_integrates_to_length(self, grid126):
        c = 0.7
        w = np.full((126, 126), c)
        out = apply_kernel(w, np.ones(126), grid126)
        np.testing.assert_allclose(out, math.tau * c, rtol=1e-13)

    def test_matches_quadrature_loop(self, grid16, rng):
        w = rng.standard_normal((16, 16))
        z = rng.standard_normal(16)
        slow = np.array(
            [sum(w[i, j] * z[j] * grid16.spacing for j in range(16)) for i in range(16)]
        )
        np.testing.assert_allclose(apply_kernel(w, z, grid16), slow, rtol=1e-12)

    def test_outer_product_reproduces_inner_product(self, grid16, rng):
        v = rng.standard_normal(16)
        w = rng.standard_normal(16)
        z = rng.standard_normal(16)
        out = apply_kernel(outer_product(v, w), z, grid16)
        np.testing.assert_allclose(out, v * l2_inner_product(w, z, grid16), rtol=1e-12)

    def test_kernel_shape_mismatch(self, grid16):
        with pytest.raises(DimensionError):
            apply_kernel(np.eye(5), np.ones(16), grid16)


class TestHsNorm:
    def test_outer_product_factorization(self, grid126, rng):
        # identity: the rank-one kernel has HS norm equal to the product of field norms
        for _ in range(100):
            v = rng.standard_normal(126)
            w = rng.standard_normal(126)
            lhs = hs_norm(outer_product(v, w), grid126)
            rhs = l2_norm(v, grid126) * l2_norm(w, grid126)
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, rhs)

    def test_transpose_invariant(self, grid16, rng):
        w = rng.standard_normal((16, 16))
        assert hs_norm(w, grid16) == pytest.approx(hs_norm(w.T, grid16), rel=1e-15)

    def test_dominates_operator_norm(self, grid16, rng):
        for _ in range(20):
            w = rng.standard_normal((16, 16))
            assert operator_norm(w, grid16) <= hs_norm(w, grid16) * (1 + 1e-9)


class TestOperatorNorm:
    def test_identity_kernel(self, grid126):
        w = np.eye(126) / grid126.spacing
        assert operator_norm(w, grid126) == pytest.approx(1.0, rel=1e-8)

    def test_reference_coupling_kernel(self, grid126):
        w = gaussian_kernel(grid126, sigma=60.0, omega=-2.0)
        val = operator_norm(w, grid126)
        assert 0.0 < val < 2.0
        assert val == pytest.approx(0.45388644807451584, rel=1e-6)
        assert val == pytest.approx(dft_operator_norm(w, grid126), rel=1e-6)

    def test_circulant_against_dft_oracle(self):
        # includes a degenerate top pair (pure cosine row) and asymmetric circulants
        rng = np.random.default_rng(7)
        for n in (8, 17, 32, 64):
            grid = build_circle_grid(n_points=n, length=math.tau)
            rows = [
                np.cos(grid.coords),
                np.exp(-3.0 * np.minimum(grid.coords, math.tau - grid.coords) ** 2),
                rng.standard_normal(n),
            ]
            for row in rows:
                w = np.empty((n, n))
                for i in range(n):
                    w[i] = np.roll(row, i)
                assert operator_norm(w, grid) == pytest.approx(
                    dft_operator_norm(w, grid), rel=1e-6
                )

    def test_rank_one_exact(self, grid16, rng):
        v = rng.standard_normal(16)
        w = rng.standard_normal(16)
        expected = l2_norm(v, grid16) * l2_norm(w, grid16)
        assert operator_norm(outer_product(v, w), grid16) == pytest.approx(expected, rel=1e-8)

    def test_zero_kernel(self, grid16):
        assert operator_norm(np.zeros((16, 16)), grid16) == 0.0

    def test_reseed_when_start_vector_annihilated(self, grid16, rng):
        # rank-one kernel whose input direction is orthogonal to the all-ones probe
        v = rng.standard_normal(16)
        w = np.tile([1.0, -1.0], 8)
        expected = l2_norm(v, grid16) * l2_norm(w, grid16)
        assert operator_norm(outer_product(v, w), grid16) == pytest.approx(expected, rel=1e-8)

    def test_iteration_cap_reported(self, grid16):
        w = np.eye(16) + 1e-3 * np.ones((16, 16))
        with pytest.raises(NumericError) as exc:
            operator_norm(w, grid16, tol=1e-16, max_iter=3)
        assert "3 iterations" in str(exc.value)


class TestGeodesic:
    def test_wraps_around(self):
        assert geodesic_distance(0.0, 5.0, math.tau) == pytest.approx(math.tau - 5.0)
        assert geodesic_distance(5.0, 0.0, math.tau) == pytest.approx(math.tau - 5.0)

    def test_antipodal_is_half_length(self):
        assert geodesic_distance(0.25, 0.75, 1.0) == pytest.approx(0.5)

    @given(st.floats(0.0, 0.999), st.floats(0.0, 0.999))
    def test_symmetric_and_bounded(self, a, b):
        d = geodesic_distance(a, b, 1.0)
        assert d == geodesic_distance(b, a, 1.0)
        assert 0.0 <= d <= 0.5

    def test_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            geodesic_distance(-0.1, 0.0, 1.0)
        with pytest.raises(DomainError):
            geodesic_distance(0.0, 1.0, 1.0)


class TestGaussianKernel:
    def test_hs_norm_is_weight_magnitude(self, grid126):
        for omega in (0.1, 2.0, -2.0):
            w = gaussian_kernel(grid126, sigma=60.0, omega=omega)
            assert abs(hs_norm(w, grid126) - abs(omega)) <= 1e-12

    def test_symmetric_circulant(self, grid16):
        w = gaussian_kernel(grid16, sigma=3.0, omega=1.5)
        np.testing.assert_allclose(w, w.T, atol=1e-15)
        for i in range(16):
            np.testing.assert_allclose(w[i], np.roll(w[0], i), atol=1e-15)

    def test_sign_follows_omega(self, grid16):
        assert gaussian_kernel(grid16, sigma=3.0, omega=-1.0).max() < 0.0

    def test_bad_sigma(self, grid16):
        with pytest.raises(DomainError):
            gaussian_kernel(grid16, sigma=0.0, omega=1.0)


class TestKernelCsv:
    def test_round_trip_exact(self, grid16, rng, tmp_path):
        w = rng.standard_normal((16, 16))
        path = tmp_path / "kernel.csv"
        write_kernel_csv(w, grid16, path)
        coords, back = read_kernel_csv(path)
        np.testing.assert_array_equal(back, w)
        np.testing.assert_array_equal(coords, grid16.coords)

    def test_header_layout(self, grid16, tmp_path):
        path = tmp_path / "kernel.csv"
        write_kernel_csv(np.zeros((16, 16)), grid16, path)
        first = path.read_text().splitlines()[0]
        assert first.startswith(",0,")
        assert len(first.split(",")) == 17

    def test_malformed_file_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",0,1\n0,1\n")
        with pytest.raises(ConfigError):
            read_kernel_csv(path)
