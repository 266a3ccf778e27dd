import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from neelwall.errors import FarFieldViolation, GridMismatch
from neelwall.grid import (
    Field,
    Grid,
    ap_derivative,
    ap_mirror,
    ap_second_derivative,
    ap_translate,
    b_form,
    bessel_inverse,
    derivative,
    derivative_form,
    far_field_ok,
    gaussian_bump,
    half_laplacian,
    hilbert_transform,
    inner_h1,
    inner_l2,
    norm_h1,
    norm_l2,
    one_plus_half_laplacian,
    random_band_limited,
    random_compact,
    second_derivative,
    spectral_translate,
)

import oracles


@pytest.fixture(scope="module")
def grid():
    return Grid(256, 20.0)


def mode(grid, j, kind="cos"):
    k = j * np.pi / grid.half_width
    fn = np.cos if kind == "cos" else np.sin
    return k, Field(grid, fn(k * grid.nodes))


class TestGridAndField:
    def test_grid_invariants(self, grid):
        assert grid.h * grid.n == pytest.approx(2 * grid.half_width, abs=0)
        assert np.all(np.diff(grid.nodes) > 0)
        assert np.allclose(np.diff(grid.nodes), grid.h)

    def test_grid_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            Grid(300, 20.0)
        with pytest.raises(ValueError):
            Grid(256, -1.0)
        with pytest.raises(ValueError):
            Grid(256, 20.0, pad_factor=0)

    def test_field_requires_finite_values(self, grid):
        with pytest.raises(ValueError):
            Field(grid, np.full(grid.n, np.nan))

    def test_field_is_immutable(self, grid):
        f = grid.zeros()
        with pytest.raises(ValueError):
            f.values[0] = 1.0

    def test_grid_mismatch(self, grid):
        other = Grid(256, 25.0)
        with pytest.raises(GridMismatch):
            inner_l2(grid.zeros(), other.zeros())


class TestDerivative:
    def test_sine_mode_exact(self, grid):
        k, f = mode(grid, 5, "sin")
        expected = k * np.cos(k * grid.nodes)
        assert np.abs(derivative(f).values - expected).max() <= 1e-10

    def test_constant_maps_to_zero(self, grid):
        f = Field(grid, np.full(grid.n, 3.7))
        assert np.abs(derivative(f).values).max() <= 1e-12

    def test_gaussian_matches_analytic(self):
        g = Grid(1024, 40.0)
        x = g.nodes
        f = Field(g, np.exp(-(x**2)))
        expected = -2 * x * np.exp(-(x**2))
        assert np.abs(derivative(f).values - expected).max() <= 1e-10

    def test_against_classical_matrix(self, grid, rng):
        D = oracles.trefethen_diff_matrix(grid)
        f = random_compact(grid, rng)
        assert np.abs(derivative(f).values - D @ f.values).max() <= 1e-10

    def test_second_derivative_on_modes(self, grid):
        k, f = mode(grid, 4)
        expected = -(k**2) * f.values
        assert np.abs(second_derivative(f).values - expected).max() <= 1e-9


class TestHalfLaplacian:
    def test_cosine_eigenfunction(self, grid):
        k, f = mode(grid, 3)
        with pytest.warns(FarFieldViolation):
            out = half_laplacian(f)
        assert np.abs(out.values - k * f.values).max() <= 1e-10

    def test_zero(self, grid):
        assert np.abs(half_laplacian(grid.zeros()).values).max() == 0.0

    def test_equals_hilbert_of_derivative_on_sech(self):
        g = Grid(1024, 40.0)
        f = Field(g, 1.0 / np.cosh(g.nodes))
        composed = hilbert_transform(derivative(f))
        assert np.abs(half_laplacian(f).values - composed.values).max() <= 1e-10

    def test_against_kernel_matrix(self, grid, rng):
        f = random_compact(grid, rng)
        M = oracles.half_laplacian_matrix(grid)
        assert np.abs(half_laplacian(f).values - M @ f.values).max() <= 1e-9


class TestOnePlusHalfLaplacian:
    def test_cosine(self, grid):
        k, f = mode(grid, 7)
        with pytest.warns(FarFieldViolation):
            out = one_plus_half_laplacian(f)
        assert np.abs(out.values - (1 + k) * f.values).max() <= 1e-10

    def test_zero(self, grid):
        assert np.abs(one_plus_half_laplacian(grid.zeros()).values).max() == 0.0

    def test_is_identity_plus_half_laplacian(self, grid, rng):
        f = random_band_limited(grid, rng, kmax=30)
        with pytest.warns(FarFieldViolation):
            direct = one_plus_half_laplacian(f).values
            split = f.values + half_laplacian(f).values
        assert np.abs(direct - split).max() <= 1e-12 * max(1.0, np.abs(direct).max())


class TestBesselInverse:
    def test_cosine(self, grid):
        k, f = mode(grid, 6)
        out = bessel_inverse(f)
        assert np.abs(out.values - f.values / (1 + k**2)).max() <= 1e-12

    def test_zero(self, grid):
        assert np.abs(bessel_inverse(grid.zeros()).values).max() == 0.0

    def test_gaussian_round_trip(self, grid):
        f = gaussian_bump(grid, width=1.5)
        g = bessel_inverse(f)
        recovered = Field(grid, g.values - second_derivative(g).values)
        assert norm_l2(recovered - f) <= 1e-10

    def test_against_dense_solve(self, grid, rng):
        f = random_compact(grid, rng)
        dense = oracles.bessel_solve_oracle(f)
        assert norm_l2(bessel_inverse(f) - dense) <= 1e-9


class TestHilbert:
    def test_cosine_to_sine(self, grid):
        k, f = mode(grid, 4)
        expected = np.sin(k * grid.nodes)
        assert np.abs(hilbert_transform(f).values - expected).max() <= 1e-10

    def test_zero(self, grid):
        assert np.abs(hilbert_transform(grid.zeros()).values).max() == 0.0

    def test_isometry_on_mean_zero(self, grid, rng):
        f = random_band_limited(grid, rng, kmax=40, mean_zero=True)
        assert abs(norm_l2(hilbert_transform(f)) - norm_l2(f)) <= 1e-10 * norm_l2(f)

    def test_against_cot_kernel(self, grid, rng):
        f = random_compact(grid, rng)
        H = oracles.hilbert_kernel_matrix(grid)
        assert np.abs(hilbert_transform(f).values - H @ f.values).max() <= 1e-10


class TestInnerProducts:
    def test_l2_positivity(self, grid, rng):
        f = random_compact(grid, rng)
        assert inner_l2(f, f) > 0
        assert inner_l2(grid.zeros(), grid.zeros()) == 0.0

    def test_h1_splits(self, grid):
        f = gaussian_bump(grid, width=2.0)
        split = inner_l2(f, f) + inner_l2(derivative(f), derivative(f))
        assert inner_h1(f, f) == pytest.approx(split, rel=1e-12)

    def test_mode_orthogonality(self, grid):
        _, f = mode(grid, 3, "sin")
        _, g = mode(grid, 3, "cos")
        assert abs(inner_l2(f, g)) <= 1e-10

    def test_parseval(self, grid, rng):
        f = random_compact(grid, rng)
        g = random_compact(grid, rng)
        fh = np.fft.fft(f.values)
        gh = np.fft.fft(g.values)
        freq_sum = grid.h / grid.n * np.real(np.sum(fh * np.conj(gh)))
        assert inner_l2(f, g) == pytest.approx(freq_sum, rel=1e-10, abs=1e-12)


class TestBForm:
    def test_lower_bound(self, grid, rng):
        f = random_compact(grid, rng)
        assert b_form(f, f) >= inner_l2(f, f) - 1e-12

    def test_symmetry(self, grid, rng):
        f = random_compact(grid, rng)
        g = random_compact(grid, rng)
        scale = max(abs(b_form(f, f)), abs(b_form(g, g)))
        assert abs(b_form(f, g) - b_form(g, f)) <= 1e-12 * scale

    def test_upper_bound(self, grid, rng):
        for _ in range(10):
            f = random_band_limited(grid, rng, kmax=50)
            assert b_form(f, f) <= 1.5 * inner_h1(f, f) + 1e-10

    def test_matches_operator_pairing(self, grid, rng):
        f = random_compact(grid, rng)
        g = random_compact(grid, rng)
        pairing = inner_l2(one_plus_half_laplacian(f), g)
        assert b_form(f, g) == pytest.approx(pairing, rel=1e-12, abs=1e-12)

    def test_against_kernel_oracle(self, grid, rng):
        f = random_compact(grid, rng)
        g = random_compact(grid, rng)
        assert b_form(f, g) == pytest.approx(oracles.b_form_oracle(f, g), rel=1e-10, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(coeffs=st.lists(st.floats(-2, 2), min_size=4, max_size=8),
       scale=st.floats(0.1, 3.0))
def test_b_form_bilinear_under_scaling(coeffs, scale):
    grid = Grid(128, 10.0)
    x = grid.nodes
    vals = sum(c * np.cos((j + 1) * np.pi * x / grid.half_width) for j, c in enumerate(coeffs))
    f = Field(grid, vals)
    assert b_form(scale * f, f) == pytest.approx(scale * b_form(f, f), rel=1e-10, abs=1e-10)
    assert b_form(f, f) >= -1e-12


class TestOperatorAlgebra:
    def test_multipliers_commute_on_band_limited(self, grid, rng):
        f = random_band_limited(grid, rng, kmax=40)
        with pytest.warns(FarFieldViolation):
            a = hilbert_transform(half_laplacian(f))
            b = half_laplacian(hilbert_transform(f))
        assert np.abs(a.values - b.values).max() <= 1e-10
        c = bessel_inverse(derivative(f))
        d = derivative(bessel_inverse(f))
        assert np.abs(c.values - d.values).max() <= 1e-10

    def test_half_laplacian_is_hilbert_derivative(self, rng):
        g = Grid(1024, 40.0)
        for _ in range(5):
            f = random_compact(g, rng)
            composed = hilbert_transform(derivative(f))
            assert np.abs(half_laplacian(f).values - composed.values).max() <= 1e-9


class TestTranslation:
    def test_mode_translation(self, grid):
        k, f = mode(grid, 5)
        out = spectral_translate(f, 0.7)
        assert np.abs(out.values - np.cos(k * (grid.nodes + 0.7))).max() <= 1e-11

    def test_gaussian_translation(self, grid):
        f = gaussian_bump(grid, width=1.5)
        out = spectral_translate(f, -1.3)
        expected = np.exp(-(((grid.nodes - 1.3) / 1.5) ** 2))
        assert np.abs(out.values - expected).max() <= 1e-12


class TestAntiperiodicSector:
    def test_half_integer_mode_derivative(self, grid):
        xi = 2.5 * np.pi / grid.half_width
        f = Field(grid, np.sin(xi * grid.nodes))
        expected = xi * np.cos(xi * grid.nodes)
        assert np.abs(ap_derivative(f).values - expected).max() <= 1e-11

    def test_second_derivative_mode(self, grid):
        xi = 1.5 * np.pi / grid.half_width
        f = Field(grid, np.cos(xi * grid.nodes))
        assert np.abs(ap_second_derivative(f).values + xi**2 * f.values).max() <= 1e-10

    def test_translation_exact(self, grid):
        xi = 3.5 * np.pi / grid.half_width
        f = Field(grid, np.sin(xi * grid.nodes))
        out = ap_translate(f, 0.9)
        assert np.abs(out.values - np.sin(xi * (grid.nodes + 0.9))).max() <= 1e-11

    def test_translation_roundtrip_on_bump(self, grid):
        f = gaussian_bump(grid, width=1.0)
        out = ap_translate(ap_translate(f, 2.1), -2.1)
        assert np.abs(out.values - f.values).max() <= 1e-12

    def test_mirror_is_involution(self, grid, rng):
        f = random_compact(grid, rng)
        assert np.array_equal(ap_mirror(ap_mirror(f)).values, f.values)

    def test_derivative_against_finite_differences(self, grid):
        f = gaussian_bump(grid, center=1.0, width=2.0)
        x = grid.nodes
        exact = -2 * (x - 1.0) / 4.0 * f.values
        assert np.abs(ap_derivative(f).values - exact).max() <= 1e-11

    def test_derivative_form_matches_derivative(self, grid):
        f = gaussian_bump(grid, width=2.0)
        df = ap_derivative(f)
        from neelwall.grid import ap_derivative_form

        assert ap_derivative_form(f, f) == pytest.approx(inner_l2(df, df), rel=1e-11)


class TestPadding:
    def test_padded_ops_keep_roundtrips(self, rng):
        # the smoothed field has exp(-|x|) tails, so the box must be wide
        # enough that truncating the padded extension is machine-harmless
        g = Grid(512, 40.0, pad_factor=2)
        f = gaussian_bump(g, width=1.5)
        out = bessel_inverse(f)
        back = Field(g, out.values - second_derivative(out).values)
        assert norm_l2(back - f) <= 1e-9 * max(norm_l2(f), 1.0)

    def test_padding_reduces_wraparound_of_slow_tails(self):
        # Lorentzian tails decay like 1/x^2; the periodic images of the
        # Hilbert response contaminate the plain transform more than the
        # padded one
        n, R = 512, 40.0
        analytic_err = {}
        for pad in (1, 4):
            g = Grid(n, R, pad_factor=pad, far_field_tol=1e-2)
            x = g.nodes
            f = Field(g, 1.0 / (1.0 + x**2))
            expected = x / (1.0 + x**2)
            analytic_err[pad] = np.abs(hilbert_transform(f).values - expected).max()
        assert analytic_err[4] < 0.5 * analytic_err[1]


class TestFarField:
    def test_decaying_field_passes(self, grid):
        assert far_field_ok(gaussian_bump(grid, width=1.0))

    def test_constant_fails_and_warns(self, grid):
        f = Field(grid, np.ones(grid.n))
        assert not far_field_ok(f)
        with pytest.warns(FarFieldViolation):
            half_laplacian(f)

    def test_norm_h1_dominates_l2(self, grid, rng):
        f = random_compact(grid, rng)
        assert norm_h1(f) >= norm_l2(f)
