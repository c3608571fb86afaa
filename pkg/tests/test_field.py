"""Tests for grids, sampling, transforms, norms and field persistence"""

import math

import numpy as np
import pytest

from src.field import (
    FieldDescriptor,
    GridSpec,
    SampledField,
    export_field_csv,
    forward_spectrum,
    gradient_lp_norm,
    inverse_spectrum,
    load_field,
    refine_field,
    lp_norm,
    sample,
    save_field,
    shift,
    spectral_laplacian,
)
from src.utils.errors import (
    InsufficientDecay,
    InvalidExponent,
    InvalidField,
    InvalidGrid,
    SpectralUnderresolution,
    UnsupportedDescriptor,
)
from src.utils.report_writer import read_csv


class TestGridSpec:

    @pytest.mark.parametrize("dim,n,period", [(3, 64, 1.0), (1, 100, 1.0), (1, 64, 0.0), (2, 64, -2.0)])
    def test_rejects_invalid(self, dim, n, period):
        with pytest.raises(InvalidGrid):
            GridSpec(dim, n, period)

    def test_geometry(self, grid_1d):
        assert grid_1d.spacing == pytest.approx(40.0 / 4096)
        assert grid_1d.nyquist == pytest.approx(math.pi * 4096 / 40.0)
        x = grid_1d.axis_coordinates()
        assert x[0] == pytest.approx(-20.0)
        assert x[2048] == 0.0

    def test_frequencies_in_fft_order(self):
        grid = GridSpec(1, 8, 2.0 * math.pi)
        np.testing.assert_array_equal(grid.axis_modes(), [0, 1, 2, 3, -4, -3, -2, -1])


class TestSampling:

    def test_gaussian_transform_closed_form_1d(self, grid_1d, gaussian):
        xi = grid_1d.frequency_magnitude()
        expected = 2.0 ** -0.5 * np.exp(-xi ** 2 / 4.0)
        np.testing.assert_allclose(forward_spectrum(gaussian).coefficients, expected, atol=1e-10)

    def test_gaussian_transform_closed_form_2d(self, grid_2d):
        f = sample(FieldDescriptor('gaussian', center=(0.0, 0.0)), grid_2d)
        xi = grid_2d.frequency_magnitude()
        expected = 0.5 * np.exp(-xi ** 2 / 4.0)
        np.testing.assert_allclose(forward_spectrum(f).coefficients, expected, atol=1e-10)

    def test_parseval(self, random_field):
        assert forward_spectrum(random_field).energy() == pytest.approx(lp_norm(random_field, 2) ** 2, rel=1e-12)

    def test_inverse_recovers_samples(self, random_field):
        back = inverse_spectrum(forward_spectrum(random_field))
        np.testing.assert_allclose(back.values, random_field.values, atol=1e-13)
        assert back.is_real

    def test_single_frequency_has_one_coefficient(self):
        grid = GridSpec(1, 256, 40.0)
        f = sample(FieldDescriptor('single_frequency', mode=(3,)), grid)
        coefficients = np.abs(forward_spectrum(f).coefficients)
        assert not f.is_real
        assert int(np.argmax(coefficients)) == 3
        assert np.sum(coefficients > 1e-10) == 1

    def test_random_bandlimited_is_seeded(self, small_grid):
        a = sample('random_bandlimited:seed=7', small_grid)
        b = sample(FieldDescriptor('random_bandlimited', seed=7), small_grid)
        c = sample(FieldDescriptor('random_bandlimited', seed=8), small_grid)
        np.testing.assert_array_equal(a.values, b.values)
        assert not np.allclose(a.values, c.values)
        assert a.is_real
        assert a.peak == pytest.approx(1.0)

    def test_random_bandlimited_stays_in_band(self, small_grid, random_field):
        power = np.abs(forward_spectrum(random_field).coefficients) ** 2
        xi = small_grid.frequency_magnitude()
        outside = (xi < 0.5) | (xi > 4.0)
        assert np.sum(power[outside]) <= 1e-20 * np.sum(power)

    def test_insufficient_decay(self, grid_1d):
        with pytest.raises(InsufficientDecay):
            sample(FieldDescriptor('gaussian', width=10.0), grid_1d)

    def test_unknown_descriptor(self):
        with pytest.raises(UnsupportedDescriptor):
            FieldDescriptor.parse('triangle')
        with pytest.raises(UnsupportedDescriptor):
            FieldDescriptor.parse('gaussian:colour=red')

    def test_descriptor_parsing(self):
        d = FieldDescriptor.parse('random_bandlimited:seed=7, j_lo=0, j_hi=3')
        assert (d.kind, d.seed, d.j_lo, d.j_hi) == ('random_bandlimited', 7, 0, 3)
        assert FieldDescriptor.parse('gaussian:center=1;2').center == (1.0, 2.0)

    @pytest.mark.parametrize("text", ['random_bandlimited:seed=', 'gaussian:width= ', 'gaussian:center=;'])
    def test_descriptor_without_value(self, text):
        with pytest.raises(UnsupportedDescriptor):
            FieldDescriptor.parse(text)

    def test_real_tag_rejects_imaginary_values(self, small_grid):
        with pytest.raises(InvalidField):
            SampledField(small_grid, np.full(small_grid.shape, 1j), is_real=True)


class TestNorms:

    def test_gaussian_l2_norm(self, gaussian):
        assert lp_norm(gaussian, 2) ** 2 == pytest.approx(math.sqrt(math.pi / 2.0), rel=1e-12)

    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
    def test_constant_on_unit_torus(self, p):
        grid = GridSpec(1, 64, 2.0 * math.pi)
        f = SampledField.from_real(grid, np.ones(grid.shape))
        assert lp_norm(f, p) == pytest.approx((2.0 * math.pi) ** (1.0 / p), rel=1e-12)

    def test_sup_norm(self, random_field):
        assert lp_norm(random_field, math.inf) == pytest.approx(1.0)

    def test_homogeneity(self, random_field):
        assert lp_norm(random_field.scaled(-2.5), 1.7) == pytest.approx(2.5 * lp_norm(random_field, 1.7), rel=1e-12)

    def test_rejects_small_exponent(self, random_field):
        with pytest.raises(InvalidExponent):
            lp_norm(random_field, 0.5)

    def test_shift_is_periodic_translation(self, random_field):
        moved = shift(random_field, [5])
        np.testing.assert_array_equal(moved.values[:-5], random_field.values[5:])
        np.testing.assert_array_equal(moved.values[-5:], random_field.values[:5])

    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, math.inf])
    def test_shift_is_an_isometry(self, random_field, p):
        rng = np.random.default_rng(11)
        for z in rng.integers(-random_field.grid.points_per_axis, random_field.grid.points_per_axis, size=5):
            assert lp_norm(shift(random_field, [z]), p) == pytest.approx(lp_norm(random_field, p), rel=1e-12)

    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, math.inf])
    def test_triangle_inequality(self, small_grid, p):
        f = sample(FieldDescriptor('random_bandlimited', seed=3), small_grid)
        g = sample(FieldDescriptor('gaussian', width=2.0), small_grid)
        assert lp_norm(f + g, p) <= (lp_norm(f, p) + lp_norm(g, p)) * (1.0 + 1e-12)
        assert lp_norm(f - g, p) <= (lp_norm(f, p) + lp_norm(g, p)) * (1.0 + 1e-12)


class TestDifferentiation:

    def test_gaussian_gradient_norm(self, gaussian):
        assert gradient_lp_norm(gaussian, 2) == pytest.approx((math.pi / 2.0) ** 0.25, rel=1e-10)

    def test_gaussian_laplacian(self, grid_1d, gaussian):
        x = grid_1d.axis_coordinates()
        expected = (4.0 * x ** 2 - 2.0) * np.exp(-x ** 2)
        np.testing.assert_allclose(spectral_laplacian(gaussian).real_values, expected, atol=1e-9)

    def test_underresolved_hat(self):
        grid = GridSpec(1, 256, 40.0)
        with pytest.raises(SpectralUnderresolution):
            gradient_lp_norm(sample(FieldDescriptor('hat'), grid), 2)


class TestRefinement:

    def test_refined_grid(self, small_grid):
        fine = small_grid.refined()
        assert (fine.dim, fine.points_per_axis, fine.period) == (1, 2048, 40.0)
        assert fine.spacing == pytest.approx(small_grid.spacing / 2.0)

    def test_refined_field_keeps_coarse_samples(self, random_field):
        fine = refine_field(random_field)
        assert fine.grid == random_field.grid.refined()
        assert fine.is_real
        np.testing.assert_allclose(fine.values[::2], random_field.values, atol=1e-12)
        assert lp_norm(fine, 2) == pytest.approx(lp_norm(random_field, 2), rel=1e-12)

    def test_refined_gaussian_matches_direct_sampling(self, small_grid, small_gaussian):
        direct = sample(FieldDescriptor('gaussian'), small_grid.refined())
        np.testing.assert_allclose(refine_field(small_gaussian).values, direct.values, atol=1e-12)

    def test_refined_2d_field(self, grid_2d):
        f = sample(FieldDescriptor('random_bandlimited', seed=4, j_lo=0, j_hi=2), grid_2d)
        np.testing.assert_allclose(refine_field(f).values[::2, ::2], f.values, atol=1e-12)


class TestPersistence:

    def test_binary_container(self, tmp_path, random_field):
        path = save_field(tmp_path / "field.slf", random_field)
        loaded = load_field(path)
        assert loaded.grid == random_field.grid
        assert loaded.is_real
        np.testing.assert_array_equal(loaded.values, random_field.values)

    def test_bad_magic(self, tmp_path, random_field):
        path = tmp_path / "broken.slf"
        path.write_bytes(b'XXXX' + b'\x00' * 64)
        with pytest.raises(InvalidField):
            load_field(path)

    def test_csv_export(self, tmp_path):
        grid = GridSpec(2, 8, 4.0)
        f = sample(FieldDescriptor('single_frequency', mode=(1, 0)), grid)
        frame = read_csv(export_field_csv(tmp_path / "field.csv", f))
        assert list(frame.columns) == ['i0', 'i1', 'x0', 'x1', 'real', 'imag']
        assert len(frame) == 64
        np.testing.assert_allclose(frame['real'] + 1j * frame['imag'], f.values.ravel(), atol=1e-14)
