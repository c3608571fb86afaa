"""Tests for Gagliardo, Triebel-Lizorkin and Bessel seminorms and the mixed dyadic sums"""

import math

import numpy as np
import pytest

from src.field import FieldDescriptor, GridSpec, SampledField, forward_spectrum, lp_norm, sample
from src.filterbank import build_partition, project
from src.fraclap import c_const
from src.norms import (
    GagliardoQuadrature,
    NormSpec,
    SeminormValue,
    bessel_seminorm,
    default_cutoff,
    gagliardo,
    geometric_sum_high,
    geometric_sum_low,
    geometric_sum_truncated,
    mixed_sum_upper,
    triebel_lizorkin,
    triebel_lizorkin_bandwise,
)
from src.utils.errors import CutoffExceedsHalfPeriod, ParameterOutOfRange


@pytest.fixture(scope="module")
def unit_torus():
    return GridSpec(1, 256, 2.0 * math.pi)


@pytest.fixture(scope="module")
def dyadic_wave(unit_torus):
    """e^{i 8 x}: all of its energy sits in band 3"""
    return sample(FieldDescriptor('single_frequency', mode=(8,)), unit_torus)


class TestNormSpec:

    def test_conjugates(self):
        assert NormSpec(0.5, 2.0).p_conjugate == 2.0
        assert NormSpec(0.5, 1.5).p_conjugate == pytest.approx(3.0)
        assert NormSpec(0.5, 2.0, math.inf).q_conjugate == 1.0
        assert NormSpec(0.5, 2.0, 1.0).q_conjugate == math.inf
        assert NormSpec(0.5, 2.0).q_conjugate is None

    @pytest.mark.parametrize("s,p,q", [(2.0, 2.0, None), (-0.1, 2.0, None), (0.5, 1.0, None),
                                       (0.5, math.inf, None), (0.5, 2.0, 0.5)])
    def test_rejects(self, s, p, q):
        with pytest.raises(ParameterOutOfRange):
            NormSpec(s, p, q)

    def test_gagliardo_range(self):
        with pytest.raises(ParameterOutOfRange):
            NormSpec(0.0, 2.0).require_gagliardo()
        with pytest.raises(ParameterOutOfRange):
            NormSpec(1.2, 2.0).require_gagliardo()

    def test_seminorm_value_combines_tail(self):
        value = SeminormValue(value=3.0, tail_bracket=6.0, cutoff=1.0, tail_estimate=4.0, p=2.0)
        assert value.completed == pytest.approx(5.0)
        assert value.upper == pytest.approx(math.sqrt(45.0))
        assert value.to_dict()['completed'] == pytest.approx(5.0)


class TestGagliardo:

    def test_zero_field(self, small_grid):
        result = gagliardo(SampledField.zeros(small_grid), 0.5, 2.0)
        assert result.value == 0.0
        assert result.tail_bracket == 0.0
        assert result.completed == 0.0

    def test_default_cutoff(self, small_grid, random_field):
        assert gagliardo(random_field, 0.5, 2.0).cutoff == pytest.approx(default_cutoff(small_grid))
        assert default_cutoff(small_grid) == pytest.approx(15.0)

    def test_homogeneity(self, random_field):
        base = gagliardo(random_field, 0.4, 1.5, 5.0).value
        assert gagliardo(random_field.scaled(-3.0), 0.4, 1.5, 5.0).value == pytest.approx(3.0 * base, rel=1e-10)

    def test_triangle_inequality(self, small_grid):
        f = sample(FieldDescriptor('random_bandlimited', seed=1), small_grid)
        g = sample(FieldDescriptor('random_bandlimited', seed=2), small_grid)
        for p in (1.5, 3.0):
            total = gagliardo(f + g, 0.6, p, 5.0).value
            assert total <= gagliardo(f, 0.6, p, 5.0).value + gagliardo(g, 0.6, p, 5.0).value + 1e-12

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_dilation(self, small_grid, random_field, p):
        s = 0.6
        compressed = SampledField(small_grid.scaled(0.5), random_field.values, is_real=True)
        base = gagliardo(random_field, s, p, 10.0).value
        scaled = gagliardo(compressed, s, p, 5.0).value
        assert (scaled / base) ** p == pytest.approx(2.0 ** (s * p - 1.0), rel=1e-9)

    def test_profile_reused_across_s(self, random_field):
        quadrature = GagliardoQuadrature(random_field, 2.0, 5.0)
        for s in (0.2, 0.5, 0.8):
            assert quadrature.evaluate(s).value == pytest.approx(gagliardo(random_field, s, 2.0, 5.0).value)

    def test_threaded_profile_matches_sequential(self, random_field):
        threaded = GagliardoQuadrature(random_field, 1.5, 5.0, max_workers=4)
        sequential = GagliardoQuadrature(random_field, 1.5, 5.0, max_workers=1)
        np.testing.assert_array_equal(threaded.profile, sequential.profile)

    def test_cutoff_beyond_half_period(self, random_field):
        with pytest.raises(CutoffExceedsHalfPeriod):
            gagliardo(random_field, 0.5, 2.0, 25.0)

    def test_tail_estimate_within_bracket(self, random_field):
        result = gagliardo(random_field, 0.3, 2.0, 5.0)
        assert 0.0 < result.tail_estimate <= result.tail_bracket
        assert result.value <= result.completed <= result.upper

    def test_underresolved_field_drops_local_model(self, caplog):
        grid = GridSpec(1, 256, 40.0)
        hat = sample(FieldDescriptor('hat'), grid)
        quadrature = GagliardoQuadrature(hat, 2.0, 10.0)
        assert not quadrature.local_model
        assert quadrature.near_field(0.5) == 0.0
        assert "nearest-neighbour block" in caplog.text

    def test_matches_bessel_in_l2(self, small_gaussian):
        s = 0.5
        bessel2 = bessel_seminorm(small_gaussian, s, 2.0) ** 2
        value = gagliardo(small_gaussian, s, 2.0, 15.0)
        assert c_const(1, s) * value.completed ** 2 == pytest.approx(bessel2, rel=0.03)

    @pytest.mark.slow
    @pytest.mark.parametrize("descriptor", ['gaussian', 'random_bandlimited:seed=42'])
    @pytest.mark.parametrize("s", [0.1, 0.3, 0.5, 0.7, 0.9])
    def test_sharp_l2_identity(self, grid_1d, descriptor, s):
        f = sample(descriptor, grid_1d)
        c = c_const(1, s)
        bessel2 = bessel_seminorm(f, s, 2.0) ** 2
        result = gagliardo(f, s, 2.0)
        assert abs(c * result.value ** 2 - bessel2) <= 0.02 * bessel2 + c * result.tail_bracket ** 2
        if descriptor == 'gaussian' and s >= 0.3:
            assert c * result.completed ** 2 == pytest.approx(bessel2, rel=0.02)


class TestTriebelLizorkin:

    def test_paths_agree_for_q_equal_p(self, small_bank, random_field):
        for p in (1.5, 2.0, 3.0):
            pointwise = triebel_lizorkin(random_field, small_bank, 0.6, p, p)
            bandwise = triebel_lizorkin_bandwise(random_field, small_bank, 0.6, p)
            assert pointwise == pytest.approx(bandwise, rel=1e-10)

    def test_l2_energy_per_band(self, small_bank, random_field):
        s = 0.4
        energy = sum(4.0 ** (j * s) * forward_spectrum(project(small_bank, random_field, j)).energy()
                     for j in small_bank.bands)
        assert triebel_lizorkin(random_field, small_bank, s, 2.0, 2.0) ** 2 == pytest.approx(energy, rel=1e-10)

    def test_q_monotone(self, small_bank, random_field):
        values = [triebel_lizorkin(random_field, small_bank, 0.5, 2.0, q) for q in (1.0, 2.0, 3.0, math.inf)]
        assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))

    def test_single_band(self, unit_torus, dyadic_wave):
        fb = build_partition(unit_torus, 0, 5)
        expected = 2.0 ** (3 * 0.7) * lp_norm(dyadic_wave, 1.5)
        for q in (1.0, 2.0, math.inf):
            assert triebel_lizorkin(dyadic_wave, fb, 0.7, 1.5, q) == pytest.approx(expected, rel=1e-10)

    def test_zero_field(self, small_bank, small_grid):
        assert triebel_lizorkin(SampledField.zeros(small_grid), small_bank, 0.5, 2.0, 2.0) == 0.0

    @pytest.mark.parametrize("s,p,q", [(0.3, 1.5, 2.0), (0.5, 2.0, 2.0), (0.7, 3.0, 1.5), (0.5, 2.0, math.inf)])
    def test_triangle_inequality(self, small_bank, small_grid, random_field, s, p, q):
        other = sample(FieldDescriptor('random_bandlimited', seed=5), small_grid)
        total = triebel_lizorkin(random_field, small_bank, s, p, q) + triebel_lizorkin(other, small_bank, s, p, q)
        assert triebel_lizorkin(random_field + other, small_bank, s, p, q) <= total * (1.0 + 1e-12)

    def test_l2_scale_tracks_bessel(self, small_bank, random_field):
        ratios = [triebel_lizorkin(random_field, small_bank, s, 2.0, 2.0) / bessel_seminorm(random_field, s, 2.0)
                  for s in (0.1, 0.3, 0.5, 0.7, 0.9)]
        assert all(0.5 <= r <= 2.0 for r in ratios)
        assert max(ratios) / min(ratios) <= 1.5


class TestBessel:

    def test_order_zero_on_mean_zero_field(self, random_field):
        assert bessel_seminorm(random_field, 0.0, 1.7) == pytest.approx(lp_norm(random_field, 1.7), rel=1e-10)

    @pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
    def test_single_frequency(self, unit_torus, p):
        f = sample(FieldDescriptor('single_frequency', mode=(5,)), unit_torus)
        expected = 5.0 ** 0.6 * (2.0 * math.pi) ** (1.0 / p)
        assert bessel_seminorm(f, 0.6, p) == pytest.approx(expected, rel=1e-10)

    def test_gaussian_half_order(self, gaussian):
        assert bessel_seminorm(gaussian, 0.5, 2.0) == pytest.approx(1.0, abs=5e-3)

    @pytest.mark.parametrize("s,p", [(0.3, 1.5), (0.5, 2.0), (0.9, 3.0)])
    def test_triangle_inequality(self, small_grid, random_field, s, p):
        other = sample(FieldDescriptor('random_bandlimited', seed=5), small_grid)
        total = bessel_seminorm(random_field, s, p) + bessel_seminorm(other, s, p)
        assert bessel_seminorm(random_field + other, s, p) <= total * (1.0 + 1e-12)


class TestMixedSums:

    def test_geometric_helpers(self):
        assert geometric_sum_high(0.5, 2.0) == pytest.approx(2.0)
        assert geometric_sum_low(0.5, 2.0) == pytest.approx(2.0)
        assert geometric_sum_low(0.25, 2.0) == pytest.approx(1.0 / (1.0 - 2.0 ** -1.5))
        assert geometric_sum_low(0.25, 2.0) == pytest.approx(geometric_sum_truncated(1.5, 200))
        assert geometric_sum_low(0.25, 2.0) < geometric_sum_high(0.25, 2.0)
        assert geometric_sum_truncated(0.0, 5) == 5.0
        assert geometric_sum_truncated(1.0, 0) == 0.0
        assert geometric_sum_truncated(1.0, 3) == pytest.approx(1.75)
        assert geometric_sum_truncated(0.7, 200) == pytest.approx(geometric_sum_high(0.7, 1.0))
        with pytest.raises(ParameterOutOfRange):
            geometric_sum_high(0.0, 2.0)
        with pytest.raises(ParameterOutOfRange):
            geometric_sum_low(1.0, 2.0)

    def test_single_band_is_geometric(self, unit_torus, dyadic_wave):
        fb = build_partition(unit_torus, 0, 5)
        s, p = 0.4, 1.5
        norm_p = lp_norm(dyadic_wave, p) ** p
        high, low = mixed_sum_upper(dyadic_wave, fb, s, p)
        peak = 2.0 ** (3 * s * p)
        assert high ** p == pytest.approx(norm_p * peak * geometric_sum_truncated(s * p, 4), rel=1e-10)
        assert low ** p == pytest.approx(norm_p * peak * geometric_sum_truncated((1.0 - s) * p, 3), rel=1e-10)
        assert high ** p <= norm_p * peak * geometric_sum_high(s, p)
        assert low ** p <= norm_p * peak * geometric_sum_low(s, p)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_bounds_gagliardo(self, small_bank, random_field, p):
        s = 0.5
        high, low = mixed_sum_upper(random_field, small_bank, s, p)
        seminorm = gagliardo(random_field, s, p).completed
        assert seminorm <= 100.0 * (high + low)
