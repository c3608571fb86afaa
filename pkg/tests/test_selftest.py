"""Tests for the self-test registry"""

import math

import pytest

from src import selftest
from src.selftest import CheckContext, CheckResult, available_checks, results_frame, run_check, run_selftest
from src.utils.errors import SpectralLeakage


class TestRegistry:

    def test_every_module_is_covered(self):
        names = available_checks()
        for expected in ('parseval', 'shift_isometry', 'lp_homogeneity', 'lp_triangle',
                         'partition_of_unity', 'reconstruction', 'adjacent_band_identity', 'band_reality',
                         'c_const_half', 'k_const', 'integral_vs_spectral',
                         'gagliardo_identity', 'gagliardo_dilation', 'bessel_gaussian', 'bessel_triangle',
                         'triebel_lizorkin_paths', 'triebel_lizorkin_q_monotone', 'triebel_lizorkin_triangle',
                         'triebel_lizorkin_bessel_band', 'bbm_trend', 'experiment_constants', 'refinement'):
            assert expected in names

    def test_unknown_check(self):
        with pytest.raises(KeyError):
            run_selftest(['no_such_check'])

    @pytest.mark.parametrize("name", ['parseval', 'partition_of_unity', 'c_const_half', 'k_const', 'semigroup',
                                      'shift_isometry', 'lp_homogeneity', 'lp_triangle', 'band_reality',
                                      'adjacent_band_identity'])
    def test_cheap_checks_pass(self, name):
        result = run_check(name)
        assert result.passed, result

    @pytest.mark.parametrize("name", ['triebel_lizorkin_q_monotone', 'triebel_lizorkin_triangle',
                                      'triebel_lizorkin_bessel_band', 'bessel_triangle', 'gagliardo_dilation'])
    def test_seminorm_checks_pass(self, name):
        result = run_check(name, seed=7)
        assert result.passed, result

    def test_lab_error_becomes_failed_result(self, monkeypatch):
        def broken(ctx):
            raise SpectralLeakage("energy above the top band")

        monkeypatch.setitem(selftest._REGISTRY, 'broken', broken)
        result = run_check('broken')
        assert not result.passed
        assert math.isnan(result.observed)
        assert result.detail.startswith('SpectralLeakage')

    def test_failed_bound(self, monkeypatch):
        monkeypatch.setitem(selftest._REGISTRY, 'too_large', lambda ctx: (2.0, 1.0))
        assert run_check('too_large') == CheckResult('too_large', 2.0, 1.0, False)


class TestSeed:

    def test_context_fields_follow_the_seed(self):
        first, second = CheckContext(1).random(), CheckContext(2).random()
        assert (first - second).peak > 0.1
        assert (CheckContext(1).random() - first).peak == 0.0

    def test_seed_reaches_every_check(self, monkeypatch):
        seen = []

        def record_seed(ctx):
            seen.append(ctx.seed)
            return 0.0, 1.0

        monkeypatch.setitem(selftest._REGISTRY, 'record_seed', record_seed)
        run_selftest(['record_seed', 'record_seed'], max_workers=2, seed=7)
        assert seen == [7, 7]

    def test_seed_changes_random_field_checks(self):
        first = run_check('lp_triangle', seed=1)
        second = run_check('lp_triangle', seed=2)
        assert first.passed and second.passed
        assert first.observed != second.observed


class TestSuite:

    def test_order_is_stable(self):
        names = ['k_const', 'parseval', 'c_const_half']
        results = run_selftest(names, max_workers=3)
        assert [r.check for r in results] == names

    def test_results_frame(self):
        frame = results_frame(run_selftest(['parseval', 'c_const_half'], max_workers=1))
        assert list(frame.columns) == ['check', 'observed', 'bound', 'passed', 'detail']
        assert frame['passed'].all()

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ['bbm_trend', 'experiment_constants', 'refinement'])
    def test_experiment_checks_pass(self, name):
        result = run_check(name)
        assert result.passed, result

    @pytest.mark.slow
    def test_full_suite_passes(self):
        failed = [r for r in run_selftest() if not r.passed]
        assert not failed
