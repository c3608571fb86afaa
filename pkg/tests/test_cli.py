"""Tests for the command-line front end"""

import json

import pytest

from src import cli
from src.cli import CliConfig, build_parser, resolve_config, run
from src.selftest import CheckResult
from src.utils.errors import ConfigError
from src.utils.report_writer import read_csv

SMALL = ['--n', '1024', '--L', '40']


def _run(tmp_path, *argv, stamp='fixed'):
    return run(list(argv) + ['--outdir', str(tmp_path), '--stamp', stamp])


class TestExitCodes:

    def test_missing_subcommand(self, capsys):
        assert run([]) == 2
        assert "subcommand is required" in capsys.readouterr().err

    def test_unknown_flag(self):
        assert run(['norms', '--colour', 'red']) == 2

    def test_help(self):
        assert run(['--help']) == 0

    def test_bad_exponent_is_config_error(self, tmp_path):
        assert _run(tmp_path, 'norms', '--p', '1.0') == 2
        assert _run(tmp_path, 'bbm', '--p', '0.5') == 2
        assert not list(tmp_path.iterdir())

    def test_bad_grid_is_config_error(self, tmp_path):
        assert _run(tmp_path, 'norms', '--n', '1000') == 2

    def test_unknown_descriptor_is_config_error(self, tmp_path):
        assert _run(tmp_path, 'norms', '--desc', 'triangle') == 2

    def test_empty_descriptor_value_is_config_error(self, tmp_path):
        assert _run(tmp_path, 'norms', '--desc', 'random_bandlimited:seed=') == 2

    def test_coarse_family_is_config_error(self, tmp_path, capsys):
        assert _run(tmp_path, 'embed', '--family', 'standard', *SMALL, '--sgrid', '0.5') == 2
        assert 'smooth_bump' in capsys.readouterr().err
        assert not list(tmp_path.iterdir())

    def test_numerical_error_writes_record(self, tmp_path):
        assert _run(tmp_path, 'norms', '--desc', 'gaussian:width=10', *SMALL) == 1
        record = json.loads((tmp_path / 'norms-fixed.json').read_text())
        assert record['error']['type'] == 'InsufficientDecay'

    def test_skipped_sweep_writes_record(self, tmp_path):
        code = _run(tmp_path, 'fracbbm', *SMALL, '--sgrid', '0.5,0.9', '--theta', '0.6', '--s', '0.7')
        assert code == 1
        record = json.loads((tmp_path / 'fracbbm-fixed.json').read_text())
        assert record['kind'] == 'fracbbm'
        assert record['error']['type'] == 'SkippedAll'


class TestNorms:

    def test_norms_report(self, tmp_path):
        assert _run(tmp_path, 'norms', *SMALL, '--s', '0.5', '--p', '2', '--q', '3') == 0
        frame = read_csv(tmp_path / 'norms-fixed.csv')
        assert len(frame) == 1
        for column in ('gagliardo', 'tl_pp', 'tl_p2', 'tl_pq', 'bessel'):
            assert frame[column].iloc[0] > 0
        assert frame['bessel'].iloc[0] == pytest.approx(1.0, abs=5e-3)
        summary = json.loads((tmp_path / 'norms-fixed.json').read_text())
        assert summary['summary']['passed'] is True

    def test_byte_identical_reports(self, tmp_path):
        first, second = tmp_path / 'a', tmp_path / 'b'
        argv = ['norms', '--desc', 'random_bandlimited', *SMALL, '--s', '0.3', '--p', '1.5']
        assert _run(first, *argv) == 0
        assert _run(second, *argv) == 0
        assert (first / 'norms-fixed.csv').read_bytes() == (second / 'norms-fixed.csv').read_bytes()

    def test_seed_changes_random_field(self, tmp_path):
        argv = ['norms', '--desc', 'random_bandlimited', *SMALL]
        assert _run(tmp_path, *argv, '--seed', '1', stamp='one') == 0
        assert _run(tmp_path, *argv, '--seed', '2', stamp='two') == 0
        one = read_csv(tmp_path / 'norms-one.csv')['gagliardo'].iloc[0]
        two = read_csv(tmp_path / 'norms-two.csv')['gagliardo'].iloc[0]
        assert one != two


class TestSweeps:

    def test_bbm_small(self, tmp_path, capsys):
        assert _run(tmp_path, 'bbm', *SMALL, '--sgrid', '0.5,0.9,0.95,0.99') == 0
        summary = json.loads((tmp_path / 'bbm-fixed.json').read_text())
        field = summary['summary']['fields']['gaussian(w=1)']
        assert field['limit_relative_error'] <= 0.05
        assert "bbm: 4 records" in capsys.readouterr().out

    def test_embed_rejects_unasserted_side(self, tmp_path):
        code = _run(tmp_path, 'embed', *SMALL, '--p', '3', '--sgrid', '0.5', '--sides', 'p2_lower')
        assert code == 1


class TestConfigResolution:

    def test_precedence(self, tmp_path):
        config = tmp_path / 'lab.json'
        config.write_text(json.dumps({'p': 3.0, 'n': 1024, 's': 0.4}))
        args = build_parser().parse_args(['norms', '--config', str(config), '--s', '0.6'])
        cfg = resolve_config(args)
        assert (cfg.p, cfg.n, cfg.s) == (3.0, 1024, 0.6)
        assert cfg.L == 40.0

    def test_unknown_key(self, tmp_path):
        config = tmp_path / 'lab.json'
        config.write_text(json.dumps({'colour': 'red'}))
        with pytest.raises(ConfigError):
            resolve_config(build_parser().parse_args(['norms', '--config', str(config)]))
        assert run(['norms', '--config', str(config)]) == 2

    def test_unreadable_config(self, tmp_path):
        assert run(['norms', '--config', str(tmp_path / 'missing.json')]) == 2

    def test_defaults(self):
        cfg = CliConfig(subcommand='bbm', stamp='x')
        assert cfg.seed == 42
        assert cfg.report_path('csv').name == 'bbm-x.csv'
        sweep = cfg.sweep_config()
        assert (sweep.j_min, sweep.j_max) == (-3, 7)

    def test_seed_applies_to_random_descriptor(self):
        cfg = CliConfig(subcommand='norms', desc='random_bandlimited', seed=9)
        assert cfg.descriptor().seed == 9
        cfg = CliConfig(subcommand='norms', desc='random_bandlimited:seed=3', seed=9)
        assert cfg.descriptor().seed == 3

    def test_list_flags(self):
        cfg = CliConfig(subcommand='embed', sgrid='0.1,0.5', sides='pp_lower, pp_upper')
        assert cfg.sgrid == [0.1, 0.5]
        assert cfg.sides == ['pp_lower', 'pp_upper']

    def test_selftest_receives_seed(self, tmp_path, monkeypatch):
        seen = []

        def fake_selftest(max_workers, seed):
            seen.append(seed)
            return [CheckResult('parseval', 0.0, 1e-12, True)]

        monkeypatch.setattr(cli, 'run_selftest', fake_selftest)
        assert _run(tmp_path, 'selftest', '--seed', '7') == 0
        assert seen == [7]
        assert json.loads((tmp_path / 'selftest-fixed.json').read_text())['config']['seed'] == 7

    @pytest.mark.slow
    def test_selftest_is_reproducible(self, tmp_path):
        first, second = tmp_path / 'a', tmp_path / 'b'
        assert _run(first, 'selftest', '--seed', '42') == 0
        assert _run(second, 'selftest', '--seed', '42') == 0
        assert (first / 'selftest-fixed.csv').read_bytes() == (second / 'selftest-fixed.csv').read_bytes()
