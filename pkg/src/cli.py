"""
Command-Line Front End
Parses flags and JSON configs, dispatches experiments and writes CSV/JSON
reports with CI-friendly exit codes (0 ok, 1 failed check or numerical
error, 2 configuration or usage error).
"""

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from src.experiments import SweepConfig, SweepReport, default_band_max, run_experiment, standard_family
from src.field import FieldDescriptor, GridSpec, sample
from src.filterbank import build_partition
from src.norms import NormSpec, bessel_seminorm, gagliardo, triebel_lizorkin
from src.selftest import results_frame, run_selftest
from src.utils.errors import ConfigError, LabError
from src.utils.report_writer import write_csv, write_json

logger = logging.getLogger(__name__)

SUBCOMMANDS = ('norms', 'bbm', 'embed', 'sandwich', 'fracbbm', 'selftest')
EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


@dataclass
class CliConfig:
    """Resolved command-line configuration (defaults < config file < flags)"""
    subcommand: str = None
    desc: str = 'gaussian'
    family: str = 'single'
    dim: int = 1
    n: int = 4096
    L: float = 40.0
    s: float = 0.5
    p: float = 2.0
    q: float = None
    zcut: float = None
    jmin: int = None
    jmax: int = None
    sgrid: List[float] = None
    r: float = 0.0
    t: float = 1.0
    theta: float = 0.2
    Lambda: float = 2.0
    sides: List[str] = None
    seed: int = 42
    workers: int = 4
    outdir: str = 'output'
    stamp: str = None
    verbose: int = 0

    def __post_init__(self):
        if self.stamp is None:
            self.stamp = datetime.now().strftime('%Y%m%d-%H%M%S')
        if isinstance(self.sgrid, str):
            self.sgrid = _float_list(self.sgrid)
        if isinstance(self.sides, str):
            self.sides = [side.strip() for side in self.sides.split(',') if side.strip()]

    @property
    def grid(self) -> GridSpec:
        return GridSpec(int(self.dim), int(self.n), float(self.L))

    def descriptor(self) -> FieldDescriptor:
        descriptor = FieldDescriptor.parse(self.desc)
        if descriptor.kind == 'random_bandlimited' and 'seed=' not in self.desc:
            descriptor = dataclasses.replace(descriptor, seed=int(self.seed))
        return descriptor

    def sweep_config(self) -> SweepConfig:
        family = standard_family(int(self.seed)) if self.family == 'standard' else None
        return SweepConfig(
            kind=self.subcommand,
            descriptor=self.descriptor(),
            family=family,
            grid=self.grid,
            p=float(self.p),
            s_grid=self.sgrid,
            z_cut=self.zcut,
            j_min=self.jmin,
            j_max=self.jmax,
            Lambda=float(self.Lambda),
            seed=int(self.seed),
            max_workers=int(self.workers),
            parallel_processing=int(self.workers) > 1,
        )

    def validate(self):
        """Build every derived object once so bad values fail before any work"""
        if self.subcommand == 'norms':
            NormSpec(self.s, self.p, self.q).require_gagliardo()
        if self.subcommand in ('norms', 'selftest'):
            self.descriptor()
            return self.grid
        return self.sweep_config()

    def report_path(self, suffix: str) -> Path:
        return Path(self.outdir) / f"{self.subcommand}-{self.stamp}.{suffix}"


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list {text!r}: {exc}")


def build_parser() -> argparse.ArgumentParser:
    """Parser whose flags default to None so unset flags never override the config file"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON file with keys mirroring the flag names')
    common.add_argument('--desc', help="test function, e.g. 'gaussian' or 'random_bandlimited:seed=7'")
    common.add_argument('--family', choices=['single', 'standard'], help='one descriptor or the standard family')
    common.add_argument('--dim', type=int, help='dimension N (1 or 2)')
    common.add_argument('--n', type=int, help='points per axis (power of two)')
    common.add_argument('--L', type=float, help='period of the torus')
    common.add_argument('--s', type=float, help='smoothness (norms, fracbbm)')
    common.add_argument('--p', type=float, help='integrability exponent')
    common.add_argument('--q', type=float, help='fine index for norms')
    common.add_argument('--zcut', type=float, help='Gagliardo lattice cutoff radius')
    common.add_argument('--jmin', type=int, help='lowest filterbank band')
    common.add_argument('--jmax', type=int, help='highest filterbank band')
    common.add_argument('--sgrid', help='comma separated s values')
    common.add_argument('--r', type=float, help='lower order for the sandwich')
    common.add_argument('--t', type=float, help='upper order for the sandwich')
    common.add_argument('--theta', type=float, help='lower end of the r range for fracbbm')
    common.add_argument('--Lambda', type=float, help='reverse-control factor for the sandwich')
    common.add_argument('--sides', help='comma separated inequality sides for embed')
    common.add_argument('--seed', type=int, help='seed for random test functions')
    common.add_argument('--workers', type=int, help='worker threads (1 disables parallelism)')
    common.add_argument('--outdir', help='report directory')
    common.add_argument('--stamp', help='report filename stamp (default: local time)')
    common.add_argument('-v', '--verbose', action='count', help='-v for progress, -vv for numerical detail')

    parser = argparse.ArgumentParser(prog='run_lab', description='Fractional Sobolev seminorm laboratory')
    subparsers = parser.add_subparsers(dest='subcommand', metavar='{' + ','.join(SUBCOMMANDS) + '}')
    helps = {
        'norms': 'all seminorms of one descriptor at one (s, p, q)',
        'bbm': 'BBM limit sweep as s -> 1',
        'embed': 'Gagliardo vs Triebel-Lizorkin envelope ratios',
        'sandwich': 'Sobolev sandwich between orders r < s < t',
        'fracbbm': 'fractional BBM upper bound sup over r in [theta, s)',
        'selftest': 'invariant suite on small grids',
    }
    for name in SUBCOMMANDS:
        subparsers.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_config(args: argparse.Namespace) -> CliConfig:
    """Merge defaults, the JSON config file and explicit flags"""
    values: Dict[str, Any] = {}
    if getattr(args, 'config', None):
        path = Path(args.config)
        try:
            with open(path, 'r', encoding='utf-8') as f:
                loaded = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}")
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        known = {f.name for f in dataclasses.fields(CliConfig)}
        unknown = sorted(set(loaded) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        values.update(loaded)

    for key, value in vars(args).items():
        if key != 'config' and value is not None:
            values[key] = value
    return CliConfig(**values)


def _configure_logging(verbose: int):
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose and verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logging.getLogger().setLevel(level)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _run_norms(cfg: CliConfig) -> SweepReport:
    grid = cfg.grid
    descriptor = cfg.descriptor()
    f = sample(descriptor, grid)
    jmin = -3 if cfg.jmin is None else cfg.jmin
    jmax = default_band_max(grid) if cfg.jmax is None else cfg.jmax
    fb = build_partition(grid, jmin, jmax)

    s, p = float(cfg.s), float(cfg.p)
    value = gagliardo(f, s, p, cfg.zcut, max_workers=cfg.workers)
    row = {'field': descriptor.label, 's': s, 'p': p, 'q': cfg.q}
    row.update({'gagliardo': value.value, 'tail_bracket': value.tail_bracket,
                'tail_estimate': value.tail_estimate, 'completed': value.completed})
    row['tl_pp'] = triebel_lizorkin(f, fb, s, p, p)
    row['tl_p2'] = triebel_lizorkin(f, fb, s, p, 2.0)
    row['tl_pq'] = triebel_lizorkin(f, fb, s, p, cfg.q) if cfg.q is not None else None
    row['bessel'] = bessel_seminorm(f, s, p)

    config = {'desc': descriptor.label, 'grid': dataclasses.asdict(grid), 's': s, 'p': p, 'q': cfg.q,
              'z_cut': value.cutoff, 'j_min': jmin, 'j_max': jmax, 'seed': cfg.seed}
    return SweepReport('norms', config, [row], summary={'passed': True}, column_notes=[
        "gagliardo/tail_bracket/tail_estimate/completed: Gagliardo seminorm and far-field accounting",
        "tl_pp, tl_p2, tl_pq: Triebel-Lizorkin seminorms with q = p, 2 and the requested q; bessel = ||(-Delta)^(s/2) f||_p",
    ])


def _run_selftest(cfg: CliConfig) -> SweepReport:
    results = run_selftest(max_workers=cfg.workers, seed=int(cfg.seed))
    frame = results_frame(results)
    passed = bool(frame['passed'].all())
    summary = {'checks': len(results), 'failed': [r.check for r in results if not r.passed], 'passed': passed}
    return SweepReport('selftest', {'seed': cfg.seed}, frame.to_dict('records'), summary=summary,
                       columns=list(frame.columns),
                       column_notes=["check passes when observed <= bound (small grids, n <= 1024)"])


def _dispatch(cfg: CliConfig) -> SweepReport:
    if cfg.subcommand == 'norms':
        return _run_norms(cfg)
    if cfg.subcommand == 'selftest':
        return _run_selftest(cfg)
    sweep = cfg.sweep_config()
    return run_experiment(sweep, r=cfg.r, t=cfg.t, theta=cfg.theta, s=cfg.s, sides=cfg.sides)


def _write_error(cfg: CliConfig, exc: LabError) -> Path:
    return write_json(cfg.report_path('json'), {'kind': cfg.subcommand, 'error': exc.to_record()})


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG

    if not args.subcommand:
        parser.print_usage(sys.stderr)
        print("error: a subcommand is required", file=sys.stderr)
        return EXIT_CONFIG

    try:
        cfg = resolve_config(args)
        _configure_logging(cfg.verbose)
        cfg.validate()
    except (LabError, TypeError, ValueError) as exc:
        print(f"❌ configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    logger.info("running %s (stamp %s)", cfg.subcommand, cfg.stamp)
    try:
        report = _dispatch(cfg)
    except LabError as exc:
        path = _write_error(cfg, exc)
        logger.error("%s failed: %s", cfg.subcommand, exc)
        print(f"❌ {cfg.subcommand} failed: {type(exc).__name__}: {exc}")
        print(f"📄 error record: {path}")
        return EXIT_FAILED

    csv_path = write_csv(cfg.report_path('csv'), report.to_frame(), report.header_lines())
    json_path = write_json(cfg.report_path('json'), report.to_json())

    status = "✅" if report.passed else "❌"
    print(f"{status} {cfg.subcommand}: {len(report.records)} records")
    for warning in report.warnings:
        print(f"⚠️ {warning}")
    print(f"📄 {csv_path}")
    print(f"📄 {json_path}")
    return EXIT_OK if report.passed else EXIT_FAILED


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
