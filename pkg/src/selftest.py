"""
Self-Test Suite
Named invariant checks on small grids (n <= 1024). Each check receives a
seeded CheckContext and returns the observed quantity and the bound it must
respect.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.experiments import (
    DEFAULT_CEILING,
    REFINEMENT_TOLERANCE,
    SweepConfig,
    bbm_sweep,
    embedding_ratio,
    frac_bbm_upper,
    refinement_consistency,
)
from src.field import (
    CONVENTION,
    FieldDescriptor,
    GridSpec,
    SampledField,
    SpectralField,
    forward_spectrum,
    inverse_spectrum,
    lp_norm,
    sample,
    shift,
)
from src.filterbank import Filterbank, build_partition, decompose, partition_residue, project
from src.fraclap import (
    c_const,
    c_const_envelope,
    frac_laplacian_integral,
    frac_laplacian_spectral,
    k_const,
    k_const_closed,
)
from src.norms import bessel_seminorm, gagliardo, triebel_lizorkin, triebel_lizorkin_bandwise
from src.utils.errors import LabError

logger = logging.getLogger(__name__)

SELFTEST_GRID = GridSpec(1, 1024, 40.0)
SELFTEST_BANDS = (-3, 5)
DEFAULT_SEED = 42

EXPONENTS = (1.0, 1.5, 2.0, 3.0, math.inf)


@dataclass(frozen=True)
class CheckResult:
    check: str
    observed: float
    bound: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class CheckContext:
    """Seeded inputs shared by the checks of one run"""
    seed: int = DEFAULT_SEED

    def gaussian(self) -> SampledField:
        return sample(FieldDescriptor('gaussian'), SELFTEST_GRID)

    def random(self, offset: int = 0) -> SampledField:
        return sample(self.random_descriptor(offset), SELFTEST_GRID)

    def random_descriptor(self, offset: int = 0) -> FieldDescriptor:
        return FieldDescriptor('random_bandlimited', seed=self.seed + offset)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def bank(self) -> Filterbank:
        return build_partition(SELFTEST_GRID, *SELFTEST_BANDS)

    def sweep(self, kind: str, family: List[FieldDescriptor], s_grid: Sequence[float], **overrides) -> SweepConfig:
        settings = dict(kind=kind, family=family, grid=SELFTEST_GRID, s_grid=s_grid, seed=self.seed,
                        parallel_processing=False, show_progress=False)
        settings.update(overrides)
        return SweepConfig(**settings)


_REGISTRY: Dict[str, Callable[[CheckContext], Tuple[float, float]]] = {}


def check(name: str):
    """Register a check returning (observed, bound); passes when observed <= bound"""
    def decorator(func):
        _REGISTRY[name] = func
        return func
    return decorator


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    scale = float(np.linalg.norm(b))
    return float(np.linalg.norm(a - b) / scale) if scale > 0 else float(np.linalg.norm(a))


def _excess(lhs: float, rhs: float) -> float:
    """(lhs - rhs) / rhs; at most round-off when lhs <= rhs holds"""
    return (lhs - rhs) / rhs if rhs > 0 else lhs


# ---------------------------------------------------------------------------
# field
# ---------------------------------------------------------------------------

@check("parseval")
def _parseval(ctx: CheckContext):
    f = ctx.gaussian()
    norm2 = lp_norm(f, 2) ** 2
    return abs(forward_spectrum(f).energy() - norm2) / norm2, 1e-12


@check("gaussian_transform")
def _gaussian_transform(ctx: CheckContext):
    f = ctx.gaussian()
    xi = SELFTEST_GRID.frequency_magnitude()
    expected = 2.0 ** -0.5 * np.exp(-xi ** 2 / 4.0)
    return float(np.max(np.abs(forward_spectrum(f).coefficients - expected))), 1e-10


@check("shift_isometry")
def _shift_isometry(ctx: CheckContext):
    f = ctx.random()
    n = SELFTEST_GRID.points_per_axis
    worst = 0.0
    for z in ctx.rng().integers(-n, n, size=4):
        for p in EXPONENTS:
            worst = max(worst, abs(lp_norm(shift(f, [z]), p) / lp_norm(f, p) - 1.0))
    return worst, 1e-12


@check("lp_homogeneity")
def _lp_homogeneity(ctx: CheckContext):
    f = ctx.random()
    worst = 0.0
    for factor in ctx.rng().uniform(-3.0, 3.0, size=3):
        for p in EXPONENTS:
            worst = max(worst, abs(lp_norm(f.scaled(factor), p) / (abs(factor) * lp_norm(f, p)) - 1.0))
    return worst, 1e-12


@check("lp_triangle")
def _lp_triangle(ctx: CheckContext):
    f, g = ctx.random(), ctx.random(1)
    return max(_excess(lp_norm(f + g, p), lp_norm(f, p) + lp_norm(g, p)) for p in EXPONENTS), 1e-12


# ---------------------------------------------------------------------------
# filterbank
# ---------------------------------------------------------------------------

@check("partition_of_unity")
def _partition(ctx: CheckContext):
    return partition_residue(ctx.bank()), 1e-12


@check("reconstruction")
def _reconstruction(ctx: CheckContext):
    f = ctx.random()
    rebuilt = decompose(ctx.bank(), f).reconstruct()
    return _relative(rebuilt.values, f.values), 1e-10


@check("projection_self_adjoint")
def _self_adjoint(ctx: CheckContext):
    f, g = ctx.random(), ctx.random(1)
    fb = ctx.bank()
    worst = 0.0
    for j in fb.bands:
        left = project(fb, f, j).inner(g)
        right = f.inner(project(fb, g, j))
        worst = max(worst, abs(left - right) / (lp_norm(f, 2) * lp_norm(g, 2)))
    return worst, 1e-10


@check("adjacent_band_identity")
def _adjacent_bands(ctx: CheckContext):
    f = ctx.random()
    fb = ctx.bank()
    decomposition = decompose(fb, f)
    worst = 0.0
    for j in fb.bands[1:-1]:
        neighbours = decomposition.band(j - 1) + decomposition.band(j) + decomposition.band(j + 1)
        worst = max(worst, _relative(project(fb, neighbours, j).values, decomposition.band(j).values))
    return worst, 1e-10


@check("band_reality")
def _band_reality(ctx: CheckContext):
    f = ctx.random()
    fb = ctx.bank()
    spectrum = forward_spectrum(f)
    worst = 0.0
    for j in fb.bands:
        band = inverse_spectrum(SpectralField(f.grid, spectrum.coefficients * fb.symbol(j), CONVENTION), real=False)
        worst = max(worst, float(np.max(np.abs(band.values.imag))) / f.peak)
    return worst, 1e-10


# ---------------------------------------------------------------------------
# fraclap
# ---------------------------------------------------------------------------

@check("c_const_half")
def _c_half(ctx: CheckContext):
    return abs(c_const(1, 0.5) - 1.0 / (2.0 * math.pi)), 1e-14


@check("c_const_envelope")
def _c_envelope(ctx: CheckContext):
    s_values = [0.01] + [round(0.05 * i, 2) for i in range(1, 20)] + [0.99]
    worst = 0.0
    for N in (1, 2):
        ratios = c_const_envelope(N, s_values)
        worst = max(worst, float(np.max(np.maximum(ratios, 1.0 / ratios))))
    return worst, 10.0


@check("k_const")
def _k_const(ctx: CheckContext):
    errors = [abs(k_const(2.0, 2) - math.pi), abs(k_const(1.0, 2) - 4.0)]
    errors += [abs(k_const(p, 2) - k_const_closed(p, 2)) for p in (1.5, 3.0)]
    return max(errors), 1e-10


@check("semigroup")
def _semigroup(ctx: CheckContext):
    f = ctx.gaussian()
    twice = frac_laplacian_spectral(frac_laplacian_spectral(f, 0.3), 0.5)
    once = frac_laplacian_spectral(f, 0.8)
    return _relative(twice.values, once.values), 1e-10


@check("integral_vs_spectral")
def _integral_vs_spectral(ctx: CheckContext):
    f = ctx.gaussian()
    spectral = frac_laplacian_spectral(f, 1.0)
    integral = frac_laplacian_integral(f, 1.0, SELFTEST_GRID.period / 2.0)
    return _relative(integral.values, spectral.values), 0.02


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

@check("gagliardo_identity")
def _gagliardo_identity(ctx: CheckContext):
    f = ctx.gaussian()
    s = 0.5
    bessel2 = bessel_seminorm(f, s, 2.0) ** 2
    value = gagliardo(f, s, 2.0, 15.0)
    return abs(c_const(1, s) * value.completed ** 2 - bessel2) / bessel2, 0.03


@check("gagliardo_homogeneity")
def _homogeneity(ctx: CheckContext):
    f = ctx.random()
    base = gagliardo(f, 0.4, 1.5, 5.0).value
    scaled = gagliardo(f.scaled(3.0), 0.4, 1.5, 5.0).value
    return abs(scaled / base - 3.0) / 3.0, 1e-10


@check("gagliardo_dilation")
def _dilation(ctx: CheckContext):
    # the same samples on a torus of half the size are f(2x)
    f = ctx.random()
    compressed = SampledField(SELFTEST_GRID.scaled(0.5), f.values, is_real=True)
    worst = 0.0
    for s, p in ((0.3, 1.5), (0.6, 2.0), (0.8, 3.0)):
        base = gagliardo(f, s, p, 10.0).value
        scaled = gagliardo(compressed, s, p, 5.0).value
        worst = max(worst, abs((scaled / base) ** p / 2.0 ** (s * p - 1.0) - 1.0))
    return worst, 1e-9


@check("bessel_gaussian")
def _bessel_gaussian(ctx: CheckContext):
    return abs(bessel_seminorm(ctx.gaussian(), 0.5, 2.0) - 1.0), 5e-3


@check("bessel_triangle")
def _bessel_triangle(ctx: CheckContext):
    f, g = ctx.random(), ctx.random(1)
    worst = -math.inf
    for s, p in ((0.3, 1.5), (0.5, 2.0), (0.9, 3.0)):
        worst = max(worst, _excess(bessel_seminorm(f + g, s, p), bessel_seminorm(f, s, p) + bessel_seminorm(g, s, p)))
    return worst, 1e-12


@check("triebel_lizorkin_paths")
def _tl_paths(ctx: CheckContext):
    f = ctx.random()
    fb = ctx.bank()
    pointwise = triebel_lizorkin(f, fb, 0.6, 1.5, 1.5)
    bandwise = triebel_lizorkin_bandwise(f, fb, 0.6, 1.5)
    return abs(pointwise - bandwise) / bandwise, 1e-10


@check("triebel_lizorkin_q_monotone")
def _tl_monotone(ctx: CheckContext):
    f = ctx.random()
    fb = ctx.bank()
    decomposition = decompose(fb, f)
    values = [triebel_lizorkin(f, fb, 0.5, 2.0, q, decomposition) for q in (1.0, 1.5, 2.0, 3.0, 6.0, math.inf)]
    # observed <= 0 when every larger q gives a value no larger
    return max(_excess(later, earlier) for earlier, later in zip(values, values[1:])), 1e-12


@check("triebel_lizorkin_triangle")
def _tl_triangle(ctx: CheckContext):
    f, g = ctx.random(), ctx.random(1)
    fb = ctx.bank()
    worst = -math.inf
    for s, p, q in ((0.3, 1.5, 2.0), (0.5, 2.0, 2.0), (0.7, 3.0, 1.5)):
        total = triebel_lizorkin(f, fb, s, p, q) + triebel_lizorkin(g, fb, s, p, q)
        worst = max(worst, _excess(triebel_lizorkin(f + g, fb, s, p, q), total))
    return worst, 1e-12


@check("triebel_lizorkin_bessel_band")
def _tl_bessel_band(ctx: CheckContext):
    f = ctx.random()
    fb = ctx.bank()
    decomposition = decompose(fb, f)
    ratios = [triebel_lizorkin(f, fb, s, 2.0, 2.0, decomposition) / bessel_seminorm(f, s, 2.0)
              for s in (0.1, 0.3, 0.5, 0.7, 0.9)]
    # observed <= 1 when every ratio lies in [0.5, 2]
    return max(max(r / 2.0, 0.5 / r) for r in ratios), 1.0


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

@check("bbm_trend")
def _bbm_trend(ctx: CheckContext):
    report = bbm_sweep(ctx.sweep('bbm', [FieldDescriptor('gaussian')], (0.9, 0.95, 0.99)))
    if report.warnings:
        return math.inf, 0.05
    return report.summary['fields']['gaussian(w=1)']['limit_relative_error'], 0.05


@check("experiment_constants")
def _experiment_constants(ctx: CheckContext):
    family = [FieldDescriptor('gaussian'), ctx.random_descriptor()]
    embed = embedding_ratio(ctx.sweep('embed', family, (0.1, 0.5, 0.9)))
    fracbbm = frac_bbm_upper(ctx.sweep('fracbbm', family, (0.5, 0.9)), 0.5, 1.0)
    constants = [side['observed_constant'] for side in embed.summary['sides'].values()]
    constants.append(fracbbm.summary['observed_constant'])
    return max(constants), DEFAULT_CEILING


@check("refinement")
def _refinement(ctx: CheckContext):
    family = [FieldDescriptor('gaussian'), ctx.random_descriptor()]
    report = refinement_consistency(ctx.sweep('fracbbm', family, (0.5, 0.9)), theta=0.5, s=1.0)
    summary = report.summary
    return max(summary['worst_change_ratio'], summary['fracbbm_change'] / REFINEMENT_TOLERANCE), 1.0


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

def available_checks() -> List[str]:
    return list(_REGISTRY)


def run_check(name: str, seed: int = DEFAULT_SEED) -> CheckResult:
    try:
        observed, bound = _REGISTRY[name](CheckContext(seed))
    except LabError as exc:
        logger.warning("check %s raised %s", name, exc)
        return CheckResult(name, float('nan'), float('nan'), False, f"{type(exc).__name__}: {exc}")
    observed, bound = float(observed), float(bound)
    passed = math.isfinite(observed) and observed <= bound
    logger.info("%s %s: observed %.3e (bound %.1e)", "✅" if passed else "❌", name, observed, bound)
    return CheckResult(name, observed, bound, passed)


def run_selftest(names: Optional[Sequence[str]] = None, max_workers: int = 4,
                 seed: int = DEFAULT_SEED) -> List[CheckResult]:
    """Run the named checks (all by default) with one seed; results keep registry order"""
    names = list(names) if names else available_checks()
    unknown = [n for n in names if n not in _REGISTRY]
    if unknown:
        raise KeyError(f"unknown checks: {unknown}")

    results: List[Optional[CheckResult]] = [None] * len(names)
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            future_to_slot = {executor.submit(run_check, name, seed): slot for slot, name in enumerate(names)}
            for future in as_completed(future_to_slot):
                results[future_to_slot[future]] = future.result()
    else:
        results = [run_check(name, seed) for name in names]
    return results


def results_frame(results: Sequence[CheckResult]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in results], columns=['check', 'observed', 'bound', 'passed', 'detail'])


if __name__ == "__main__":
    outcome = run_selftest()
    print("🧪 Self-test")
    for result in outcome:
        print(f"   {'✅' if result.passed else '❌'} {result.check:<28} {result.observed:.3e} <= {result.bound:.1e}")
