"""
Seminorms
Gagliardo [f]_{W^{s,p}}, Triebel-Lizorkin [f]_{F^s_{p,q}}, Bessel-potential
||(-Delta)^{s/2} f||_p and the two mixed dyadic double sums.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.field import (
    GridSpec,
    SampledField,
    ensure_resolved,
    gradient_lp_norm,
    lp_norm,
    lp_norm_values,
)
from src.filterbank import BandDecomposition, Filterbank, decompose
from src.fraclap import ball_radius, frac_laplacian_spectral, k_const, sphere_measure
from src.utils.errors import CutoffExceedsHalfPeriod, ParameterOutOfRange, SpectralUnderresolution

logger = logging.getLogger(__name__)

# z_cut = 15 on the default period L = 40
DEFAULT_CUTOFF_FRACTION = 0.375


@dataclass(frozen=True)
class NormSpec:
    """Exponent triple (s, p, q); q is None for Gagliardo and may be inf"""
    s: float
    p: float
    q: Optional[float] = None

    def __post_init__(self):
        s, p = float(self.s), float(self.p)
        if not (0.0 <= s < 2.0):
            raise ParameterOutOfRange(f"s must lie in [0, 2), got {s}")
        if not (p > 1.0 and math.isfinite(p)):
            raise ParameterOutOfRange(f"p must lie in (1, inf), got {p}")
        object.__setattr__(self, 's', s)
        object.__setattr__(self, 'p', p)
        if self.q is not None:
            q = float(self.q)
            if math.isnan(q) or q < 1.0:
                raise ParameterOutOfRange(f"q must lie in [1, inf], got {q}")
            object.__setattr__(self, 'q', q)

    @staticmethod
    def _conjugate(e: float) -> float:
        if e == 1.0:
            return math.inf
        if math.isinf(e):
            return 1.0
        return e / (e - 1.0)

    @property
    def p_conjugate(self) -> float:
        return self._conjugate(self.p)

    @property
    def q_conjugate(self) -> Optional[float]:
        return None if self.q is None else self._conjugate(self.q)

    def require_gagliardo(self) -> 'NormSpec':
        if not (0.0 < self.s < 1.0):
            raise ParameterOutOfRange(f"Gagliardo seminorm needs s in (0, 1), got {self.s}")
        return self


@dataclass(frozen=True)
class SeminormValue:
    """Computed seminorm with its far-field accounting

    The continuum value lies in [value, upper] up to quadrature error;
    completed adds the far field estimated from the outer shell.
    """
    value: float
    tail_bracket: float = 0.0
    cutoff: float = 0.0
    tail_estimate: float = 0.0
    p: float = 2.0

    def _combine(self, tail: float) -> float:
        return float((self.value ** self.p + tail ** self.p) ** (1.0 / self.p))

    @property
    def completed(self) -> float:
        return self._combine(self.tail_estimate)

    @property
    def upper(self) -> float:
        return self._combine(self.tail_bracket)

    def to_dict(self) -> dict:
        return {
            'value': self.value,
            'tail_bracket': self.tail_bracket,
            'tail_estimate': self.tail_estimate,
            'completed': self.completed,
            'cutoff': self.cutoff,
        }


# ---------------------------------------------------------------------------
# Gagliardo
# ---------------------------------------------------------------------------

def default_cutoff(grid: GridSpec) -> float:
    return DEFAULT_CUTOFF_FRACTION * grid.period


def _half_space_offsets(grid: GridSpec, z_cut: float, skip_block: bool) -> np.ndarray:
    """One representative k of every pair {k, -k} with 0 < |k h| <= z_cut"""
    reach = min(int(math.floor(z_cut / grid.spacing + 1e-9)), grid.points_per_axis // 2)
    axis = np.arange(-reach, reach + 1)
    mesh = np.meshgrid(*([axis] * grid.dim), indexing='ij')
    k = np.stack([m.ravel() for m in mesh], axis=1)

    radius = grid.spacing * np.sqrt(np.sum(k.astype(np.float64) ** 2, axis=1))
    keep = (radius > 0) & (radius <= z_cut * (1.0 + 1e-12))
    if grid.dim == 1:
        keep &= k[:, 0] > 0
    else:
        keep &= (k[:, 0] > 0) | ((k[:, 0] == 0) & (k[:, 1] > 0))
    if skip_block:
        keep &= np.max(np.abs(k), axis=1) > 1
    return k[keep]


class GagliardoQuadrature:
    """Shift-difference profile D(z) = ||f(. + z) - f||_p^p of one field

    D does not depend on s, so one profile serves a whole s-sweep.
    """

    def __init__(self, f: SampledField, p: float, z_cut: Optional[float] = None, max_workers: int = 4):
        p = float(p)
        if not (p > 1.0 and math.isfinite(p)):
            raise ParameterOutOfRange(f"p must lie in (1, inf), got {p}")
        grid = f.grid
        z_cut = default_cutoff(grid) if z_cut is None else float(z_cut)
        if not z_cut > 0:
            raise ParameterOutOfRange(f"z_cut must be positive, got {z_cut}")
        if z_cut > grid.period / 2.0 * (1.0 + 1e-12):
            raise CutoffExceedsHalfPeriod(f"z_cut={z_cut:g} exceeds half the period L/2={grid.period / 2:g}")

        self.field = f
        self.grid = grid
        self.p = p
        self.z_cut = z_cut
        self.max_workers = max_workers

        self.local_model = True
        try:
            ensure_resolved(f, "Gagliardo near-field model")
        except SpectralUnderresolution as exc:
            self.local_model = False
            logger.warning("summing the nearest-neighbour block on the lattice instead: %s", exc)

        self.offsets = _half_space_offsets(grid, z_cut, skip_block=self.local_model)
        self.radii = grid.spacing * np.sqrt(np.sum(self.offsets.astype(np.float64) ** 2, axis=1))
        self.profile = self._compute_profile()

        self.norm_p = lp_norm(f, p) ** p
        self.gradient_p = gradient_lp_norm(f, p) ** p if self.local_model else 0.0
        logger.debug("Gagliardo profile: %d offset pairs, z_cut=%g, local model=%s",
                     len(self.offsets), z_cut, self.local_model)

    def _profile_chunk(self, offsets: np.ndarray) -> np.ndarray:
        values = self.field.values
        axes = tuple(range(self.grid.dim))
        out = np.empty(len(offsets))
        for i, k in enumerate(offsets):
            difference = np.roll(values, shift=tuple(-int(c) for c in k), axis=axes) - values
            out[i] = lp_norm_values(difference, self.grid, self.p) ** self.p
        return out

    def _compute_profile(self) -> np.ndarray:
        if len(self.offsets) == 0:
            return np.zeros(0)
        if not self.max_workers or self.max_workers <= 1:
            return self._profile_chunk(self.offsets)

        chunks = np.array_split(self.offsets, self.max_workers)
        results: List[Optional[np.ndarray]] = [None] * len(chunks)
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_slot = {executor.submit(self._profile_chunk, chunk): slot
                              for slot, chunk in enumerate(chunks)}
            for future in as_completed(future_to_slot):
                results[future_to_slot[future]] = future.result()
        return np.concatenate(results)

    def near_field(self, s: float) -> float:
        """First-order model over the ball replacing the 3^N block"""
        if not self.local_model:
            return 0.0
        exponent = self.p * (1.0 - s)
        rho = ball_radius(self.grid)
        return self.gradient_p * k_const(self.p, self.grid.dim) * rho ** exponent / exponent

    def _tail_factor(self, s: float) -> float:
        sp = s * self.p
        return sphere_measure(self.grid.dim) * self.z_cut ** (-sp) / sp

    def evaluate(self, s: float) -> SeminormValue:
        NormSpec(s, self.p).require_gagliardo()
        N = self.grid.dim
        weights = 2.0 * self.grid.cell_volume * self.radii ** (-(N + s * self.p))
        lattice = float(np.sum(weights * self.profile))
        total = lattice + self.near_field(s)

        tail_factor = self._tail_factor(s)
        bracket_p = 2.0 ** self.p * self.norm_p * tail_factor
        outer = self.radii > self.z_cut / 2.0
        if np.any(outer):
            estimate_p = float(np.mean(self.profile[outer])) * tail_factor
        elif len(self.profile):
            estimate_p = float(self.profile[-1]) * tail_factor
        else:
            estimate_p = 0.0
        estimate_p = min(estimate_p, bracket_p)

        inv = 1.0 / self.p
        return SeminormValue(
            value=max(total, 0.0) ** inv,
            tail_bracket=bracket_p ** inv,
            cutoff=self.z_cut,
            tail_estimate=estimate_p ** inv,
            p=self.p,
        )


def gagliardo(f: SampledField, s: float, p: float, z_cut: Optional[float] = None,
              max_workers: int = 4) -> SeminormValue:
    """[f]_{W^{s,p}} by lattice quadrature over offsets |z| <= z_cut"""
    NormSpec(s, p).require_gagliardo()
    return GagliardoQuadrature(f, p, z_cut, max_workers=max_workers).evaluate(s)


# ---------------------------------------------------------------------------
# Spectral seminorms
# ---------------------------------------------------------------------------

def _weighted_bands(f: SampledField, fb: Filterbank, s: float,
                    decomposition: Optional[BandDecomposition] = None) -> np.ndarray:
    """|2^{js} Delta_j f(x)| stacked over bands"""
    decomposition = decomposition or decompose(fb, f)
    weights = 2.0 ** (s * np.array(fb.bands, dtype=np.float64))
    weights = weights.reshape((-1,) + (1,) * f.grid.dim)
    return weights * np.abs(decomposition.band_array())


def triebel_lizorkin(f: SampledField, fb: Filterbank, s: float, p: float, q: float,
                     decomposition: Optional[BandDecomposition] = None) -> float:
    """(int (sum_j 2^{jsq} |Delta_j f|^q)^{p/q} dx)^{1/p}, j over the bank"""
    spec = NormSpec(s, p, q)
    bands = _weighted_bands(f, fb, spec.s, decomposition)
    inner = np.linalg.norm(bands, ord=spec.q, axis=0)
    return lp_norm_values(inner, f.grid, spec.p)


def triebel_lizorkin_bandwise(f: SampledField, fb: Filterbank, s: float, p: float,
                              decomposition: Optional[BandDecomposition] = None) -> float:
    """The q = p case as (sum_j 2^{jsp} ||Delta_j f||_p^p)^{1/p}"""
    spec = NormSpec(s, p, p)
    bands = _weighted_bands(f, fb, spec.s, decomposition)
    norms = np.array([lp_norm_values(band, f.grid, spec.p) for band in bands])
    return float(np.linalg.norm(norms, ord=spec.p))


def bessel_seminorm(f: SampledField, s: float, p: float) -> float:
    """||(-Delta)^{s/2} f||_p (the DC mode is dropped)"""
    spec = NormSpec(s, p)
    return lp_norm(frac_laplacian_spectral(f, spec.s), spec.p)


# ---------------------------------------------------------------------------
# Mixed dyadic sums
# ---------------------------------------------------------------------------

def geometric_sum_high(s: float, p: float) -> float:
    """sum_{j >= 0} 2^{-jsp} = 1 / (1 - 2^{-sp})"""
    if s * p <= 0:
        raise ParameterOutOfRange(f"need s p > 0, got s={s}, p={p}")
    return 1.0 / (1.0 - 2.0 ** (-s * p))


def geometric_sum_low(s: float, p: float) -> float:
    """sum_{j <= 0} 2^{j(1-s)p} = 1 / (1 - 2^{-(1-s)p}), the low-sum weight"""
    rate = (1.0 - s) * p
    if rate <= 0:
        raise ParameterOutOfRange(f"need (1 - s) p > 0, got s={s}, p={p}")
    return 1.0 / (1.0 - 2.0 ** (-rate))


def geometric_sum_truncated(rate: float, terms: int) -> float:
    """sum_{j=0}^{terms-1} 2^{-j rate}"""
    if terms <= 0:
        return 0.0
    if rate == 0:
        return float(terms)
    ratio = 2.0 ** (-rate)
    return float((1.0 - ratio ** terms) / (1.0 - ratio))


def mixed_sum_upper(f: SampledField, fb: Filterbank, s: float, p: float) -> Tuple[float, float]:
    """The two mixed sums bounding [f]_{W^{s,p}} from above

    term_high: sum_k int (sum_{j>=0} |2^{ks} Delta_{k+j} f|^2)^{p/2}
    term_low:  sum_k int (sum_{j<=0} |2^j 2^{ks} Delta_{k+j} f|^2)^{p/2}
    both with k and k+j inside the bank, each raised to 1/p.
    """
    spec = NormSpec(s, p)
    squares = np.abs(decompose(fb, f).band_array()) ** 2
    k = np.array(fb.bands, dtype=np.float64).reshape((-1,) + (1,) * f.grid.dim)

    # sum over m >= k of |Delta_m|^2, and sum over m <= k of 4^m |Delta_m|^2
    upper_tail = np.cumsum(squares[::-1], axis=0)[::-1]
    lower_head = np.cumsum(4.0 ** k * squares, axis=0)

    high_inner = 4.0 ** (k * spec.s) * upper_tail
    low_inner = 4.0 ** (k * (spec.s - 1.0)) * lower_head

    def _sum_over_k(inner: np.ndarray) -> float:
        total = sum(lp_norm_values(np.sqrt(row), f.grid, spec.p) ** spec.p for row in inner)
        return float(total ** (1.0 / spec.p))

    return _sum_over_k(high_inner), _sum_over_k(low_inner)


# Quick smoke demo
if __name__ == "__main__":
    from src.field import FieldDescriptor, sample
    from src.filterbank import build_partition
    from src.fraclap import c_const

    grid = GridSpec(1, 4096, 40.0)
    f = sample(FieldDescriptor('gaussian'), grid)
    fb = build_partition(grid, -3, 7)
    result = gagliardo(f, 0.5, 2.0, 15.0)

    print("🧪 Seminorm smoke test")
    print(f"   [f]_W(1/2,2)       : {result.value:.6f} (completed {result.completed:.6f}, tail <= {result.tail_bracket:.2e})")
    print(f"   c * [f]^2          : {c_const(1, 0.5) * result.completed ** 2:.6f}")
    print(f"   ||(-D)^(1/4) f||^2 : {bessel_seminorm(f, 0.5, 2.0) ** 2:.6f}")
    print(f"   [f]_F(1/2; 2,2)    : {triebel_lizorkin(f, fb, 0.5, 2.0, 2.0):.6f}")
