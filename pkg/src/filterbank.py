"""
Dyadic Littlewood-Paley Filterbank
Radial partition of unity on the frequency grid, band projections and the
low-pass remainder.

Band j is generated by telescoping a low-pass profile Phi (Phi = 1 on
|r| <= 1, Phi = 0 on |r| >= 2, monotone in between):

    sigma_j(xi)  = Phi(2^-j |xi|) - Phi(2^-(j-1) |xi|)      j_min <= j <= j_max
    sigma_low(xi) = Phi(2^-(j_min-1) |xi|)

so sigma_low + sum_j sigma_j = Phi(2^-j_max |xi|), which is 1 up to 2^j_max.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.field import (
    CONVENTION,
    GridSpec,
    SampledField,
    SpectralField,
    forward_spectrum,
    inverse_spectrum,
    peak_bound,
)
from src.utils.errors import BandOutOfRange, DegenerateRange, NyquistOverflow, SpectralLeakage
from src.utils.report_writer import write_csv

logger = logging.getLogger(__name__)

LEAKAGE_THRESHOLD = 1e-8
PROFILES = ('smooth', 'polynomial')


def _smooth_transition(r: np.ndarray) -> np.ndarray:
    """C-infinity profile: exp-based smoothstep between r = 1 and r = 2"""
    r = np.asarray(r, dtype=np.float64)
    out = np.where(r <= 1.0, 1.0, 0.0)
    inside = (r > 1.0) & (r < 2.0)
    if np.any(inside):
        a = 2.0 - r[inside]
        b = r[inside] - 1.0
        ea = np.exp(-1.0 / a)
        eb = np.exp(-1.0 / b)
        out[inside] = ea / (ea + eb)
    return out


def _polynomial_transition(r: np.ndarray) -> np.ndarray:
    """C2 quintic smoothstep between r = 1 and r = 2 (cheaper, less smooth)"""
    r = np.asarray(r, dtype=np.float64)
    t = np.clip(r - 1.0, 0.0, 1.0)
    step = t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    out = 1.0 - step
    out[r <= 1.0] = 1.0
    out[r >= 2.0] = 0.0
    return out


_TRANSITIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    'smooth': _smooth_transition,
    'polynomial': _polynomial_transition,
}


def lowpass_profile(r: np.ndarray, profile: str = 'smooth') -> np.ndarray:
    """Phi(r) for radial argument r >= 0"""
    if profile not in _TRANSITIONS:
        raise ValueError(f"unknown profile {profile!r}; choose one of {PROFILES}")
    return _TRANSITIONS[profile](np.abs(r))


@dataclass(frozen=True, eq=False)
class Filterbank:
    """Band symbols sigma_j and the low-pass symbol on one grid"""
    grid: GridSpec
    j_min: int
    j_max: int
    profile: str
    symbols: Dict[int, np.ndarray]
    lowpass_symbol: np.ndarray

    @property
    def bands(self) -> List[int]:
        return list(range(self.j_min, self.j_max + 1))

    def symbol(self, j: int) -> np.ndarray:
        if j not in self.symbols:
            raise BandOutOfRange(f"band {j} outside [{self.j_min}, {self.j_max}]")
        return self.symbols[j]

    def total_symbol(self) -> np.ndarray:
        total = self.lowpass_symbol.copy()
        for j in self.bands:
            total = total + self.symbols[j]
        return total


@dataclass(frozen=True, eq=False)
class BandDecomposition:
    """Low-pass remainder plus the bands Delta_j f, j_min <= j <= j_max"""
    lowpass: SampledField
    bands: List[Tuple[int, SampledField]]

    def band(self, j: int) -> SampledField:
        for index, band in self.bands:
            if index == j:
                return band
        raise BandOutOfRange(f"band {j} not in decomposition")

    def band_array(self) -> np.ndarray:
        """Stack of band values, shape (number of bands, *grid.shape)"""
        return np.stack([band.values for _, band in self.bands])

    def reconstruct(self) -> SampledField:
        total = self.lowpass
        for _, band in self.bands:
            total = total + band
        return total


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def build_partition(grid: GridSpec, j_min: int, j_max: int, profile: str = 'smooth') -> Filterbank:
    """Build the dyadic partition of unity on grid for bands j_min..j_max"""
    j_min, j_max = int(j_min), int(j_max)
    if j_min >= j_max:
        raise DegenerateRange(f"need j_min < j_max, got [{j_min}, {j_max}]")
    if 2.0 ** (j_max + 1) > grid.nyquist:
        raise NyquistOverflow(
            f"band {j_max} reaches 2^{j_max + 1} = {2.0 ** (j_max + 1):g} beyond Nyquist {grid.nyquist:.4g}")

    xi = grid.frequency_magnitude()
    levels = {j: lowpass_profile(xi * 2.0 ** (-j), profile) for j in range(j_min - 1, j_max + 1)}
    symbols = {j: _frozen(levels[j] - levels[j - 1]) for j in range(j_min, j_max + 1)}

    logger.debug("filterbank bands %d..%d on %s grid (profile=%s)", j_min, j_max, grid.shape, profile)
    return Filterbank(grid, j_min, j_max, profile, symbols, _frozen(levels[j_min - 1]))


def partition_residue(fb: Filterbank) -> float:
    """max |sigma_low + sum sigma_j - 1| over frequencies |xi| <= 2^j_max"""
    xi = fb.grid.frequency_magnitude()
    admissible = xi <= 2.0 ** fb.j_max
    return float(np.max(np.abs(fb.total_symbol()[admissible] - 1.0)))


def _filtered(fb: Filterbank, spectrum: SpectralField, symbol: np.ndarray) -> SampledField:
    product = SpectralField(fb.grid, spectrum.coefficients * symbol, CONVENTION, is_real=spectrum.is_real)
    return inverse_spectrum(product, reference=peak_bound(spectrum))


def project(fb: Filterbank, f: SampledField, j: int) -> SampledField:
    """Delta_j f: spectral multiplication by sigma_j"""
    return _filtered(fb, forward_spectrum(f), fb.symbol(j))


def low_pass(fb: Filterbank, f: SampledField) -> SampledField:
    """Low-pass remainder: spectral multiplication by sigma_low"""
    return _filtered(fb, forward_spectrum(f), fb.lowpass_symbol)


def leakage_fraction(fb: Filterbank, f: SampledField, spectrum: Optional[SpectralField] = None) -> float:
    """Energy fraction of f at |xi| > 2^(j_max - 1)"""
    spectrum = spectrum or forward_spectrum(f)
    power = np.abs(spectrum.coefficients) ** 2
    total = float(np.sum(power))
    if total == 0.0:
        return 0.0
    outside = fb.grid.frequency_magnitude() > 2.0 ** (fb.j_max - 1)
    return float(np.sum(power[outside]) / total)


def ensure_band_limited(fb: Filterbank, f: SampledField, spectrum: Optional[SpectralField] = None):
    fraction = leakage_fraction(fb, f, spectrum)
    if fraction >= LEAKAGE_THRESHOLD:
        raise SpectralLeakage(
            f"{fraction:.3e} of the spectral energy lies above 2^{fb.j_max - 1}; raise j_max or refine the grid")


def decompose(fb: Filterbank, f: SampledField, max_workers: int = 4) -> BandDecomposition:
    """Split f into low-pass and bands; bands are computed concurrently"""
    spectrum = forward_spectrum(f)
    ensure_band_limited(fb, f, spectrum)

    bands: List[Optional[SampledField]] = [None] * len(fb.bands)
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            future_to_slot = {
                executor.submit(_filtered, fb, spectrum, fb.symbols[j]): slot
                for slot, j in enumerate(fb.bands)
            }
            for future in as_completed(future_to_slot):
                bands[future_to_slot[future]] = future.result()
    else:
        for slot, j in enumerate(fb.bands):
            bands[slot] = _filtered(fb, spectrum, fb.symbols[j])

    lowpass = _filtered(fb, spectrum, fb.lowpass_symbol)
    return BandDecomposition(lowpass, list(zip(fb.bands, bands)))


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def symbols_frame(fb: Filterbank) -> pd.DataFrame:
    """Symbol values against |xi| (one row per distinct grid magnitude)"""
    xi = fb.grid.frequency_magnitude().ravel()
    magnitudes, first = np.unique(np.round(xi, 12), return_index=True)
    columns = {'xi': xi[first], 'lowpass': fb.lowpass_symbol.ravel()[first]}
    for j in fb.bands:
        columns[f'band_{j}'] = fb.symbols[j].ravel()[first]
    return pd.DataFrame(columns)


def export_symbols_csv(path: Union[str, Path], fb: Filterbank) -> Path:
    header = [f"filterbank j_min={fb.j_min} j_max={fb.j_max} profile={fb.profile}",
              "columns: xi = angular frequency magnitude, lowpass symbol, one column per band"]
    return write_csv(path, symbols_frame(fb), header)


# Quick smoke demo
if __name__ == "__main__":
    from src.field import FieldDescriptor, lp_norm, sample

    grid = GridSpec(1, 4096, 40.0)
    fb = build_partition(grid, -3, 7)
    f = sample(FieldDescriptor('gaussian'), grid)
    decomposition = decompose(fb, f)
    error = lp_norm(decomposition.reconstruct() - f, 2) / lp_norm(f, 2)

    print("🧪 Filterbank smoke test")
    print(f"   bands            : {fb.bands}")
    print(f"   partition residue: {partition_residue(fb):.3e}")
    print(f"   reconstruction   : {error:.3e}")
