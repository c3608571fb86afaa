"""
Sampled Fields on a Periodic Grid
Grids, test-function sampling, spectral transforms, Lp quadrature and
spectral differentiation. Everything else in the lab is built on this module.

Fourier convention (tag "unitary-angular"), documented here and nowhere else:

    x_j  = (j - n/2) * h                      per axis, h = L / n
    F(xi) = h^N (2 pi)^(-N/2) sum_j f(x_j) exp(-i xi . x_j),   xi in (2 pi / L) Z^N

so that ||f||_2^2 = h^N sum |f_j|^2 = (2 pi / L)^N sum |F(xi)|^2 and the
Gaussian exp(-|x|^2) maps to 2^(-N/2) exp(-|xi|^2 / 4).
"""

import logging
import math
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import fft as sp_fft

from src.utils.errors import (
    InsufficientDecay,
    InvalidExponent,
    InvalidField,
    InvalidGrid,
    SpectralUnderresolution,
    UnsupportedDescriptor,
)
from src.utils.report_writer import write_bytes, write_csv

logger = logging.getLogger(__name__)

CONVENTION = "unitary-angular"

# Sampling guards
DECAY_THRESHOLD = 1e-8
REAL_TOLERANCE = 1e-10
RESOLUTION_THRESHOLD = 1e-6

SUPPORTED_KINDS = ('gaussian', 'single_frequency', 'smooth_bump', 'random_bandlimited', 'hat', 'zero')


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid of n^N points on a torus of side L"""
    dim: int = 1
    points_per_axis: int = 1024
    period: float = 40.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InvalidGrid(f"dim must be 1 or 2, got {self.dim}")
        if not isinstance(self.points_per_axis, (int, np.integer)) or not _is_power_of_two(int(self.points_per_axis)):
            raise InvalidGrid(f"points_per_axis must be a power of two, got {self.points_per_axis}")
        if not (self.period > 0 and math.isfinite(self.period)):
            raise InvalidGrid(f"period must be positive, got {self.period}")
        object.__setattr__(self, 'points_per_axis', int(self.points_per_axis))
        object.__setattr__(self, 'period', float(self.period))

    @property
    def spacing(self) -> float:
        return self.period / self.points_per_axis

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.dim

    @property
    def cell_volume(self) -> float:
        """h^N, the quadrature weight of every grid point"""
        return self.spacing ** self.dim

    @property
    def frequency_step(self) -> float:
        return 2.0 * math.pi / self.period

    @property
    def frequency_weight(self) -> float:
        """(2 pi / L)^N, the Parseval weight of every spectral coefficient"""
        return self.frequency_step ** self.dim

    @property
    def nyquist(self) -> float:
        """Largest resolved angular frequency per axis, pi n / L"""
        return math.pi * self.points_per_axis / self.period

    def axis_coordinates(self) -> np.ndarray:
        j = np.arange(self.points_per_axis)
        return (j - self.points_per_axis // 2) * self.spacing

    def coordinates(self) -> List[np.ndarray]:
        axis = self.axis_coordinates()
        return list(np.meshgrid(*([axis] * self.dim), indexing='ij'))

    def axis_modes(self) -> np.ndarray:
        """Integer modes k in FFT order, -n/2 <= k < n/2"""
        n = self.points_per_axis
        return np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)

    def axis_frequencies(self) -> np.ndarray:
        return self.frequency_step * self.axis_modes()

    def frequencies(self) -> List[np.ndarray]:
        axis = self.axis_frequencies()
        return list(np.meshgrid(*([axis] * self.dim), indexing='ij'))

    def frequency_magnitude(self) -> np.ndarray:
        """|xi| on the frequency grid (FFT order)"""
        return np.sqrt(sum(k * k for k in self.frequencies()))

    def scaled(self, factor: float) -> 'GridSpec':
        """Same lattice with the period scaled by factor"""
        return GridSpec(self.dim, self.points_per_axis, self.period * factor)

    def refined(self) -> 'GridSpec':
        return GridSpec(self.dim, self.points_per_axis * 2, self.period)


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SampledField:
    """Complex samples on a grid; is_real tags fields with zero imaginary part"""
    grid: GridSpec
    values: np.ndarray
    is_real: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128)
        if values.size != self.grid.size:
            raise InvalidField(f"expected {self.grid.size} samples, got {values.size}")
        values = values.reshape(self.grid.shape)

        if self.is_real:
            peak = float(np.max(np.abs(values))) if values.size else 0.0
            residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
            if residue > REAL_TOLERANCE * peak:
                raise InvalidField(f"field tagged real has imaginary residue {residue:.3e} (peak {peak:.3e})")
            values = values.real.astype(np.complex128)

        object.__setattr__(self, 'values', _freeze(values))

    @classmethod
    def from_real(cls, grid: GridSpec, values: np.ndarray) -> 'SampledField':
        return cls(grid, np.asarray(values, dtype=np.float64), is_real=True)

    @classmethod
    def zeros(cls, grid: GridSpec) -> 'SampledField':
        return cls(grid, np.zeros(grid.shape), is_real=True)

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def real_values(self) -> np.ndarray:
        return self.values.real

    def _check_grid(self, other: 'SampledField'):
        if other.grid != self.grid:
            raise InvalidField("fields live on different grids")

    def __add__(self, other: 'SampledField') -> 'SampledField':
        self._check_grid(other)
        return SampledField(self.grid, self.values + other.values, self.is_real and other.is_real)

    def __sub__(self, other: 'SampledField') -> 'SampledField':
        self._check_grid(other)
        return SampledField(self.grid, self.values - other.values, self.is_real and other.is_real)

    def scaled(self, factor: complex) -> 'SampledField':
        keep_real = self.is_real and complex(factor).imag == 0
        return SampledField(self.grid, self.values * factor, keep_real)

    def inner(self, other: 'SampledField') -> complex:
        """L2 inner product <self, other> = h^N sum self * conj(other)"""
        self._check_grid(other)
        return complex(self.grid.cell_volume * np.sum(self.values * np.conj(other.values)))

    def mean(self) -> complex:
        return complex(np.mean(self.values))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a SampledField (FFT order) under CONVENTION"""
    grid: GridSpec
    coefficients: np.ndarray
    convention: str = CONVENTION
    is_real: bool = False

    def __post_init__(self):
        if self.convention != CONVENTION:
            raise InvalidField(f"unknown convention tag {self.convention!r}")
        coefficients = np.array(self.coefficients, dtype=np.complex128)
        if coefficients.size != self.grid.size:
            raise InvalidField(f"expected {self.grid.size} coefficients, got {coefficients.size}")
        object.__setattr__(self, 'coefficients', _freeze(coefficients.reshape(self.grid.shape)))

    def energy(self) -> float:
        """Convention-weighted spectral energy; equals ||f||_2^2 (Parseval)"""
        return float(self.grid.frequency_weight * np.sum(np.abs(self.coefficients) ** 2))


# ---------------------------------------------------------------------------
# Test-function descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldDescriptor:
    """Analytic test function: one of SUPPORTED_KINDS plus its parameters"""
    kind: str = 'gaussian'
    center: Tuple[float, ...] = (0.0,)
    width: float = 1.0
    radius: float = 3.0
    mode: Tuple[int, ...] = (1,)
    seed: int = 42
    j_lo: int = -1
    j_hi: int = 2

    def __post_init__(self):
        if self.kind not in SUPPORTED_KINDS:
            raise UnsupportedDescriptor(f"unknown descriptor {self.kind!r}; supported: {', '.join(SUPPORTED_KINDS)}")
        object.__setattr__(self, 'center', tuple(float(c) for c in np.atleast_1d(self.center)))
        object.__setattr__(self, 'mode', tuple(int(m) for m in np.atleast_1d(self.mode)))

    @property
    def label(self) -> str:
        if self.kind == 'gaussian':
            return f"gaussian(w={self.width:g})"
        if self.kind == 'smooth_bump':
            return f"smooth_bump(r={self.radius:g})"
        if self.kind == 'hat':
            return f"hat(w={self.width:g})"
        if self.kind == 'single_frequency':
            return f"single_frequency(m={','.join(map(str, self.mode))})"
        if self.kind == 'zero':
            return "zero"
        return f"random_bandlimited(seed={self.seed},j={self.j_lo}..{self.j_hi})"

    @classmethod
    def parse(cls, text: str) -> 'FieldDescriptor':
        """Parse 'kind' or 'kind:key=value,key=value' (tuples as 'a;b')"""
        text = text.strip()
        kind, _, rest = text.partition(':')
        params: Dict[str, object] = {}
        for item in filter(None, (part.strip() for part in rest.split(','))):
            key, sep, raw = item.partition('=')
            if not sep:
                raise UnsupportedDescriptor(f"malformed descriptor parameter {item!r} in {text!r}")
            key = key.strip()
            parts = [p for p in re.split(r'[;\s]+', raw.strip()) if p]
            if not parts:
                raise UnsupportedDescriptor(f"descriptor parameter {key!r} has no value in {text!r}")
            if key in ('center',):
                params[key] = tuple(float(p) for p in parts)
            elif key in ('mode',):
                params[key] = tuple(int(p) for p in parts)
            elif key in ('seed', 'j_lo', 'j_hi'):
                params[key] = int(parts[0])
            elif key in ('width', 'radius'):
                params[key] = float(parts[0])
            else:
                raise UnsupportedDescriptor(f"unknown descriptor parameter {key!r}")
        return cls(kind=kind.strip(), **params)


def _periodic_displacement(grid: GridSpec, center: Sequence[float]) -> List[np.ndarray]:
    """Per-axis displacement from center, wrapped into [-L/2, L/2)"""
    coords = grid.coordinates()
    center = list(center) * grid.dim if len(center) == 1 else list(center)
    if len(center) != grid.dim:
        raise UnsupportedDescriptor(f"center has {len(center)} components for a {grid.dim}-d grid")
    half = grid.period / 2.0
    return [np.mod(x - c + half, grid.period) - half for x, c in zip(coords, center)]


def _radial_profile(kind: str, r: np.ndarray, descriptor: FieldDescriptor) -> np.ndarray:
    if kind == 'gaussian':
        return np.exp(-(r / descriptor.width) ** 2)
    if kind == 'smooth_bump':
        t2 = (r / descriptor.radius) ** 2
        inside = t2 < 1.0
        out = np.zeros_like(r, dtype=np.float64)
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - t2[inside]))
        return out
    if kind == 'hat':
        return np.maximum(0.0, 1.0 - r / descriptor.width)
    raise UnsupportedDescriptor(kind)


def _check_decay(descriptor: FieldDescriptor, grid: GridSpec):
    """Radial profiles must be negligible at distance L/2 from their center"""
    boundary = _radial_profile(descriptor.kind, np.array([grid.period / 2.0]), descriptor)[0]
    if boundary > DECAY_THRESHOLD:
        raise InsufficientDecay(
            f"{descriptor.label} is {boundary:.3e} of its peak at distance L/2={grid.period / 2:g}; "
            f"enlarge the period")


def _random_bandlimited(descriptor: FieldDescriptor, grid: GridSpec) -> np.ndarray:
    xi = grid.frequency_magnitude()
    mask = (xi >= 2.0 ** descriptor.j_lo) & (xi <= 2.0 ** descriptor.j_hi)
    if not np.any(mask):
        raise UnsupportedDescriptor(
            f"no grid frequency in [2^{descriptor.j_lo}, 2^{descriptor.j_hi}] for frequency step {grid.frequency_step:.4g}")
    if 2.0 ** descriptor.j_hi > grid.nyquist:
        raise UnsupportedDescriptor(f"band 2^{descriptor.j_hi} exceeds Nyquist {grid.nyquist:.4g}")

    rng = np.random.default_rng(descriptor.seed)
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    values = sp_fft.ifftn(np.where(mask, noise, 0.0)).real
    peak = np.max(np.abs(values))
    return values / peak if peak > 0 else values


def sample(descriptor: Union[FieldDescriptor, str], grid: GridSpec) -> SampledField:
    """Sample a built-in test function on the grid"""
    if isinstance(descriptor, str):
        descriptor = FieldDescriptor.parse(descriptor)

    if descriptor.kind == 'single_frequency':
        mode = list(descriptor.mode) * grid.dim if len(descriptor.mode) == 1 else list(descriptor.mode)
        if len(mode) != grid.dim:
            raise UnsupportedDescriptor(f"mode has {len(mode)} components for a {grid.dim}-d grid")
        phase = sum(grid.frequency_step * m * x for m, x in zip(mode, grid.coordinates()))
        return SampledField(grid, np.exp(1j * phase), is_real=False)

    if descriptor.kind == 'random_bandlimited':
        return SampledField.from_real(grid, _random_bandlimited(descriptor, grid))

    if descriptor.kind == 'zero':
        return SampledField.zeros(grid)

    _check_decay(descriptor, grid)
    displacement = _periodic_displacement(grid, descriptor.center)
    r = np.sqrt(sum(d * d for d in displacement))
    return SampledField.from_real(grid, _radial_profile(descriptor.kind, r, descriptor))


# ---------------------------------------------------------------------------
# Spectral transforms
# ---------------------------------------------------------------------------

def _phase(grid: GridSpec) -> np.ndarray:
    """exp(-i xi . x_0) with x_0 = -L/2 per axis, i.e. (-1)^(k_1 + ... + k_N)"""
    parity = sum(np.meshgrid(*([grid.axis_modes()] * grid.dim), indexing='ij'))
    return np.where(parity % 2 == 0, 1.0, -1.0)


def _forward_scale(grid: GridSpec) -> float:
    return grid.cell_volume / (2.0 * math.pi) ** (grid.dim / 2.0)


def forward_spectrum(f: SampledField) -> SpectralField:
    """Discrete Fourier coefficients of f under CONVENTION"""
    coefficients = _forward_scale(f.grid) * _phase(f.grid) * sp_fft.fftn(f.values)
    return SpectralField(f.grid, coefficients, CONVENTION, is_real=f.is_real)


def peak_bound(spectrum: SpectralField) -> float:
    """Upper bound on the sup norm of the field behind spectrum"""
    grid = spectrum.grid
    return float(np.sum(np.abs(spectrum.coefficients))) / (grid.size * _forward_scale(grid))


def inverse_spectrum(spectrum: SpectralField, real: Optional[bool] = None,
                     reference: Optional[float] = None) -> SampledField:
    """Exact inverse of forward_spectrum

    reference is the peak the imaginary residue of a real result is measured
    against; it defaults to the peak of the result itself. Filters pass the
    peak of their input so near-empty outputs are not flagged.
    """
    grid = spectrum.grid
    values = sp_fft.ifftn(spectrum.coefficients * _phase(grid)) / _forward_scale(grid)
    is_real = spectrum.is_real if real is None else real
    if is_real:
        values = _drop_imaginary(values, reference)
    return SampledField(grid, values, is_real=is_real)


def _drop_imaginary(values: np.ndarray, reference: Optional[float] = None) -> np.ndarray:
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    scale = max(peak, reference or 0.0, np.finfo(float).tiny)
    if residue > REAL_TOLERANCE * scale:
        logger.warning("imaginary residue %.3e on a real field (peak %.3e)", residue, scale)
    return values.real


def apply_multiplier(f: SampledField, symbol: np.ndarray, even_real: bool = True) -> SampledField:
    """Multiply the spectrum of f by symbol and transform back

    even_real marks symbols that are real and even in xi, which keep real
    fields real.
    """
    spectrum = forward_spectrum(f)
    product = SpectralField(f.grid, spectrum.coefficients * symbol, CONVENTION, is_real=f.is_real and even_real)
    reference = peak_bound(spectrum) * float(np.max(np.abs(symbol), initial=0.0))
    return inverse_spectrum(product, reference=reference)


def refine_field(f: SampledField) -> SampledField:
    """Trigonometric interpolation of f onto grid.refined() (2n points, same period)

    Coefficients keep their physical frequency, so a band-limited field is the
    same function on both grids.
    """
    fine = f.grid.refined()
    embedded = np.mod(f.grid.axis_modes(), fine.points_per_axis)
    coefficients = np.zeros(fine.shape, dtype=np.complex128)
    coefficients[np.ix_(*([embedded] * fine.dim))] = forward_spectrum(f).coefficients
    spectrum = SpectralField(fine, coefficients, CONVENTION, is_real=f.is_real)
    return inverse_spectrum(spectrum, reference=peak_bound(spectrum))


# ---------------------------------------------------------------------------
# Norms and shifts
# ---------------------------------------------------------------------------

def _validate_exponent(p: float) -> float:
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise InvalidExponent(f"exponent p must be >= 1 (or inf), got {p}")
    return p


def lp_norm_values(values: np.ndarray, grid: GridSpec, p: float) -> float:
    """(h^N sum |v|^p)^(1/p), or max |v| for p = inf"""
    p = _validate_exponent(p)
    magnitude = np.abs(values)
    if math.isinf(p):
        return float(np.max(magnitude)) if magnitude.size else 0.0
    peak = float(np.max(magnitude)) if magnitude.size else 0.0
    if peak == 0.0:
        return 0.0
    # Factor out the peak to keep |v|^p inside floating range for large p
    total = grid.cell_volume * np.sum((magnitude / peak) ** p)
    return float(peak * total ** (1.0 / p))


def lp_norm(f: SampledField, p: float) -> float:
    return lp_norm_values(f.values, f.grid, p)


def shift(f: SampledField, z: Sequence[int]) -> SampledField:
    """g(x) = f(x + z h) with periodic wraparound"""
    z = [int(k) for k in np.atleast_1d(z)]
    if len(z) == 1 and f.grid.dim > 1:
        z = z * f.grid.dim
    if len(z) != f.grid.dim:
        raise InvalidField(f"shift vector has {len(z)} components for a {f.grid.dim}-d grid")
    values = np.roll(f.values, shift=[-k for k in z], axis=tuple(range(f.grid.dim)))
    return SampledField(f.grid, values, f.is_real)


# ---------------------------------------------------------------------------
# Spectral differentiation
# ---------------------------------------------------------------------------

def high_frequency_fraction(f: SampledField) -> float:
    """Energy fraction above 2/3 of the axis Nyquist frequency ("top third")"""
    spectrum = forward_spectrum(f)
    power = np.abs(spectrum.coefficients) ** 2
    total = float(np.sum(power))
    if total == 0.0:
        return 0.0
    cutoff = (2.0 / 3.0) * f.grid.nyquist
    top = np.zeros(f.grid.shape, dtype=bool)
    for k in f.grid.frequencies():
        top |= np.abs(k) > cutoff
    return float(np.sum(power[top]) / total)


def ensure_resolved(f: SampledField, purpose: str = "spectral differentiation"):
    fraction = high_frequency_fraction(f)
    logger.debug("top-third spectral energy fraction %.3e", fraction)
    if fraction >= RESOLUTION_THRESHOLD:
        raise SpectralUnderresolution(
            f"{purpose} needs a resolved spectrum; top-third energy fraction is {fraction:.3e} "
            f"(limit {RESOLUTION_THRESHOLD:g})")


def _nyquist_mask(grid: GridSpec, axis_modes: np.ndarray) -> np.ndarray:
    """Zero the unpaired -n/2 mode for odd-order derivatives"""
    return np.where(axis_modes == -grid.points_per_axis // 2, 0.0, 1.0)


def spectral_gradient(f: SampledField, check: bool = True) -> List[SampledField]:
    """Partial derivatives of f, one field per axis"""
    if check:
        ensure_resolved(f, "gradient")
    grid = f.grid
    modes = np.meshgrid(*([grid.axis_modes()] * grid.dim), indexing='ij')
    components = []
    for k_mode in modes:
        symbol = 1j * grid.frequency_step * k_mode * _nyquist_mask(grid, k_mode)
        components.append(apply_multiplier(f, symbol, even_real=False))
    if f.is_real:
        components = [SampledField(grid, _drop_imaginary(c.values), is_real=True) for c in components]
    return components


def gradient_magnitude(f: SampledField, check: bool = True) -> np.ndarray:
    """Pointwise Euclidean |grad f|"""
    components = spectral_gradient(f, check=check)
    return np.sqrt(sum(np.abs(c.values) ** 2 for c in components))


def gradient_lp_norm(f: SampledField, p: float) -> float:
    """||grad f||_p by spectral differentiation"""
    _validate_exponent(p)
    return lp_norm_values(gradient_magnitude(f), f.grid, p)


def spectral_laplacian(f: SampledField, check: bool = True) -> SampledField:
    """Delta f = inverse(-|xi|^2 F)"""
    if check:
        ensure_resolved(f, "laplacian")
    xi = f.grid.frequency_magnitude()
    return apply_multiplier(f, -(xi ** 2))


# ---------------------------------------------------------------------------
# Persistence: binary container and CSV
# ---------------------------------------------------------------------------

_MAGIC = b'SLF1'
_HEADER = struct.Struct('<4sBB2xId16s')


def field_to_bytes(f: SampledField) -> bytes:
    header = _HEADER.pack(_MAGIC, f.grid.dim, int(f.is_real), f.grid.points_per_axis,
                          f.grid.period, CONVENTION.encode('ascii'))
    return header + np.ascontiguousarray(f.values, dtype='<c16').tobytes()


def field_from_bytes(payload: bytes) -> SampledField:
    if len(payload) < _HEADER.size:
        raise InvalidField("truncated field container")
    magic, dim, real_flag, n, period, tag = _HEADER.unpack_from(payload, 0)
    if magic != _MAGIC:
        raise InvalidField(f"bad magic {magic!r}")
    tag = tag.rstrip(b'\x00').decode('ascii')
    if tag != CONVENTION:
        raise InvalidField(f"container uses convention {tag!r}, expected {CONVENTION!r}")
    grid = GridSpec(dim, n, period)
    values = np.frombuffer(payload, dtype='<c16', offset=_HEADER.size)
    return SampledField(grid, values.astype(np.complex128), is_real=bool(real_flag))


def save_field(path: Union[str, Path], f: SampledField) -> Path:
    return write_bytes(path, field_to_bytes(f))


def load_field(path: Union[str, Path]) -> SampledField:
    return field_from_bytes(Path(path).read_bytes())


def field_to_frame(f: SampledField) -> pd.DataFrame:
    """One row per grid point: index columns, coordinates, real, imag"""
    grid = f.grid
    indices = np.meshgrid(*([np.arange(grid.points_per_axis)] * grid.dim), indexing='ij')
    coords = grid.coordinates()
    columns = {}
    for axis in range(grid.dim):
        columns[f'i{axis}'] = indices[axis].ravel()
    for axis in range(grid.dim):
        columns[f'x{axis}'] = coords[axis].ravel()
    columns['real'] = f.values.real.ravel()
    columns['imag'] = f.values.imag.ravel()
    return pd.DataFrame(columns)


def export_field_csv(path: Union[str, Path], f: SampledField) -> Path:
    header = [f"dim={f.grid.dim} n={f.grid.points_per_axis} L={f.grid.period!r} convention={CONVENTION}",
              "columns: index per axis, coordinate per axis, real part, imaginary part"]
    return write_csv(path, field_to_frame(f), header)


# Quick smoke demo
if __name__ == "__main__":
    grid = GridSpec(dim=1, points_per_axis=4096, period=40.0)
    f = sample(FieldDescriptor('gaussian'), grid)
    spectrum = forward_spectrum(f)

    print("🧪 Field smoke test")
    print(f"   ||f||_2       = {lp_norm(f, 2):.10f}  (closed form {(math.pi / 2) ** 0.25:.10f})")
    print(f"   Parseval gap  = {abs(lp_norm(f, 2) ** 2 - spectrum.energy()):.3e}")
    print(f"   ||f'||_2      = {gradient_lp_norm(f, 2):.10f}")
