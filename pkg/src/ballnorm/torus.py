"""Periodic grids, sampled fields and the spectral transform.

Everything in the package lives on the torus ``(R / 2 pi Z)^n`` sampled on a
uniform ``N^n`` grid. Operators act as Fourier multipliers, so the transform
convention matters: coefficients are normalised as

    f_hat(m) = N^{-n} sum_i f(x_i) exp(-i m . x_i),

which makes convolution with an L^1-normalised kernel equal to multiplication
by that kernel's (non-unitary) continuum Fourier transform at integer
frequencies.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import numpy as np

TWO_PI = 2.0 * np.pi
REAL_TOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on the n-torus of side 2 pi.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1, 2 or 3.
    n_samples : int
        Samples per axis ``N``; a power of two, at least 8.
    """

    dim: int
    n_samples: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dim}")
        N = self.n_samples
        if int(N) != N or N < 8 or (N & (N - 1)) != 0:
            raise ValueError(f"samples per axis must be a power of two >= 8, got {N}")

    @property
    def shape(self) -> tuple:
        return (self.n_samples,) * self.dim

    @property
    def size(self) -> int:
        return self.n_samples**self.dim

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n_samples

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def nyquist(self) -> int:
        return self.n_samples // 2

    def coordinates(self) -> tuple:
        """Grid point coordinates, one array per axis (``ij`` indexing)."""
        axis = self.spacing * np.arange(self.n_samples)
        return tuple(np.meshgrid(*([axis] * self.dim), indexing="ij"))

    def frequencies(self) -> tuple:
        """Integer frequency vectors in FFT order, each coordinate in [-N/2, N/2)."""
        return _frequencies(self)

    def squared_magnitude(self) -> np.ndarray:
        """Exact integer ``|m|^2`` for every grid frequency."""
        return _squared_magnitude(self)


@lru_cache(maxsize=32)
def _frequencies(grid: GridSpec) -> tuple:
    axis = np.fft.fftfreq(grid.n_samples, d=1.0 / grid.n_samples).astype(np.int64)
    out = tuple(np.meshgrid(*([axis] * grid.dim), indexing="ij"))
    for a in out:
        a.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def _squared_magnitude(grid: GridSpec) -> np.ndarray:
    sq = sum(m.astype(np.int64) ** 2 for m in _frequencies(grid))
    sq = np.asarray(sq, dtype=np.int64)
    sq.setflags(write=False)
    return sq


@lru_cache(maxsize=32)
def radial_keys(grid: GridSpec) -> tuple:
    """Distinct squared magnitudes on the grid and the inverse index map."""
    keys, inverse = np.unique(grid.squared_magnitude(), return_inverse=True)
    inverse = inverse.reshape(grid.shape)
    keys.setflags(write=False)
    inverse.setflags(write=False)
    return keys, inverse


def _frozen(values) -> np.ndarray:
    arr = np.array(values, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SampledField:
    """Samples of a function on the grid, shape ``grid.shape``."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.size != self.grid.size:
            raise ValueError(
                f"expected {self.grid.size} samples for {self.grid}, got {values.size}"
            )
        if not (np.issubdtype(values.dtype, np.floating) or np.issubdtype(values.dtype, np.complexfloating)):
            values = values.astype(float)
        object.__setattr__(self, "values", _frozen(values.reshape(self.grid.shape)))

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    @classmethod
    def from_function(cls, grid: GridSpec, func: Callable) -> "SampledField":
        return cls(grid, func(*grid.coordinates()))

    def __add__(self, other: "SampledField") -> "SampledField":
        _check_same_grid(self, other)
        return SampledField(self.grid, self.values + other.values)

    def __sub__(self, other: "SampledField") -> "SampledField":
        _check_same_grid(self, other)
        return SampledField(self.grid, self.values - other.values)

    def __mul__(self, scalar) -> "SampledField":
        return SampledField(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def shifted(self, offset) -> "SampledField":
        """Translate by whole grid cells (periodic)."""
        offset = np.broadcast_to(np.asarray(offset, dtype=int), (self.grid.dim,))
        return SampledField(self.grid, np.roll(self.values, tuple(offset), axis=tuple(range(self.grid.dim))))


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients in FFT order; ``real`` marks a real-valued source."""

    grid: GridSpec
    coefficients: np.ndarray = field(repr=False)
    real: bool = False

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=complex)
        if coef.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} coefficients, got {coef.size}")
        object.__setattr__(self, "coefficients", _frozen(coef.reshape(self.grid.shape)))

    def coefficient(self, m) -> complex:
        """Coefficient at the integer frequency vector ``m``."""
        idx = tuple(int(c) % self.grid.n_samples for c in np.atleast_1d(m))
        return complex(self.coefficients[idx])


def forward_transform(f: SampledField) -> SpectralField:
    coef = np.fft.fftn(f.values) / f.grid.size
    return SpectralField(f.grid, coef, real=f.is_real)


def inverse_transform(F: SpectralField) -> SampledField:
    values = np.fft.ifftn(F.coefficients) * F.grid.size
    if F.real:
        scale = max(1.0, float(np.max(np.abs(values.real), initial=0.0)))
        leak = float(np.max(np.abs(values.imag), initial=0.0))
        if leak > REAL_TOL * scale:
            raise ArithmeticError(f"real field picked up imaginary part {leak:.3e}")
        values = values.real
    return SampledField(F.grid, values)


def lp_norm(f: SampledField, p: float) -> float:
    """Grid quadrature of the L^p norm on the torus; ``p = inf`` gives the max."""
    p = float(p)
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max())
    return float((np.sum(a**p) * f.grid.cell_volume) ** (1.0 / p))


RadialProfile = Callable[[np.ndarray], np.ndarray]


def radial_symbol(grid: GridSpec, mu) -> np.ndarray:
    """Evaluate a radial multiplier on every grid frequency.

    ``mu`` is either a callable taking an array of radii or an object with a
    ``lookup_squared(keys)`` method (a tabulated multiplier). Each distinct
    ``|m|^2`` is evaluated once.
    """
    keys, inverse = radial_keys(grid)
    if hasattr(mu, "lookup_squared"):
        vals = mu.lookup_squared(keys)
    else:
        vals = np.asarray(mu(np.sqrt(keys.astype(float))))
        if vals.shape != keys.shape:
            vals = np.broadcast_to(vals, keys.shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError("multiplier is undefined at a radius present on the grid")
    return vals[inverse]


def apply_radial_multiplier(F: SpectralField, mu: Union[RadialProfile, object]) -> SpectralField:
    symbol = radial_symbol(F.grid, mu)
    real = F.real and not np.iscomplexobj(symbol)
    return SpectralField(F.grid, F.coefficients * symbol, real=real)


def apply_multiplier(F: SpectralField, symbol: Callable) -> SpectralField:
    """Apply a general (not necessarily radial) even real symbol ``symbol(m_1, ..., m_n)``."""
    values = np.asarray(symbol(*(m.astype(float) for m in F.grid.frequencies())))
    real = F.real and not np.iscomplexobj(values)
    return SpectralField(F.grid, F.coefficients * values, real=real)


def filter_field(f: SampledField, mu) -> SampledField:
    """Forward transform, radial multiplier, inverse transform."""
    return inverse_transform(apply_radial_multiplier(forward_transform(f), mu))


def filter_field_general(f: SampledField, symbol: Callable) -> SampledField:
    return inverse_transform(apply_multiplier(forward_transform(f), symbol))
