"""Periodic Fourier-collocation grid and the Helmholtz operator pair.

Transforms use ``norm="forward"``: the forward transform divides by
``n_points`` so that coefficient magnitudes do not depend on resolution.
Fields are real, so only the non-negative half spectrum (``rfft``) is
stored; index ``n_points // 2`` is the Nyquist mode.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigError

__all__ = [
    "Grid",
    "Field",
    "spectral_derivative",
    "helmholtz_apply",
    "helmholtz_inverse",
    "peakon_kernel_deriv_convolve",
]


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L/2, L/2)``."""

    n_points: int
    length: float = 40.0

    def __post_init__(self):
        n = self.n_points
        if int(n) != n or n < 8 or n % 2:
            raise ConfigError(f"must be an even integer >= 8, got {n!r}", key="n_points")
        if not (np.isfinite(self.length) and self.length > 0):
            raise ConfigError(f"must be positive, got {self.length!r}", key="length")
        object.__setattr__(self, "n_points", int(n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @cached_property
    def nodes(self) -> np.ndarray:
        return _frozen(-0.5 * self.length + self.dx * np.arange(self.n_points))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """All wavenumbers in ascending order, ``-n/2 .. n/2-1``."""
        j = np.arange(-self.n_points // 2, self.n_points // 2)
        return _frozen(2.0 * np.pi / self.length * j)

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumbers of the half spectrum, ``0 .. n/2`` (last is Nyquist)."""
        return _frozen(2.0 * np.pi / self.length * np.arange(self.n_points // 2 + 1))

    @property
    def k_nyquist(self) -> float:
        return np.pi * self.n_points / self.length

    @cached_property
    def deriv_symbol(self) -> np.ndarray:
        s = 1j * self.k
        s[-1] = 0.0
        s.setflags(write=False)
        return s

    @cached_property
    def helmholtz_symbol(self) -> np.ndarray:
        return _frozen(1.0 + self.k**2)

    @cached_property
    def mode_weights(self) -> np.ndarray:
        """Multiplicity of each half-spectrum mode in Parseval sums."""
        w = np.full(self.n_points // 2 + 1, 2.0)
        w[0] = w[-1] = 1.0
        return _frozen(w)

    def fft(self, values) -> np.ndarray:
        return np.fft.rfft(values, norm="forward")

    def ifft(self, coeffs) -> np.ndarray:
        return np.fft.irfft(coeffs, self.n_points, norm="forward")

    def refined(self, factor: int = 2) -> Grid:
        return Grid(self.n_points * factor, self.length)

    def to_padded(self, coeffs, factor: int = 2) -> np.ndarray:
        """Physical values on the ``factor``-times finer grid (Nyquist dropped)."""
        n = self.n_points
        big = np.zeros(factor * n // 2 + 1, dtype=complex)
        big[: n // 2] = coeffs[: n // 2]
        return np.fft.irfft(big, factor * n, norm="forward")

    def from_padded(self, values) -> np.ndarray:
        """Half-spectrum coefficients of fine-grid values, truncated to this grid."""
        c = np.fft.rfft(values, norm="forward")[: self.n_points // 2 + 1].copy()
        c[-1] = 0.0
        return c

    def field(self, values) -> Field:
        return Field(self, values)

    def sample(self, func) -> Field:
        return Field(self, func(np.asarray(self.nodes)))

    def integrate(self, values) -> float:
        """Trapezoid rule over one period (spectrally accurate for smooth data)."""
        return float(np.sum(values) * self.dx)


@dataclass(frozen=True, eq=False)
class Field:
    """Immutable real samples of a function on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} values, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("Field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, grid: Grid) -> Field:
        return cls(grid, np.zeros(grid.n_points))

    @classmethod
    def from_coeffs(cls, grid: Grid, coeffs) -> Field:
        """Build from half-spectrum coefficients, keeping them as the cached transform.

        Chained multiplier operations then skip a transform roundtrip.
        """
        c = np.array(coeffs, dtype=complex)
        f = cls(grid, grid.ifft(c))
        c.setflags(write=False)
        f.__dict__["coeffs"] = c
        return f

    @cached_property
    def coeffs(self) -> np.ndarray:
        c = self.grid.fft(self.values)
        c.setflags(write=False)
        return c

    def _same(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ValueError("Fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._same(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._same(other))

    def __rsub__(self, other):
        return Field(self.grid, self._same(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._same(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def _multiply(f: Field, symbol) -> Field:
    return Field.from_coeffs(f.grid, f.coeffs * symbol)


def spectral_derivative(f: Field) -> Field:
    """Fourier-collocation derivative; the Nyquist coefficient is zeroed."""
    return _multiply(f, f.grid.deriv_symbol)


def helmholtz_apply(u: Field) -> Field:
    """``m = u - u_xx`` via the symbol ``1 + k^2``."""
    return _multiply(u, u.grid.helmholtz_symbol)


def helmholtz_inverse(f: Field) -> Field:
    """``(1 - d_x^2)^{-1} f``, i.e. periodic convolution with ``exp(-|x|)/2``."""
    return _multiply(f, 1.0 / f.grid.helmholtz_symbol)


def peakon_kernel_deriv_convolve(f: Field) -> Field:
    """``d_x (1 - d_x^2)^{-1} f`` via the symbol ``ik / (1 + k^2)``."""
    g = f.grid
    return _multiply(f, g.deriv_symbol / g.helmholtz_symbol)
