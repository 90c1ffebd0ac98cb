"""Dyadic Littlewood-Paley blocks, low-frequency cutoffs and Besov norms on a periodic grid.

The low-frequency profile ``psi`` equals 1 on ``|xi| <= 3/4`` and 0 on
``|xi| >= 4/3`` with a C-infinity transition built from ``exp(-1/t)``; the
annulus profile is ``phi(xi) = psi(xi/2) - psi(xi)``. With this choice the
partial sums telescope, ``psi(xi) + sum_{q<Q} phi(2^-q xi) = psi(2^-Q xi)``,
so partition of unity and reconstruction hold to rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import BlockOutOfRange, ConfigError
from .spectral_grid import Field, Grid

__all__ = [
    "psi",
    "phi",
    "DyadicPartition",
    "BesovIndex",
    "lp_block",
    "low_cutoff",
    "block_norms",
    "besov_norm",
    "sobolev_norm",
]

INNER = 3.0 / 4.0
OUTER = 4.0 / 3.0


def _bump_tail(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _smooth_step(t):
    """0 for t <= 0, 1 for t >= 1, C-infinity in between."""
    a = _bump_tail(t)
    return a / (a + _bump_tail(1.0 - t))


def psi(xi):
    return _smooth_step((OUTER - np.abs(xi)) / (OUTER - INNER))


def phi(xi):
    xi = np.asarray(xi, dtype=float)
    return psi(xi / 2.0) - psi(xi)


@dataclass(frozen=True)
class DyadicPartition:
    """The profiles ``psi``, ``phi`` bound to a grid's wavenumbers.

    ``q_max`` is the smallest index for which ``S_{q_max+1}`` is the identity on
    every grid wavenumber, so blocks ``-1 .. q_max`` reconstruct any Field.
    """

    grid: Grid

    @cached_property
    def q_max(self) -> int:
        k_top = self.grid.k_nyquist
        return max(0, math.ceil(math.log2(k_top / INNER)) - 1)

    def multiplier(self, q: int) -> np.ndarray:
        if q < -1 or q > self.q_max:
            raise BlockOutOfRange(f"block {q} outside -1..{self.q_max}")
        k = self.grid.k
        return psi(k) if q == -1 else phi(k / 2.0**q)

    def cutoff_multiplier(self, q: int) -> np.ndarray:
        if q < 0 or q > self.q_max + 1:
            raise BlockOutOfRange(f"cutoff {q} outside 0..{self.q_max + 1}")
        return psi(self.grid.k / 2.0**q)

    def blocks(self):
        return range(-1, self.q_max + 1)


@dataclass(frozen=True)
class BesovIndex:
    s: float
    p: float = 2.0
    r: float = 2.0

    def __post_init__(self):
        for name in ("p", "r"):
            v = float(getattr(self, name))
            if not v >= 1:
                raise ConfigError(f"must be >= 1 (inf allowed), got {v}", key=name)
            object.__setattr__(self, name, v)


def _partition(u: Field, part):
    if part is None:
        return DyadicPartition(u.grid)
    if part.grid != u.grid:
        raise ValueError("partition built for a different grid")
    return part


def lp_block(u: Field, q: int, part: DyadicPartition | None = None) -> Field:
    """``Delta_q u``: ``psi(D) u`` for ``q = -1``, ``phi(2^-q D) u`` otherwise."""
    part = _partition(u, part)
    return Field(u.grid, u.grid.ifft(u.coeffs * part.multiplier(q)))


def low_cutoff(u: Field, q: int, part: DyadicPartition | None = None) -> Field:
    """``S_q u = psi(2^-q D) u``."""
    part = _partition(u, part)
    return Field(u.grid, u.grid.ifft(u.coeffs * part.cutoff_multiplier(q)))


def _lp_norm(grid: Grid, values, p: float) -> float:
    a = np.abs(values)
    if math.isinf(p):
        return float(a.max())
    return float((np.sum(a**p) * grid.dx) ** (1.0 / p))


def block_norms(u: Field, p: float = 2.0, part: DyadicPartition | None = None):
    """``[(q, ||Delta_q u||_{L^p}), ...]`` for every resolvable block."""
    part = _partition(u, part)
    return [(q, _lp_norm(u.grid, lp_block(u, q, part).values, p)) for q in part.blocks()]


def besov_norm(u: Field, idx: BesovIndex, part: DyadicPartition | None = None) -> float:
    part = _partition(u, part)
    terms = np.array(
        [2.0 ** (q * idx.s) * n for q, n in block_norms(u, idx.p, part)]
    )
    if math.isinf(idx.r):
        return float(terms.max())
    return float(np.sum(terms**idx.r) ** (1.0 / idx.r))


def sobolev_norm(u: Field, s: float) -> float:
    """``(L sum_k (1 + k^2)^s |u_k|^2)^{1/2}``, the H^s norm consistent with L^2 quadrature."""
    g = u.grid
    c = np.abs(u.coeffs) ** 2
    return float(np.sqrt(g.length * np.sum(g.mode_weights * g.helmholtz_symbol**s * c)))
