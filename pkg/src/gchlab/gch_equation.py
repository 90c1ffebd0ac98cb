"""Right-hand sides of the generalized Camassa-Holm equation

    m_t = k1/2 ((u^2 - u_x^2) m)_x + k2/2 (u m_x + 2 m u_x),   m = u - u_xx

in conservative, transport and nonlocal (velocity) form.

Every product is formed on a grid twice as fine and truncated back, which
removes all aliasing from products of up to three band-limited factors.
The coefficient-level functions (``*_coeffs``) are what the time stepper
calls; the Field-level wrappers are the public surface.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .spectral_grid import Field, Grid

__all__ = [
    "GchParams",
    "rhs_conservative",
    "rhs_transport",
    "rhs_nonlocal",
    "transport_velocity",
]


@dataclass(frozen=True)
class GchParams:
    k1: float
    k2: float

    def __post_init__(self):
        for name in ("k1", "k2"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ConfigError(f"must be finite, got {v!r}", key=name)
            object.__setattr__(self, name, float(v))

    @property
    def non_positive(self) -> bool:
        return self.k1 <= 0 and self.k2 <= 0


def _factor(dealias):
    return 2 if dealias else 1


def _physical(grid: Grid, uh, dealias):
    """u, u_x, m, m_x on the (possibly padded) product grid."""
    D = grid.deriv_symbol
    mh = grid.helmholtz_symbol * uh
    f = _factor(dealias)
    return (
        grid.to_padded(uh, f),
        grid.to_padded(D * uh, f),
        grid.to_padded(mh, f),
        grid.to_padded(D * mh, f),
    )


def conservative_coeffs(grid: Grid, uh, params: GchParams, dealias=True):
    """Coefficients of ``m_t`` from the conservative form."""
    U, UX, M, MX = _physical(grid, uh, dealias)
    k1, k2 = params.k1, params.k2
    out = np.zeros_like(uh)
    if k1:
        flux = grid.from_padded((U * U - UX * UX) * M)
        out += 0.5 * k1 * grid.deriv_symbol * flux
    if k2:
        out += 0.5 * k2 * grid.from_padded(U * MX + 2.0 * M * UX)
    return out


def transport_coeffs(grid: Grid, uh, params: GchParams, dealias=True):
    """Coefficients of ``m_t = a m_x + k1 u_x m^2 + k2 u_x m``."""
    U, UX, M, MX = _physical(grid, uh, dealias)
    k1, k2 = params.k1, params.k2
    a = 0.5 * k1 * (U * U - UX * UX) + 0.5 * k2 * U
    return grid.from_padded(a * MX + k1 * UX * M * M + k2 * UX * M)


def nonlocal_coeffs(grid: Grid, uh, params: GchParams, dealias=True):
    """Coefficients of ``u_t`` from the nonlocal velocity form."""
    f = _factor(dealias)
    D = grid.deriv_symbol
    U = grid.to_padded(uh, f)
    UX = grid.to_padded(D * uh, f)
    k1, k2 = params.k1, params.k2
    U2, UX2 = U * U, UX * UX
    UX3 = UX2 * UX
    local = grid.from_padded(0.5 * k1 * U2 * UX - k1 / 6.0 * UX3 + 0.5 * k2 * U * UX)
    source = grid.from_padded(
        k1 * (U * UX2 + 2.0 / 3.0 * U2 * U) + k2 * (U2 + 0.5 * UX2)
    )
    cubic = grid.from_padded(UX3)
    inv = 1.0 / grid.helmholtz_symbol
    return local + inv * (k1 / 6.0 * cubic + 0.5 * D * source)


def tendency_coeffs(grid: Grid, uh, params: GchParams, dealias=True):
    """``u_t = (1 - d_x^2)^{-1} m_t`` with ``m_t`` from the conservative form."""
    return conservative_coeffs(grid, uh, params, dealias) / grid.helmholtz_symbol


def _clean(u: Field):
    c = np.array(u.coeffs)
    c[-1] = 0.0
    return c


def rhs_conservative(u: Field, params: GchParams, dealias: bool = True) -> Field:
    g = u.grid
    return Field(g, g.ifft(conservative_coeffs(g, _clean(u), params, dealias)))


def rhs_transport(u: Field, params: GchParams, dealias: bool = True) -> Field:
    g = u.grid
    return Field(g, g.ifft(transport_coeffs(g, _clean(u), params, dealias)))


def rhs_nonlocal(u: Field, params: GchParams, dealias: bool = True) -> Field:
    """Velocity tendency ``u_t``; ``helmholtz_apply`` of it equals ``rhs_conservative``."""
    g = u.grid
    return Field(g, g.ifft(nonlocal_coeffs(g, _clean(u), params, dealias)))


def transport_velocity_values(grid: Grid, uh, params: GchParams) -> np.ndarray:
    u = grid.ifft(uh)
    ux = grid.ifft(grid.deriv_symbol * uh)
    return 0.5 * params.k1 * (u * u - ux * ux) + 0.5 * params.k2 * u


def transport_velocity(u: Field, params: GchParams) -> Field:
    """``a = k1/2 (u^2 - u_x^2) + k2/2 u``, the coefficient of ``m_x``."""
    g = u.grid
    return Field(g, transport_velocity_values(g, _clean(u), params))
