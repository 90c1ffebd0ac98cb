"""Conserved quantities, energy-identity residuals and the blow-up monitor.

Quadratic integrands are integrated on the base grid with the trapezoid
rule, which is exact for them once the Nyquist mode is dropped. Cubic and
quartic integrands are evaluated on the 2x-refined grid, where the same
rule is again exact.
"""
from __future__ import annotations

import enum
from dataclasses import astuple, dataclass, fields

import numpy as np

from .gch_equation import GchParams
from .spectral_grid import Field, Grid

__all__ = [
    "DiagnosticsRecord",
    "BlowUpStatus",
    "h1",
    "h2",
    "blowup_monitor",
    "peak_location",
    "diagnostics",
    "energy_identity_residual",
    "h1_energy_identity_residual",
    "blowup_verdict",
]


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    h1: float
    h2: float
    min_ux: float
    min_mux: float
    max_abs_u: float
    peak_x: float

    @classmethod
    def header(cls):
        return [f.name for f in fields(cls)]

    def as_row(self):
        return astuple(self)


class BlowUpStatus(enum.Enum):
    NO_BLOWUP = "NoBlowUp"
    SUSPECTED = "Suspected"
    INAPPLICABLE = "Inapplicable"


def _spectra(u: Field):
    g = u.grid
    uh = np.array(u.coeffs)
    uh[-1] = 0.0
    mh = g.helmholtz_symbol * uh
    return g, uh, mh


def _fine(g: Grid, *coeffs):
    return [g.to_padded(c) for c in coeffs]


def _fine_integral(g: Grid, values) -> float:
    return float(np.sum(values) * g.dx / 2.0)


def h1(u: Field) -> float:
    """``1/2 int (u^2 + u_x^2) dx`` over one period."""
    g = u.grid
    ux = g.ifft(g.deriv_symbol * u.coeffs)
    return 0.5 * g.integrate(u.values**2 + ux**2)


def h2(u: Field, params: GchParams) -> float:
    """``1/8 int (k1 u^4 + 2 k1 u^2 u_x^2 - k1/3 u_x^4 + 2 k2 u^3 + 2 k2 u u_x^2) dx``."""
    g = u.grid
    uh = u.coeffs
    U, UX = g.to_padded(uh), g.to_padded(g.deriv_symbol * uh)
    k1, k2 = params.k1, params.k2
    U2, UX2 = U * U, UX * UX
    density = (
        k1 * U2 * U2 + 2 * k1 * U2 * UX2 - k1 / 3.0 * UX2 * UX2
        + 2 * k2 * U2 * U + 2 * k2 * U * UX2
    )
    return _fine_integral(g, density) / 8.0


def blowup_monitor(u: Field) -> tuple[float, float]:
    """Grid minima of ``u_x`` and of ``m u_x``."""
    g = u.grid
    ux = g.ifft(g.deriv_symbol * u.coeffs)
    m = g.ifft(g.helmholtz_symbol * u.coeffs)
    return float(ux.min()), float((m * ux).min())


def peak_location(u: Field) -> float:
    """Sub-grid argmax of ``u`` by a parabola through the three nearest nodes."""
    g = u.grid
    v = u.values
    j = int(np.argmax(v))
    left, mid, right = v[j - 1], v[j], v[(j + 1) % g.n_points]
    denom = left - 2.0 * mid + right
    shift = 0.5 * (left - right) / denom if denom != 0 else 0.0
    x = g.nodes[j] + shift * g.dx
    return float((x + g.length / 2) % g.length - g.length / 2)


def diagnostics(u: Field, params: GchParams, t: float) -> DiagnosticsRecord:
    min_ux, min_mux = blowup_monitor(u)
    return DiagnosticsRecord(
        t=float(t),
        h1=h1(u),
        h2=h2(u, params),
        min_ux=min_ux,
        min_mux=min_mux,
        max_abs_u=u.max_abs(),
        peak_x=peak_location(u),
    )


def _centered_derivative(times, values, i):
    """Second-order three-point derivative on a possibly uneven stencil."""
    h1_, h2_ = times[i] - times[i - 1], times[i + 1] - times[i]
    return (
        -h2_ / (h1_ * (h1_ + h2_)) * values[0]
        + (h2_ - h1_) / (h1_ * h2_) * values[1]
        + h1_ / (h2_ * (h1_ + h2_)) * values[2]
    )


def _check_index(traj, i):
    n = len(traj.times)
    if not 0 < i < n - 1:
        raise IndexError(f"step index {i} needs neighbours in a trajectory of length {n}")


def _m_energy(u: Field) -> float:
    g = u.grid
    m = g.ifft(g.helmholtz_symbol * u.coeffs)
    return 0.5 * g.integrate(m * m)


def _m_h1_energy(u: Field) -> float:
    g = u.grid
    mh = g.helmholtz_symbol * u.coeffs
    m, mx = g.ifft(mh), g.ifft(g.deriv_symbol * mh)
    return g.integrate(m * m + mx * mx)


def energy_identity_residual(traj, params: GchParams, i: int) -> float:
    """Mismatch in ``d/dt 1/2 int m^2 = k1/2 int u_x m^3 + 3 k2/4 int u_x m^2`` at step ``i``."""
    _check_index(traj, i)
    states = traj.states[i - 1 : i + 2]
    energies = [_m_energy(s) for s in states]
    lhs = _centered_derivative(traj.times, energies, i)
    g, uh, mh = _spectra(states[1])
    UX, M = _fine(g, g.deriv_symbol * uh, mh)
    rhs = _fine_integral(g, UX * M * M * (0.5 * params.k1 * M + 0.75 * params.k2))
    return abs(lhs - rhs) / max(1.0, energies[1])


def h1_energy_identity_residual(traj, params: GchParams, i: int) -> float:
    """Mismatch in the evolution law of ``int (m^2 + m_x^2)`` at step ``i``."""
    _check_index(traj, i)
    states = traj.states[i - 1 : i + 2]
    energies = [_m_h1_energy(s) for s in states]
    lhs = _centered_derivative(traj.times, energies, i)
    g, uh, mh = _spectra(states[1])
    UX, M, MX = _fine(g, g.deriv_symbol * uh, mh, g.deriv_symbol * mh)
    k1, k2 = params.k1, params.k2
    density = UX * (
        5 * k1 * M * MX * MX + k1 / 3.0 * M**3 + 2.5 * k2 * MX * MX + 0.5 * k2 * M * M
    )
    rhs = _fine_integral(g, density)
    return abs(lhs - rhs) / max(1.0, energies[1])


def blowup_verdict(traj, params: GchParams, threshold: float = 1e3) -> BlowUpStatus:
    """Classify a trajectory against the wave-breaking criterion.

    Only meaningful for non-positive ``k1, k2``. A blow-up is reported when the
    monitored minima fell below ``-threshold`` and the run was stopped by a
    step-size collapse (or a non-finite stage, the same signal one step later).
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if not params.non_positive:
        return BlowUpStatus.INAPPLICABLE
    collapsed = getattr(traj, "termination", "completed") in ("dt_collapse", "non_finite")
    if not collapsed or not traj.diagnostics:
        return BlowUpStatus.NO_BLOWUP
    lowest = min(min(d.min_ux, d.min_mux) for d in traj.diagnostics)
    return BlowUpStatus.SUSPECTED if lowest < -threshold else BlowUpStatus.NO_BLOWUP
