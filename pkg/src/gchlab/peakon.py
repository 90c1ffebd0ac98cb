"""Single peakons ``C1 exp(-|x - ct|)`` and their certification as weak solutions.

The amplitude solves ``k1/3 C1^2 + k2/2 C1 + c = 0``. When
``3 k2^2 - 16 k1 c < 0`` both roots are complex; such peakons are built and
classified here but never fed to the real-valued residual machinery.

The weak-form residual is evaluated with the peakon inserted into the
integral identity that defines a weak solution. The convolutions with
``p(x) = exp(-|x|)/2`` are taken in closed form, and the space-time
integral uses Gauss-Legendre panels cut along the crest line ``x = ct``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcx

from .errors import ComplexPeakonUnsupported, DegenerateParams
from .gch_equation import GchParams
from .quadrature import panel_integrate, panel_nodes
from .spectral_grid import Field, Grid

__all__ = [
    "PeakonSpec",
    "peakon_coefficients",
    "peakon_eval",
    "kernel_conv_closed_form",
    "kernel_conv_quadrature",
    "TestFunction",
    "test_function_family",
    "weak_residual",
    "periodized_peakon",
    "smoothed_exp_abs",
]

REAL_TOL = 1e-12


@dataclass(frozen=True)
class PeakonSpec:
    c: float
    c1: complex
    is_real: bool
    discriminant: float

    @property
    def amplitude(self) -> float:
        """Real amplitude; raises for complex peakons."""
        _require_real(self)
        return self.c1.real

    def coefficient_residual(self, params: GchParams) -> float:
        C = self.c1
        return abs(params.k1 / 3.0 * C * C + params.k2 / 2.0 * C + self.c)

    def scaled(self, factor: float) -> PeakonSpec:
        """Same speed, amplitude multiplied by ``factor`` (generally not a solution)."""
        return PeakonSpec(self.c, self.c1 * factor, self.is_real, self.discriminant)


def _require_real(spec: PeakonSpec):
    if not spec.is_real:
        raise ComplexPeakonUnsupported(
            f"complex peakon C1={spec.c1} (discriminant {spec.discriminant:g})"
        )


def peakon_coefficients(params: GchParams, c: float) -> list[PeakonSpec]:
    """All amplitudes ``C1`` of peakons travelling at speed ``c``."""
    k1, k2 = params.k1, params.k2
    disc = 3.0 * k2 * k2 - 16.0 * k1 * c
    if k1 == 0.0:
        if k2 == 0.0:
            raise DegenerateParams("k1 = k2 = 0 admits no peakon family")
        return [PeakonSpec(float(c), complex(-2.0 * c / k2), True, disc)]
    # roots of a C^2 + b C + c with a = k1/3, b = k2/2, written to avoid cancellation
    a, b = k1 / 3.0, k2 / 2.0
    is_real = disc >= 0.0
    root = math.sqrt(disc / 12.0) if is_real else cmath.sqrt(disc / 12.0)
    if is_real:
        q = -0.5 * (b + math.copysign(root, b) if b else root)
        pair = (q / a, c / q) if q else (0.0, 0.0)
    else:
        pair = ((-b + root) / (2 * a), (-b - root) / (2 * a))
    # order as in the closed form with the "+" branch first: -3(k2 + sqrt(disc/3)) / (4 k1)
    pair = sorted(pair, key=lambda z: abs(complex(z) - (-3 * (k2 + cmath.sqrt(disc / 3)) / (4 * k1))))
    return [PeakonSpec(float(c), complex(z), is_real, disc) for z in pair]


def peakon_eval(spec: PeakonSpec, t, x):
    """``C1 exp(-|x - ct|)``; real when C1 is real."""
    env = np.exp(-np.abs(np.asarray(x, dtype=float) - spec.c * np.asarray(t, dtype=float)))
    if spec.is_real:
        return spec.c1.real * env
    return spec.c1 * env


def kernel_conv_closed_form(spec: PeakonSpec, params: GchParams, t, x):
    """``d_x p * (k1/2 u u_x^2 + k2/4 u_x^2 + k2/2 u^2 + 7 k1/18 u^3)`` for the peakon ``u``."""
    _require_real(spec)
    C = spec.c1.real
    k1, k2 = params.k1, params.k2
    d = np.asarray(x, dtype=float) - spec.c * np.asarray(t, dtype=float)
    e = np.exp(-np.abs(d))
    mag = k1 / 3.0 * C**3 * (e**3 - e) + k2 / 2.0 * C**2 * (e**2 - e)
    return np.where(d > 0, mag, -mag)


def kernel_conv_quadrature(spec: PeakonSpec, params: GchParams, t: float, x: float,
                           tail: float = 40.0, order: int = 32) -> float:
    """The same convolution by direct panel quadrature over ``y``, cut at ``y = ct`` and ``y = x``."""
    _require_real(spec)
    C, ct = spec.c1.real, spec.c * t
    k1, k2 = params.k1, params.k2

    def integrand(y):
        s = np.sign(y - ct)
        u = C * np.exp(-np.abs(y - ct))
        ux2 = (s * u) ** 2
        g = 0.5 * k1 * u * ux2 + 0.25 * k2 * ux2 + 0.5 * k2 * u * u + 7.0 / 18.0 * k1 * u**3
        return -0.5 * np.sign(x - y) * np.exp(-np.abs(x - y)) * g

    lo, hi = min(x, ct) - tail, max(x, ct) + tail
    panels = max(1, int(math.ceil((hi - lo) / 1.0)))
    return panel_integrate(integrand, lo, hi, breaks=(ct, x), panels=panels // 2 + 1, order=order)


def _p_conv_exp(a, d):
    """``p * exp(-a|.|)`` at offset ``d`` (a != 1)."""
    ad = np.abs(d)
    return (a * np.exp(-ad) - np.exp(-a * ad)) / (a * a - 1.0)


def _p_conv_odd_exp(a, d):
    """``p * (sign(.) exp(-a|.|))`` at offset ``d`` (a != 1)."""
    ad = np.abs(d)
    return np.sign(d) * (np.exp(-ad) - np.exp(-a * ad)) / (a * a - 1.0)


def _bump(tau):
    """``exp(1 - 1/(1 - tau^2))`` on (-1, 1), zero outside; peak value 1."""
    tau = np.asarray(tau, dtype=float)
    out = np.zeros_like(tau)
    dout = np.zeros_like(tau)
    inside = np.abs(tau) < 1.0
    s = 1.0 - tau[inside] ** 2
    out[inside] = np.exp(1.0 - 1.0 / s)
    dout[inside] = out[inside] * (-2.0 * tau[inside] / (s * s))
    return out, dout


@dataclass(frozen=True)
class TestFunction:
    """Tensor-product bump supported in ``[t0, t1] x [x0, x1]``.

    Only ``t >= 0`` is integrated, so a window with ``t0 < 0`` does not vanish
    at ``t = 0`` and exercises the initial-data term.
    """

    __test__ = False  # keep pytest from collecting this class

    t0: float
    t1: float
    x0: float
    x1: float

    def _parts(self, t, x):
        ht, hx = 0.5 * (self.t1 - self.t0), 0.5 * (self.x1 - self.x0)
        bt, dbt = _bump((np.asarray(t) - 0.5 * (self.t0 + self.t1)) / ht)
        bx, dbx = _bump((np.asarray(x) - 0.5 * (self.x0 + self.x1)) / hx)
        return bt, dbt / ht, bx, dbx / hx

    def __call__(self, t, x):
        bt, _, bx, _ = self._parts(t, x)
        return bt * bx

    def derivatives(self, t, x):
        """``(phi, phi_t, phi_x)``."""
        bt, dbt, bx, dbx = self._parts(t, x)
        return bt * bx, dbt * bx, bt * dbx

    def scale(self, panels: int = 8, order: int = 32) -> float:
        """``int int (|phi| + |phi_t| + |phi_x|) + int |phi(0, x)|``, the residual yardstick."""
        ts, wt = panel_nodes(max(0.0, self.t0), self.t1, panels=panels, order=order)
        xs, wx = panel_nodes(self.x0, self.x1, panels=panels, order=order)
        T, X = np.meshgrid(ts, xs, indexing="ij")
        f, ft, fx = self.derivatives(T, X)
        total = wt @ (np.abs(f) + np.abs(ft) + np.abs(fx)) @ wx
        if self.t0 < 0:
            total += wx @ np.abs(self(0.0, xs))
        return float(total)


def test_function_family(c: float) -> list[TestFunction]:
    """Twelve windows: three time slabs, each with a window left of, right of,
    symmetric about and lopsided across the crest line ``x = ct``."""
    windows = []
    for t0, t1 in ((-0.5, 1.0), (0.5, 2.0), (1.0, 3.0)):
        ta, tb = max(t0, 0.0), t1
        lo, hi = sorted((c * ta, c * tb))
        mid = 0.5 * (lo + hi)
        windows += [
            TestFunction(t0, t1, lo - 5.0, lo - 0.5),
            TestFunction(t0, t1, hi + 0.5, hi + 5.0),
            TestFunction(t0, t1, mid - 3.0, mid + 3.0),
            TestFunction(t0, t1, mid - 1.5, mid + 4.0),
        ]
    return windows


test_function_family.__test__ = False  # not a pytest test


def weak_residual(spec: PeakonSpec, params: GchParams, phi: TestFunction,
                  panels: int = 6, order: int = 32) -> float:
    """Value of the weak-solution functional for the peakon against ``phi``.

    Zero (to quadrature accuracy) exactly when the peakon is a weak solution
    on the support of ``phi``.
    """
    _require_real(spec)
    C, c = spec.c1.real, spec.c
    k1, k2 = params.k1, params.k2

    def inner(t):
        xs, wx = panel_nodes(phi.x0, phi.x1, breaks=(c * t,), panels=panels, order=order)
        d = xs - c * t
        u = C * np.exp(-np.abs(d))
        ux = -np.sign(d) * u
        f, ft, fx = phi.derivatives(t, xs)
        # p * (k1 (u u_x^2 + 2/3 u^3) + k2 (u^2 + u_x^2 / 2)) and p * u_x^3
        source_conv = 5.0 / 3.0 * k1 * C**3 * _p_conv_exp(3.0, d) + 1.5 * k2 * C**2 * _p_conv_exp(2.0, d)
        cubic_conv = -(C**3) * _p_conv_odd_exp(3.0, d)
        density = (
            u * ft
            - k1 / 6.0 * u**3 * fx
            - k1 / 6.0 * ux**3 * f
            - 0.25 * k2 * u * u * fx
            - 0.5 * source_conv * fx
            + k1 / 6.0 * cubic_conv * f
        )
        return float(wx @ density)

    ta = max(0.0, phi.t0)
    crossings = [x / c for x in (phi.x0, phi.x1) if c != 0 and ta < x / c < phi.t1]
    ts, wt = panel_nodes(ta, phi.t1, breaks=crossings, panels=panels, order=order)
    total = float(sum(w * inner(t) for t, w in zip(ts, wt)))
    if phi.t0 < 0:
        xs, wx = panel_nodes(phi.x0, phi.x1, breaks=(0.0,), panels=panels, order=order)
        total += float(wx @ (C * np.exp(-np.abs(xs)) * phi(0.0, xs)))
    return total


def smoothed_exp_abs(x, sigma: float):
    """``exp(-|.|)`` convolved with a unit-mass Gaussian of width ``sigma``."""
    x = np.asarray(x, dtype=float)
    if sigma == 0:
        return np.exp(-np.abs(x))
    r2 = sigma * math.sqrt(2.0)

    def half(y):
        # exp(sigma^2/2 - y) erfc((sigma^2 - y) / (sigma sqrt 2)), overflow-free
        z = (sigma * sigma - y) / r2
        pos = z >= 0
        out = np.empty_like(y)
        out[pos] = erfcx(z[pos]) * np.exp(-y[pos] ** 2 / (2 * sigma * sigma))
        out[~pos] = np.exp(0.5 * sigma * sigma - y[~pos]) * erfc(z[~pos])
        return out

    return 0.5 * (half(x) + half(-x))


def periodized_peakon(spec: PeakonSpec, grid: Grid, mollify_sigma: float = 0.0,
                      t: float = 0.0, images: int = 3) -> Field:
    """Image sum of the peakon (crest at ``c t``) on a periodic grid, optionally mollified."""
    _require_real(spec)
    if grid.length < 20:
        raise ValueError(f"grid length {grid.length} < 20 leaves a visible periodization tail")
    if mollify_sigma < 0:
        raise ValueError("mollify_sigma must be non-negative")
    x = np.asarray(grid.nodes)
    centre = spec.c * t
    centre = (centre + grid.length / 2) % grid.length - grid.length / 2
    total = np.zeros_like(x)
    for j in range(-images, images + 1):
        total += smoothed_exp_abs(x - centre - j * grid.length, mollify_sigma)
    return Field(grid, spec.c1.real * total)
