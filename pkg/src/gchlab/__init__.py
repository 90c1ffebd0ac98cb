"""Numerical laboratory for the generalized Camassa-Holm equation

    m_t = k1/2 ((u^2 - u_x^2) m)_x + k2/2 (u m_x + 2 m u_x),   m = u - u_xx,

on a periodic grid: pseudo-spectral evolution, conserved quantities and the
blow-up monitor, exact peakons with a weak-form residual check, and a
discrete Littlewood-Paley / Besov toolkit.
"""
from .errors import (
    BlockOutOfRange,
    BlowUpSuspected,
    ComplexPeakonUnsupported,
    ConfigError,
    DegenerateParams,
    GchError,
    IterateDiverged,
    NonFinite,
)
from .evolve import SimConfig, Trajectory, friedrichs_iterate, iterate_distances, rk4_step, run
from .gch_equation import GchParams, rhs_conservative, rhs_nonlocal, rhs_transport, transport_velocity
from .invariants import (
    BlowUpStatus,
    DiagnosticsRecord,
    blowup_monitor,
    blowup_verdict,
    diagnostics,
    energy_identity_residual,
    h1,
    h1_energy_identity_residual,
    h2,
    peak_location,
)
from .littlewood_paley import (
    BesovIndex,
    DyadicPartition,
    besov_norm,
    block_norms,
    low_cutoff,
    lp_block,
    sobolev_norm,
)
from .peakon import (
    PeakonSpec,
    TestFunction,
    kernel_conv_closed_form,
    kernel_conv_quadrature,
    peakon_coefficients,
    peakon_eval,
    periodized_peakon,
    test_function_family,
    weak_residual,
)
from .spectral_grid import (
    Field,
    Grid,
    helmholtz_apply,
    helmholtz_inverse,
    peakon_kernel_deriv_convolve,
    spectral_derivative,
)

__version__ = "0.1.0"
