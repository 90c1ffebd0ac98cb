"""Method-of-lines time integration and the Friedrichs iteration.

The state is the half spectrum of ``u`` (Nyquist mode held at zero). The
nonlinear solver advances ``u_t = (1 - d_x^2)^{-1} m_t`` with classical RK4
and a CFL step based on the transport velocity ``a`` of the momentum
equation. The Friedrichs scheme instead solves, for each iterate, the
linear transport problem for ``m`` whose coefficients are frozen at the
previous iterate.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpSuspected, ConfigError, IterateDiverged, NonFinite
from .gch_equation import GchParams, tendency_coeffs, transport_velocity_values
from .invariants import diagnostics
from .littlewood_paley import BesovIndex, DyadicPartition, besov_norm, low_cutoff
from .spectral_grid import Field, Grid

__all__ = [
    "SimConfig",
    "Trajectory",
    "rk4_step",
    "run",
    "friedrichs_iterate",
    "iterate_distances",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimConfig:
    params: GchParams
    t_end: float
    dt_init: float = 1e-2
    cfl: float = 0.3
    dt_min: float = 1e-9
    dealias: bool = True
    record_every: int = 1

    def __post_init__(self):
        if not isinstance(self.params, GchParams):
            raise ConfigError("must be a GchParams", key="params")
        if not self.t_end >= 0:
            raise ConfigError(f"must be >= 0, got {self.t_end}", key="t_end")
        if not self.dt_init > 0:
            raise ConfigError(f"must be positive, got {self.dt_init}", key="dt_init")
        if not 0 < self.cfl <= 1:
            raise ConfigError(f"must lie in (0, 1], got {self.cfl}", key="cfl")
        if not 0 < self.dt_min < self.dt_init:
            raise ConfigError(
                f"must satisfy 0 < dt_min < dt_init, got {self.dt_min}", key="dt_min"
            )
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ConfigError(
                f"must be a positive integer, got {self.record_every}", key="record_every"
            )


@dataclass(frozen=True)
class Trajectory:
    """Recorded states ``u(t_i, .)`` on one grid.

    ``termination`` is ``"completed"``, ``"dt_collapse"`` or ``"non_finite"``.
    """

    grid: Grid
    times: np.ndarray
    states: tuple
    diagnostics: tuple = ()
    termination: str = "completed"
    final_dt: float = math.nan
    params: GchParams | None = field(default=None, compare=False)

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        if len(t) != len(self.states):
            raise ValueError("times and states differ in length")
        if len(t) and t[0] != 0.0:
            raise ValueError("trajectories start at t = 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "diagnostics", tuple(self.diagnostics))

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> Field:
        return self.states[-1]

    def coeffs(self):
        return [s.coeffs for s in self.states]


def _check(stage):
    if not np.all(np.isfinite(stage)):
        raise NonFinite("non-finite value in Runge-Kutta stage")
    return stage


def _rk4(rhs, t, y, dt):
    s1 = _check(rhs(t, y))
    s2 = _check(rhs(t + 0.5 * dt, y + 0.5 * dt * s1))
    s3 = _check(rhs(t + 0.5 * dt, y + 0.5 * dt * s2))
    s4 = _check(rhs(t + dt, y + dt * s3))
    return _check(y + dt / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4))


def _clean(u: Field):
    c = np.array(u.coeffs)
    c[-1] = 0.0
    return c


def _step_coeffs(grid, uh, dt, params, dealias):
    return _rk4(lambda _t, y: tendency_coeffs(grid, y, params, dealias), 0.0, uh, dt)


def rk4_step(u: Field, dt: float, params: GchParams, dealias: bool = True) -> Field:
    """One classical RK4 step of the nonlinear equation."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    g = u.grid
    return Field(g, g.ifft(_step_coeffs(g, _clean(u), dt, params, dealias)))


def _cfl_dt(grid, uh, config: SimConfig):
    a = transport_velocity_values(grid, uh, config.params)
    return min(config.dt_init, config.cfl * grid.dx / max(1.0, float(np.max(np.abs(a)))))


def run(u0: Field, config: SimConfig) -> Trajectory:
    """Integrate to ``config.t_end`` with an adaptive CFL step.

    Raises :class:`BlowUpSuspected` if the step falls below ``dt_min`` or a
    stage turns non-finite; the exception carries the partial trajectory,
    whose last entry is the last valid state.
    """
    if not isinstance(config, SimConfig):
        raise ConfigError("expected a SimConfig", key="config")
    g = u0.grid
    params = config.params
    uh = _clean(u0)
    t = 0.0
    times, states, records = [], [], []

    def record(c, t_now):
        f = Field(g, g.ifft(c))
        times.append(t_now)
        states.append(f)
        records.append(diagnostics(f, params, t_now))

    def partial(reason, dt):
        return Trajectory(g, times, states, records, termination=reason,
                          final_dt=dt, params=params)

    record(uh, t)
    t_tol = 1e-12 * max(1.0, config.t_end)
    steps = 0
    dt = config.dt_init
    while config.t_end - t > t_tol:
        dt = _cfl_dt(g, uh, config)
        if dt < config.dt_min:
            if times[-1] != t:
                record(uh, t)
            log.info("step size %.3g below dt_min at t=%.6g", dt, t)
            raise BlowUpSuspected(
                f"time step {dt:.3g} fell below dt_min={config.dt_min:.3g} at t={t:.6g}",
                state=states[-1], t=t, reason="dt_collapse", trajectory=partial("dt_collapse", dt),
            )
        dt = min(dt, config.t_end - t)
        try:
            uh = _step_coeffs(g, uh, dt, params, config.dealias)
        except NonFinite:
            if times[-1] != t:
                record(uh, t)
            raise BlowUpSuspected(
                f"non-finite state while stepping from t={t:.6g}",
                state=states[-1], t=t, reason="non_finite", trajectory=partial("non_finite", dt),
            ) from None
        t += dt
        steps += 1
        if steps % config.record_every == 0 or config.t_end - t <= t_tol:
            record(uh, t)
    log.debug("run finished: %d steps, last dt %.3g", steps, dt)
    return partial("completed", dt)


def _interpolator(times, coeffs):
    times = np.asarray(times)

    def at(t):
        i = int(np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(times) - 2))
        w = (t - times[i]) / (times[i + 1] - times[i])
        return (1.0 - w) * coeffs[i] + w * coeffs[i + 1]

    return at


def _linear_transport_rhs(grid, prev_at, params):
    """``m_t = a(u_prev) m_x + k1 u_x m_prev^2 + k2 u_x m_prev`` for the new iterate."""
    D, H = grid.deriv_symbol, grid.helmholtz_symbol
    k1, k2 = params.k1, params.k2

    def rhs(t, mh):
        uh = prev_at(t)
        U, UX, M = grid.to_padded(uh), grid.to_padded(D * uh), grid.to_padded(H * uh)
        a = 0.5 * k1 * (U * U - UX * UX) + 0.5 * k2 * U
        MX = grid.to_padded(D * mh)
        return grid.from_padded(a * MX + UX * M * (k1 * M + k2))

    return rhs


def friedrichs_iterate(
    u0: Field,
    params: GchParams,
    t_end: float,
    n_iters: int,
    dt: float | None = None,
    cfl: float = 0.3,
    part: DyadicPartition | None = None,
    divergence_factor: float = 1e3,
) -> list[Trajectory]:
    """Return the iterates ``u^(0) = 0, u^(1), ..., u^(n_iters)``.

    Iterate ``n+1`` starts from ``S_{n+1} u0`` and solves the momentum
    transport equation linearised about iterate ``n``, whose states are
    interpolated linearly in time. All iterates share one uniform time grid;
    by default its step is the CFL step of ``u0``.
    """
    if n_iters < 1:
        raise ValueError("n_iters must be positive")
    g = u0.grid
    part = part or DyadicPartition(g)
    if dt is None:
        a = transport_velocity_values(g, _clean(u0), params)
        dt = cfl * g.dx / max(1.0, float(np.max(np.abs(a))))
    n_steps = max(1, math.ceil(t_end / dt - 1e-9)) if t_end > 0 else 0
    times = np.linspace(0.0, t_end, n_steps + 1)
    zero = Field.zeros(g)
    iterates = [Trajectory(g, times, [zero] * len(times), params=params)]
    reference = None
    H = g.helmholtz_symbol
    for n in range(n_iters):
        prev = iterates[-1]
        prev_at = _interpolator(times, prev.coeffs()) if n_steps else None
        rhs = _linear_transport_rhs(g, prev_at, params) if n_steps else None
        start = low_cutoff(u0, min(n + 1, part.q_max + 1), part)
        mh = H * _clean(start)
        coeffs = [mh]
        for i in range(n_steps):
            mh = _rk4(rhs, times[i], mh, times[i + 1] - times[i])
            coeffs.append(mh)
        states = [Field(g, g.ifft(c / H)) for c in coeffs]
        traj = Trajectory(g, times, states, params=params)
        sup = max(s.max_abs() for s in states)
        if reference is None:
            reference = sup
        elif reference > 0 and sup > divergence_factor * reference:
            raise IterateDiverged(
                f"iterate {n + 1} reached sup-norm {sup:.3g} (first iterate {reference:.3g})",
                index=n + 1,
            )
        log.debug("Friedrichs iterate %d: sup|u| = %.3g", n + 1, sup)
        iterates.append(traj)
    return iterates


def iterate_distances(iterates, s: float = 3.0, part: DyadicPartition | None = None):
    """``sup_t ||u^(n+1)(t) - u^(n)(t)||_{B^s_{2,2}}`` for consecutive iterates."""
    g = iterates[0].grid
    part = part or DyadicPartition(g)
    idx = BesovIndex(s, 2, 2)
    out = []
    for a, b in zip(iterates, iterates[1:]):
        out.append(max(besov_norm(y - x, idx, part) for x, y in zip(a.states, b.states)))
    return out

