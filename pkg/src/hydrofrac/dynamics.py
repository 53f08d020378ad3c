"""Tendency assembly and integrating-factor RK4 time stepping.

The horizontal velocity obeys

    d_t u + u d_x u + w d_z u + d_x p = -nu Lambda_h^alpha u,
    w(x, z) = -int_0^z d_x u dz',   d_z p = 0,

on the periodic channel.  Since the pressure is depth independent, it is
removed by subtracting the vertical mean of the advective tendency, which
keeps ``int_0^1 u dz = 0`` to rounding error.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .diagnostics import Monitor, blowup_check, linf_norm
from .presets import build_initial
from .spectral import Grid, dealias, dx_spectral, dz_fd, vertical_cumint, vertical_mean


class BlowupError(RuntimeError):
    """The run was halted; ``state`` and ``records`` describe the last finite state."""

    def __init__(self, message, state=None, records=None):
        super().__init__(message)
        self.state = state
        self.records = records or []


@dataclass
class State:
    u: np.ndarray
    t: float = 0.0
    step_count: int = 0


def grid_for(cfg):
    return Grid(cfg.n_x, cfg.n_z)


def vorticity(grid, u):
    """``omega = d_z u``."""
    return dz_fd(grid, u.u if isinstance(u, State) else u)


def recover_w(grid, u):
    """Diagnostic vertical velocity ``w(x, z) = -int_0^z d_x u``."""
    return -vertical_cumint(grid, dx_spectral(grid, u))


def nonlinear_term(grid, u, w):
    """Dealiased ``u d_x u + w d_z u`` in physical space."""
    return dealias(grid, u * dx_spectral(grid, u) + w * dz_fd(grid, u))


def pressure_project(grid, T):
    """Remove the vertical mean of a tendency (the hydrostatic pressure gradient)."""
    return T - vertical_mean(grid, T)


def tendency(state, cfg, grid=None):
    """``(total, dissipation)`` with ``total = -P N(u) - nu Lambda^alpha u`` in physical space."""
    grid = grid or grid_for(cfg)
    u = state.u
    u_hat = grid.to_spectral(u)
    diss = grid.to_physical(-cfg.nu * grid.symbol(cfg.alpha) * u_hat)
    if not cfg.nonlinear:
        return diss, diss
    adv = -pressure_project(grid, nonlinear_term(grid, u, recover_w(grid, u)))
    return adv + diss, diss


def stable_dt(state, cfg, grid=None):
    """``safety * min(dx / max|u|, dz / max|w|)`` capped at ``dt_max``.

    ``safety`` comes from a ``cfl(...)`` policy (0.5 otherwise).
    """
    grid = grid or grid_for(cfg)
    kind, value = cfg.dt_rule
    safety = value if kind == "cfl" else 0.5
    limits = []
    umax = linf_norm(state.u)
    if umax > 0:
        limits.append(grid.dx / umax)
    if cfg.nonlinear:
        wmax = linf_norm(recover_w(grid, state.u))
        if wmax > 0:
            limits.append(grid.dz / wmax)
    if not limits:
        return cfg.dt_max
    return min(cfg.dt_max, safety * min(limits))


class Integrator:
    """Lawson RK4 in spectral variables with cached decay factors.

    The substitution ``v = exp(nu Lambda^alpha t) u`` makes the dissipation
    exact, so the scheme only integrates the advective tendency.
    """

    def __init__(self, cfg, grid=None):
        self.grid = grid or grid_for(cfg)
        self.nonlinear = cfg.nonlinear
        self.decay = cfg.nu * self.grid.symbol(cfg.alpha)
        self._ik = 1j * self.grid.kappa
        self._ik[-1] = 0.0
        self._factors = {}

    def factors(self, dt):
        if dt not in self._factors:
            if len(self._factors) > 8:
                self._factors.clear()
            self._factors[dt] = (np.exp(-0.5 * dt * self.decay), np.exp(-dt * self.decay))
        return self._factors[dt]

    def advection(self, u_hat):
        """Spectral ``-P N(u)``."""
        g = self.grid
        if not self.nonlinear:
            return np.zeros_like(u_hat)
        u = g.to_physical(u_hat)
        ux = g.to_physical(u_hat * self._ik)
        w = -vertical_cumint(g, ux)
        n_hat = g.to_spectral(u * ux + w * dz_fd(g, u))
        n_hat[:, ~g.dealias_mask] = 0.0
        return vertical_mean(g, n_hat) - n_hat

    def step(self, u_hat, dt):
        """Advance one step; returns ``(u_hat_new, stages)``.

        ``stages`` are the RK stage states at ``t, t + dt/2, t + dt/2, t + dt``.
        """
        eh, e = self.factors(dt)
        u1 = u_hat
        k1 = self.advection(u1)
        u2 = eh * (u_hat + 0.5 * dt * k1)
        k2 = self.advection(u2)
        u3 = eh * u_hat + 0.5 * dt * k2
        k3 = self.advection(u3)
        u4 = e * u_hat + dt * eh * k3
        k4 = self.advection(u4)
        new = e * u_hat + (dt / 6.0) * (e * k1 + 2.0 * eh * (k2 + k3) + k4)
        return new, (u1, u2, u3, u4)


def step_ifrk4(state, dt, cfg, grid=None):
    """One integrating-factor RK4 step of size ``dt`` (``dt = 0`` is the identity)."""
    if dt < 0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    if dt == 0:
        return replace(state, u=state.u.copy())
    integ = Integrator(cfg, grid)
    g = integ.grid
    new_hat, _ = integ.step(g.to_spectral(state.u), dt)
    u = g.to_physical(new_hat)
    if not np.all(np.isfinite(u)):
        raise BlowupError(f"non-finite values at t = {state.t + dt}", state=state)
    return State(u=u, t=state.t + dt, step_count=state.step_count + 1)


def record_times(cfg):
    """Multiples of ``record_dt`` in ``(0, t_end]``, plus ``t_end``."""
    n = int(math.floor(cfg.t_end / cfg.record_dt + 1e-9))
    times = {round(i * cfg.record_dt, 12) for i in range(1, n + 1)}
    times.add(float(cfg.t_end))
    return {t for t in times if t <= cfg.t_end}


def event_times(cfg):
    """Sorted record and checkpoint times in ``(0, t_end]``."""
    times = record_times(cfg) | {float(t) for t in cfg.checkpoint_times if t > 0}
    return sorted(times)


def run(cfg, on_checkpoint=None, u0=None):
    """Integrate from the configured initial data to ``t_end``.

    Returns ``(final_state, records)``.  Records are emitted at multiples of
    ``record_dt`` and at ``t_end``; ``on_checkpoint(state)`` is called at every
    time in ``checkpoint_times`` (including ``0`` if listed).  Steps are
    shortened so event times are hit exactly.  Raises :class:`BlowupError`
    carrying the records so far and the last finite state.
    """
    grid = grid_for(cfg)
    integ = Integrator(cfg, grid)
    u = build_initial(grid, cfg.initial_data, cfg.seed) if u0 is None else np.array(u0, dtype=float)
    u_hat = grid.to_spectral(u)
    monitor = Monitor(grid, cfg, u_hat)
    records = [monitor.record(u_hat, 0.0)]
    checkpoints = {float(t) for t in cfg.checkpoint_times}
    record_set = record_times(cfg)
    kind, value = cfg.dt_rule
    if on_checkpoint and 0.0 in checkpoints:
        on_checkpoint(State(u.copy(), 0.0, 0))

    t, steps = 0.0, 0
    for target in event_times(cfg):
        while t < target:
            state = State(u, t, steps)
            dt = min(value, cfg.dt_max) if kind == "fixed" else stable_dt(state, cfg, grid)
            last = t + dt >= target - 1e-12 * max(1.0, target)
            if last:
                dt = target - t
            new_hat, stages = integ.step(u_hat, dt)
            new_u = grid.to_physical(new_hat)
            verdict = blowup_check(dz_fd(grid, new_u), monitor.omega0_linf, cfg.blowup_factor)
            if verdict != "continue" and (monitor.omega0_linf > 0 or not np.all(np.isfinite(new_u))):
                if records[-1].t != t:
                    records.append(monitor.record(u_hat, t))
                raise BlowupError(f"t = {t + dt:.6g}: {verdict}", state=state, records=records)
            monitor.accumulate(stages, dt)
            u_hat, u = new_hat, new_u
            t = target if last else t + dt
            steps += 1
        if target in record_set:
            records.append(monitor.record(u_hat, t))
        if on_checkpoint and target in checkpoints:
            on_checkpoint(State(u.copy(), t, steps))
    return State(u, t, steps), records
