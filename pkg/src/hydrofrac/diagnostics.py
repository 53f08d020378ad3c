"""Norms, time accumulators and the a priori bound monitors."""

import csv
import math
from dataclasses import dataclass, fields

import numpy as np

from . import exponents
from .spectral import dz_fd

CSV_COLUMNS = (
    "t", "energy_u", "diss_u_accum", "budget_residual_u",
    "energy_omega", "diss_omega_accum", "budget_residual_omega",
    "omega_linf", "omega_z_l2", "bkm_accum", "X", "Y",
)

# exponentially fitted weights are used while the per-step decay 2 nu |2 pi k|^alpha dt stays below this
STIFF_CUTOFF = 2.0


# --------------------------------------------------------------------------
# norms
# --------------------------------------------------------------------------

def _hat(grid, f):
    return f if np.iscomplexobj(f) else grid.to_spectral(f)


def mode_energy(grid, f):
    """Per-wavenumber contributions to ``||f||_{L^2}^2``: Parseval in x, trapezoid in z."""
    f_hat = _hat(grid, f)
    zsum = grid.trapezoid_weights @ (f_hat.real**2 + f_hat.imag**2)
    return grid.mode_weight * zsum / grid.n_x**2


def l2_norm(grid, f):
    return math.sqrt(mode_energy(grid, f).sum())


def linf_norm(f):
    return float(np.abs(f).max()) if np.size(f) else 0.0


def sobolev_x_norm(grid, f, s):
    """``||Lambda_h^s f||_{L^2}``."""
    return math.sqrt(sobolev_x_norm_sq(grid, f, s))


def sobolev_x_norm_sq(grid, f, s):
    return float(grid.symbol(2 * s) @ mode_energy(grid, f))


def slice_sobolev_norms(grid, f, s):
    """``||Lambda_h^s f(., z_j)||_{L^2_x}`` for every z node."""
    f_hat = _hat(grid, f)
    power = grid.mode_weight * (f_hat.real**2 + f_hat.imag**2) / grid.n_x**2
    return np.sqrt(power @ grid.symbol(2 * s))


def interpolation_slack(grid, f, s1, s, s2):
    """Slack ``rhs - lhs`` of ``||L^s f|| <= ||L^s1 f||^(1-theta) ||L^s2 f||^theta``.

    Returns ``(global_slack, per_slice_slack)``.
    """
    if not s1 <= s <= s2 or s1 == s2:
        raise ValueError("need s1 <= s <= s2 with s1 < s2")
    theta = (s - s1) / (s2 - s1)
    lhs = sobolev_x_norm(grid, f, s)
    rhs = sobolev_x_norm(grid, f, s1) ** (1 - theta) * sobolev_x_norm(grid, f, s2) ** theta
    sl = slice_sobolev_norms(grid, f, s)
    sr = slice_sobolev_norms(grid, f, s1) ** (1 - theta) * slice_sobolev_norms(grid, f, s2) ** theta
    return rhs - lhs, sr - sl


def poincare_constant(grid, f):
    """Measured ratio ``max|f| / max|d_z f|`` for a field with zero vertical mean."""
    dz = np.abs(dz_fd(grid, f)).max()
    return float(np.abs(f).max() / dz) if dz > 0 else 0.0


def default_delta_rho(alpha):
    """``(delta_m, rho*)``, the pair that closes the small-data estimate.

    Both are clipped to stay admissible Sobolev orders when ``alpha`` is far
    from the window where they are positive.
    """
    return exponents.delta_m(alpha), max(0.0, exponents.rho_star(alpha))


def xy_functionals(grid, u, alpha, delta=None, rho=None):
    """``X = |L^d u|^2 + |L^r w|^2 + |d_z w|^2`` and ``Y`` with every order raised by ``alpha/2``."""
    d0, r0 = default_delta_rho(alpha)
    delta = d0 if delta is None else delta
    rho = r0 if rho is None else rho
    u_hat = _hat(grid, u)
    omega = dz_fd(grid, u_hat)
    omega_z = dz_fd(grid, omega)
    eu, ew, ewz = (mode_energy(grid, f) for f in (u_hat, omega, omega_z))
    sym = grid.symbol
    X = sym(2 * delta) @ eu + sym(2 * rho) @ ew + ewz.sum()
    Y = sym(2 * delta + alpha) @ eu + sym(2 * rho + alpha) @ ew + sym(alpha) @ ewz
    return float(X), float(Y)


def blowup_check(omega, omega0_linf, factor=1e6):
    """``"continue"`` or ``"halt: <reason>"``."""
    if not np.all(np.isfinite(omega)):
        return "halt: non-finite values"
    peak = linf_norm(omega)
    if peak > factor * omega0_linf:
        return f"halt: |omega|_inf = {peak:.3e} exceeds {factor:g} x initial {omega0_linf:.3e}"
    return "continue"


# --------------------------------------------------------------------------
# records
# --------------------------------------------------------------------------

@dataclass
class DiagnosticsRecord:
    t: float
    energy_u: float
    diss_u_accum: float
    budget_residual_u: float
    energy_omega: float
    diss_omega_accum: float
    budget_residual_omega: float
    omega_linf: float
    omega_z_l2: float
    bkm_accum: float
    X: float
    Y: float
    max_principle_margin: float = math.nan
    bkm_rate: float = math.nan
    h_defect: float = math.nan
    w_bottom: float = math.nan
    w_top: float = math.nan
    ux_linf: float = math.nan

    def csv_row(self):
        return [repr(float(getattr(self, c))) for c in CSV_COLUMNS]


def write_csv(path, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.csv_row())


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"{path}: header does not match the diagnostics schema")
    return [{k: float(v) for k, v in zip(CSV_COLUMNS, row)} for row in rows[1:]]


def energy_budget(records):
    """``(residual_u, residual_omega)`` arrays: ``E(t) + 2 nu int |L^{a/2} .|^2 - E(0)`` per record."""
    if not records:
        return np.zeros(0), np.zeros(0)
    e0u, e0w = records[0].energy_u, records[0].energy_omega
    ru = np.array([r.energy_u + r.diss_u_accum - e0u for r in records])
    rw = np.array([r.energy_omega + r.diss_omega_accum - e0w for r in records])
    return ru, rw


def max_principle_margin(records, tol=1e-6):
    """``min_t (|omega_0|_inf (1 + tol) - |omega(t)|_inf)``; non-negative means the bound held."""
    if not records:
        return 0.0
    bound = records[0].omega_linf * (1 + tol)
    return min(bound - r.omega_linf for r in records)


def bkm_integral(records):
    """Trapezoid-in-time integral of ``||Lambda_h^{(3-alpha)/2} omega||^2`` over the record times."""
    total = 0.0
    for a, b in zip(records, records[1:]):
        total += 0.5 * (b.t - a.t) * (a.bkm_rate + b.bkm_rate)
    return total


# --------------------------------------------------------------------------
# in-run accumulation
# --------------------------------------------------------------------------

def _moments(x):
    """``M_j(x) = int_0^1 s^j exp(-x s) ds`` for j = 0, 1, 2 (x >= 0, elementwise)."""
    x = np.asarray(x, dtype=float)
    m = np.empty((3,) + x.shape)
    small = x < 1.0
    xs = x[small]
    term = np.ones_like(xs)
    acc = [np.zeros_like(xs) for _ in range(3)]
    for n in range(25):
        for j in range(3):
            acc[j] += term / (n + j + 1)
        term = term * (-xs) / (n + 1)
    for j in range(3):
        m[j][small] = acc[j]
    xl = x[~small]
    e = np.exp(-xl)
    m[0][~small] = -np.expm1(-xl) / xl
    m[1][~small] = (1 - e * (1 + xl)) / xl**2
    m[2][~small] = (2 - e * (xl**2 + 2 * xl + 2)) / xl**3
    return m


def stage_weights(x):
    """Quadrature weights (per unit step) for samples at s = 0, 1/2, 1 of ``exp(-x s) p(s)``.

    The smooth factor ``p`` is interpolated quadratically and integrated exactly
    against the decay, so a freely decaying mode is integrated without error.
    For ``x -> 0`` the weights tend to Simpson's ``1/6, 4/6, 1/6``; stiff modes
    (``x > STIFF_CUTOFF``) fall back to the Simpson weights.
    """
    x = np.asarray(x, dtype=float)
    m0, m1, m2 = _moments(np.minimum(x, STIFF_CUTOFF))
    w0 = 2 * m2 - 3 * m1 + m0
    wh = (4 * m1 - 4 * m2) * np.exp(0.5 * np.minimum(x, STIFF_CUTOFF))
    w1 = (2 * m2 - m1) * np.exp(np.minimum(x, STIFF_CUTOFF))
    stiff = x > STIFF_CUTOFF
    w0 = np.where(stiff, 1 / 6, w0)
    wh = np.where(stiff, 4 / 6, wh)
    w1 = np.where(stiff, 1 / 6, w1)
    return w0, wh, w1


class Monitor:
    """Accumulates dissipation and BKM integrals step by step and emits records.

    ``accumulate`` takes the four Runge-Kutta stage states of a step (spectral,
    at ``t, t + dt/2, t + dt/2, t + dt``).
    """

    def __init__(self, grid, cfg, u0_hat):
        self.grid = grid
        self.alpha = cfg.alpha
        self.nu = cfg.nu
        self.monitors = set(cfg.monitors)
        self.delta = cfg.delta
        self.rho = cfg.rho
        self.mp_tol = cfg.mp_tol
        self.rate = 2 * cfg.nu * grid.symbol(cfg.alpha)
        self.bkm_symbol = grid.symbol(3 - cfg.alpha)
        self.diss_u = 0.0
        self.diss_omega = 0.0
        self.bkm = 0.0
        self._weights = {}
        self.e0u = float(mode_energy(grid, u0_hat).sum())
        self.e0w = float(mode_energy(grid, dz_fd(grid, u0_hat)).sum())
        self.omega0_linf = linf_norm(dz_fd(grid, grid.to_physical(u0_hat)))

    def weights(self, dt):
        if dt not in self._weights:
            if len(self._weights) > 8:
                self._weights.clear()
            self._weights[dt] = stage_weights(self.rate * dt)
        return self._weights[dt]

    def accumulate(self, stages, dt):
        g = self.grid
        w0, wh, w1 = self.weights(dt)
        qu = [mode_energy(g, s) for s in stages]
        qw = [mode_energy(g, dz_fd(g, s)) for s in stages]
        iu = dt * (w0 * qu[0] + wh * 0.5 * (qu[1] + qu[2]) + w1 * qu[3])
        iw = dt * (w0 * qw[0] + wh * 0.5 * (qw[1] + qw[2]) + w1 * qw[3])
        self.diss_u += float(self.rate @ iu)
        self.diss_omega += float(self.rate @ iw)
        self.bkm += float(self.bkm_symbol @ iw)

    def record(self, u_hat, t):
        g = self.grid
        u = g.to_physical(u_hat)
        omega_hat = dz_fd(g, u_hat)
        omega = g.to_physical(omega_hat)
        eu = float(mode_energy(g, u_hat).sum())
        ew = float(mode_energy(g, omega_hat).sum())
        ux_hat = u_hat * (1j * g.kappa)
        ux_hat[:, -1] = 0.0
        ux = g.to_physical(ux_hat)
        w_top = -float(np.abs(g.trapezoid_weights @ ux).max())
        if "xy" in self.monitors:
            X, Y = xy_functionals(g, u_hat, self.alpha, self.delta, self.rho)
        else:
            X = Y = math.nan
        omega_linf = linf_norm(omega)
        rec = DiagnosticsRecord(
            t=float(t),
            energy_u=eu,
            diss_u_accum=self.diss_u,
            budget_residual_u=eu + self.diss_u - self.e0u,
            energy_omega=ew,
            diss_omega_accum=self.diss_omega,
            budget_residual_omega=ew + self.diss_omega - self.e0w,
            omega_linf=omega_linf,
            omega_z_l2=math.sqrt(float(mode_energy(g, dz_fd(g, omega_hat)).sum())),
            bkm_accum=self.bkm,
            X=X,
            Y=Y,
            max_principle_margin=self.omega0_linf * (1 + self.mp_tol) - omega_linf,
            bkm_rate=sobolev_x_norm_sq(g, omega_hat, (3 - self.alpha) / 2),
            h_defect=float(np.abs(g.trapezoid_weights @ u).max()),
            w_bottom=0.0,
            w_top=abs(w_top),
            ux_linf=linf_norm(ux),
        )
        if "energy" not in self.monitors:
            rec.energy_u = rec.diss_u_accum = rec.budget_residual_u = math.nan
        if "omega" not in self.monitors:
            rec.energy_omega = rec.diss_omega_accum = rec.budget_residual_omega = math.nan
        if "bkm" not in self.monitors:
            rec.bkm_accum = math.nan
        return rec


def record_fields():
    return [f.name for f in fields(DiagnosticsRecord)]
