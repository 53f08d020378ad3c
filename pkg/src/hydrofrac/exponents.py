"""Closed-form regularity exponents, thresholds and the rho/delta bootstrap.

All functions are pure.  ``alpha`` is the dissipation order; ``delta`` is the
horizontal Sobolev order propagated for ``u`` and ``rho`` the one propagated
for the vorticity ``omega``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

ALPHA_SPLIT = 4.0 / math.sqrt(15.0)
ALPHA_PRIOR = 6.0 / 5.0

# coefficients, highest degree first
CUBIC_ALPHA0 = (2.0, 3.0, -4.0, -2.0)
CUBIC_ALPHA2 = (6.0, 17.0, -70.0, 48.0)

BOOTSTRAP_TOL = 1e-14
BOOTSTRAP_MAXITER = 100_000


# --------------------------------------------------------------------------
# root finding
# --------------------------------------------------------------------------

def polyval(coeffs, x):
    """Horner evaluation of a polynomial and its derivative."""
    p = 0.0
    dp = 0.0
    for c in coeffs:
        dp = dp * x + p
        p = p * x + c
    return p, dp


def bisect_newton(coeffs, lo, hi, bracket_tol=1e-6, residual_tol=1e-13, maxiter=60):
    """Root of a polynomial in ``[lo, hi]``: bisection down to ``bracket_tol``, then Newton.

    The Newton polish is kept inside the bracket; once the residual is below
    ``residual_tol`` one more step is taken (the error is then squared) and it
    stops, or earlier if the iterate stops moving.
    """
    f_lo, _ = polyval(coeffs, lo)
    f_hi, _ = polyval(coeffs, hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > bracket_tol:
        mid = 0.5 * (lo + hi)
        f_mid, _ = polyval(coeffs, mid)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        p, dp = polyval(coeffs, x)
        x_new = min(max(x - p / dp, lo), hi)
        if x_new == x or abs(p) < residual_tol:
            return x_new
        x = x_new
    return x


@dataclass(frozen=True)
class Thresholds:
    alpha0: float
    alpha1: float
    alpha2: float
    alpha_split: float = ALPHA_SPLIT

    def residuals(self):
        return (polyval(CUBIC_ALPHA0, self.alpha0)[0], polyval(CUBIC_ALPHA2, self.alpha2)[0])


_THRESHOLDS = None


def find_thresholds():
    """alpha0 and alpha2 from their cubics on [1, 1.2]; alpha1 and 4/sqrt(15) in closed form."""
    global _THRESHOLDS
    if _THRESHOLDS is None:
        _THRESHOLDS = Thresholds(
            alpha0=bisect_newton(CUBIC_ALPHA0, 1.0, 1.2),
            alpha1=(13.0 - math.sqrt(73.0)) / 4.0,
            alpha2=bisect_newton(CUBIC_ALPHA2, 1.0, 1.2),
        )
    return _THRESHOLDS


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------

def delta1(alpha):
    return (2 * alpha**2 - alpha) / 2


def delta_star(alpha):
    return max(alpha / 2, (-2 * alpha**2 + 2 * alpha + 1) / alpha)


def rho1(alpha):
    return min((2 * alpha**2 - alpha) / (8 - 4 * alpha), (2 * alpha**2 + alpha - 2) / 4)


def delta2(alpha):
    return alpha * (2 * alpha - 1) * (2 - alpha) / (2 * (4 - alpha - 2 * alpha**2))


def rho2(alpha):
    """``min`` of the two admissibility bounds evaluated at ``delta2``.

    Undefined (``ValueError``) once ``delta2`` passes the pole of the first bound.
    """
    d = delta2(alpha)
    if alpha - 2 * d + 4 <= 0:
        raise ValueError(f"delta2 = {d} is past the pole of the first bound")
    return min(alpha * (2 * alpha + 2 * d - 1) / (2 * (alpha - 2 * d + 4)), (d + alpha - 1) / 2)


def rho_star(alpha):
    """Vorticity regularity that makes the BKM integrand ``Lambda^{(3-alpha)/2} omega`` dissipative."""
    return (3 - 2 * alpha) / 2


def delta_dstar(alpha):
    return 2 * (-alpha**2 - alpha + 3) / (3 - alpha)


def delta_m(alpha):
    return max(alpha / 2, delta_dstar(alpha))


def rho_M(alpha):
    """Smaller fixed point of the bootstrap map; ``None`` when ``16 - 15 alpha^2 < 0``."""
    disc = 16 - 15 * alpha**2
    if disc < 0:
        return None
    return (4 - alpha - math.sqrt(disc)) / 8


def f_of_rho(alpha, rho):
    """Largest admissible ``delta`` given control of ``Lambda^rho omega``."""
    if rho >= 0.5:
        raise ValueError(f"f(rho) has a pole at rho = 1/2; got rho = {rho}")
    return (2 * alpha**2 - alpha + 2 * rho * (alpha - 2)) / (2 * (1 - 2 * rho))


def _g_first(alpha, delta):
    return alpha * (2 * alpha + 2 * delta - 1) / (2 * (alpha - 2 * delta + 4))


def _g_second(alpha, delta):
    return (delta + alpha - 1) / 2


def g_branch(alpha, delta):
    """1 on ``[(2 - alpha)/2, 2 - alpha]`` (ties go to the first branch), 2 elsewhere."""
    return 1 if (2 - alpha) / 2 <= delta <= 2 - alpha else 2


def g_of_delta(alpha, delta):
    """Largest admissible ``rho`` given control of ``Lambda^delta u`` (piecewise form)."""
    if g_branch(alpha, delta) == 1:
        return _g_first(alpha, delta)
    return _g_second(alpha, delta)


def g_inverse(alpha, rho):
    if alpha / 4 <= rho <= 0.5:
        return (alpha + 4) / 2 - 3 * alpha * (alpha + 1) / (2 * (alpha + 2 * rho))
    return 2 * rho - alpha + 1


def h_of_rho(alpha, rho):
    """Smallest ``delta`` for which the ``J_2`` term closes."""
    if 2 * rho + alpha <= 0:
        raise ValueError("h(rho) requires 2 rho + alpha > 0")
    return alpha * (2 - alpha) / (2 * (2 * rho + alpha)) + (-3 * alpha**2 + 2 * alpha + 2) / (2 * alpha)


def bootstrap_map(alpha, rho):
    return alpha * (2 * alpha - 1 - 2 * rho) / (4 * (2 - alpha - 2 * rho))


@dataclass
class ThetaMu:
    theta11: float
    theta12: float
    theta21: float
    theta22: float
    theta32: float
    theta33: float
    mu: tuple
    delta_window: bool
    rho_window: bool

    @property
    def in_window(self):
        return self.delta_window and self.rho_window


def theta_mu(alpha, delta, rho):
    """Interpolation exponents of the coupled estimate and the eight powers ``mu_i``."""
    if 2 * rho + alpha <= 0:
        raise ValueError("theta/mu exponents need 2 rho + alpha > 0")
    t12 = (2 * delta - alpha) / (2 * rho + alpha)
    t11 = (2 - 2 * delta + t12) / alpha
    t22 = (4 * rho - alpha) / (2 * rho + alpha)
    t21 = (2 - 2 * delta + t22) / alpha
    t32 = (2 - alpha) / (2 * rho + alpha)
    t33 = (-2 * delta * alpha - alpha**2 + 2 * alpha + 2) / (2 * alpha**2)
    mu = (1.0, 1.0, 1 - t12, 1.0, 1.0, 1 - t22, 1.0, (1 - t32) / 2)
    return ThetaMu(
        theta11=t11, theta12=t12, theta21=t21, theta22=t22, theta32=t32, theta33=t33,
        mu=mu,
        delta_window=alpha / 2 <= delta < alpha + rho,
        rho_window=alpha / 4 <= rho < alpha,
    )


# --------------------------------------------------------------------------
# bootstrap
# --------------------------------------------------------------------------

@dataclass
class BootstrapTrace:
    alpha: float
    rho_sequence: list
    delta_sequence: list
    verdict: str  # "reaches_rho_star" | "converges_to_rho_M"
    steps: int
    limit: float = None
    pole: bool = False

    @property
    def reaches(self):
        return self.verdict == "reaches_rho_star"

    def verdict_label(self):
        if self.reaches:
            return f"reaches({self.steps})"
        return f"converges({self.limit!r})"


def bootstrap(alpha, tol=BOOTSTRAP_TOL, maxiter=BOOTSTRAP_MAXITER):
    """Iterate ``rho_{k+1} = alpha(2 alpha - 1 - 2 rho_k) / (4(2 - alpha - 2 rho_k))`` from 0.

    Stops when ``rho_k >= rho*`` or when successive iterates differ by less than
    ``tol``.  ``delta_sequence[k]`` is ``f(rho_k)``, the companion ``delta_{k+1}``.
    """
    target = rho_star(alpha)
    rhos = [0.0]
    deltas = []
    rho = 0.0
    for k in range(maxiter):
        if rho >= target:
            return BootstrapTrace(alpha, rhos, deltas, "reaches_rho_star", k)
        deltas.append(f_of_rho(alpha, rho) if rho < 0.5 else math.inf)
        denom = 2 - alpha - 2 * rho
        if denom <= 0:
            # the map runs past its pole: rho is unbounded from here on
            return BootstrapTrace(alpha, rhos, deltas, "reaches_rho_star", k + 1, pole=True)
        nxt = bootstrap_map(alpha, rho)
        if abs(nxt - rho) < tol:
            if nxt > rho:
                rhos.append(nxt)
            return BootstrapTrace(alpha, rhos, deltas, "converges_to_rho_M", k + 1, limit=rhos[-1])
        rhos.append(nxt)
        rho = nxt
    return BootstrapTrace(alpha, rhos, deltas, "converges_to_rho_M", maxiter, limit=rho)


def verdict_boundary(lo=1.01, hi=1.19, tol=1e-7):
    """Bisect the alpha at which the bootstrap verdict flips from convergence to reaching rho*."""
    if bootstrap(lo).reaches or not bootstrap(hi).reaches:
        raise ValueError("verdict does not flip on the given bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bootstrap(mid).reaches:
            hi = mid
        else:
            lo = mid
    return lo, hi


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------

@dataclass
class ExponentReport:
    alpha: float
    delta1: float
    delta2: float
    delta_star: float
    delta_dstar: float
    delta_m: float
    rho_star: float
    rho1: float
    rho2: float
    rho_M: float
    thresholds: Thresholds
    flags: dict = field(default_factory=dict)

    FIELDS = ("delta1", "delta2", "delta_star", "delta_dstar", "delta_m",
              "rho_star", "rho1", "rho2", "rho_M")

    def regime(self):
        a, th = self.alpha, self.thresholds
        if a > 2 or a <= 0:
            return "outside (0, 2]"
        if a >= th.alpha0:
            return "global (alpha >= alpha0)"
        if a == 1:
            return "critical small-data (alpha = 1)"
        if a > 1:
            return "small-data (1 < alpha < alpha0)"
        return "ill-posed (alpha < 1)"

    def as_row(self):
        th = self.thresholds
        row = {"alpha": self.alpha}
        for name in self.FIELDS:
            row[name] = getattr(self, name)
        row.update(alpha0=th.alpha0, alpha1=th.alpha1, alpha2=th.alpha2, alpha_split=th.alpha_split,
                   regime=self.regime())
        return row


def _guarded(fn, alpha):
    try:
        v = fn(alpha)
    except (ZeroDivisionError, ValueError):
        return None
    if v is None or not math.isfinite(v):
        return None
    return v


def exponent_table(alpha):
    """Every closed-form exponent at ``alpha``; entries outside their window are ``None``.

    ``delta1``, ``delta_star``, ``rho1`` are derived for ``1 < alpha < 6/5``
    (their values at both endpoints are kept, being the boundary limits);
    ``delta2``/``rho2`` additionally need ``rho1 < 1/2`` so that ``f(rho1)``
    is on the near side of its pole.
    """
    alpha = float(alpha)
    sub = 1 <= alpha <= ALPHA_PRIOR
    flags = {"subcritical_window": 1 < alpha < ALPHA_PRIOR}
    r1 = _guarded(rho1, alpha) if sub else None
    second = sub and r1 is not None and r1 < 0.5 and 4 - alpha - 2 * alpha**2 > 0
    flags["second_iterate"] = second
    return ExponentReport(
        alpha=alpha,
        delta1=_guarded(delta1, alpha) if sub else None,
        delta2=_guarded(delta2, alpha) if second else None,
        delta_star=_guarded(delta_star, alpha) if sub else None,
        delta_dstar=_guarded(delta_dstar, alpha) if alpha < 3 else None,
        delta_m=_guarded(delta_m, alpha) if alpha < 3 else None,
        rho_star=rho_star(alpha),
        rho1=r1,
        rho2=_guarded(rho2, alpha) if second else None,
        rho_M=rho_M(alpha) if 1 < alpha <= ALPHA_SPLIT else None,
        thresholds=find_thresholds(),
        flags=flags,
    )


# --------------------------------------------------------------------------
# small-data admissible region
# --------------------------------------------------------------------------

CONDITION_TOL = 1e-12


def admissible_conditions(alpha, rho, delta, upper="alpha", tol=CONDITION_TOL):
    """Each collected condition on ``(rho, delta)`` as a boolean (arrays broadcast).

    The ``delta <= f(rho)`` condition is evaluated with the denominator cleared,
    ``2 delta (1 - 2 rho) <= 2 alpha^2 - alpha + 2 rho (alpha - 2)``, which is the
    form the underlying exponent inequality takes and stays meaningful at the
    ``rho = 1/2`` pole (the critical case ``alpha = 1``).
    ``upper`` selects ``h(rho) + alpha/2`` ("alpha") or ``h(rho) + rho/2`` ("rho").
    """
    rho = np.asarray(rho, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if upper not in ("alpha", "rho"):
        raise ValueError(f"upper must be 'alpha' or 'rho', got {upper!r}")
    f_ok = 2 * delta * (1 - 2 * rho) <= 2 * alpha**2 - alpha + 2 * rho * (alpha - 2) + tol
    first = (rho >= alpha / 4) & (rho <= 0.5)
    with np.errstate(divide="ignore", invalid="ignore"):
        ginv = np.where(first,
                        (alpha + 4) / 2 - 3 * alpha * (alpha + 1) / (2 * (alpha + 2 * rho)),
                        2 * rho - alpha + 1)
        h = alpha * (2 - alpha) / (2 * (2 * rho + alpha)) + (-3 * alpha**2 + 2 * alpha + 2) / (2 * alpha)
    slack = alpha / 2 if upper == "alpha" else rho / 2
    return {
        "f": f_ok,
        "g_inverse": delta >= ginv - tol,
        "h_lower": delta >= h - tol,
        "h_upper": delta <= h + slack + tol,
        "delta_window": (delta >= alpha / 2 - tol) & (delta < alpha + rho),
        "rho_window": (rho >= alpha / 4 - tol) & (rho < alpha),
    }


def is_admissible(alpha, rho, delta, upper="alpha", tol=CONDITION_TOL):
    conds = admissible_conditions(alpha, rho, delta, upper=upper, tol=tol)
    out = np.ones(np.broadcast(np.asarray(rho), np.asarray(delta)).shape, dtype=bool)
    for v in conds.values():
        out &= v
    return out if out.shape else bool(out)


@dataclass
class RegionSample:
    alpha: float
    rho: np.ndarray     # 1-D axis
    delta: np.ndarray   # 1-D axis
    mask: np.ndarray    # [i_delta, i_rho]
    optimal: tuple
    optimal_admissible: bool
    upper: str


def admissible_region(alpha, resolution=200, rho_range=(0.0, 1.0), delta_range=(0.0, 2.0), upper="alpha"):
    """Rasterize the admissible set and test the point ``(rho*, delta**)``."""
    th = find_thresholds()
    if not 1 <= alpha < th.alpha0:
        raise ValueError(f"admissible region is defined for alpha in [1, alpha0 = {th.alpha0:.6f}); got {alpha}")
    rho = np.linspace(*rho_range, resolution)
    delta = np.linspace(*delta_range, resolution)
    mask = is_admissible(alpha, rho[None, :], delta[:, None], upper=upper)
    opt = (rho_star(alpha), delta_dstar(alpha))
    return RegionSample(alpha, rho, delta, mask, opt, bool(is_admissible(alpha, *opt, upper=upper)), upper)


def smallness_constant(nu, X0, C, mu):
    """``min_i (nu / (16 C_i))^{1/mu_i} X0^{-(1 - mu_i)/(2 mu_i)}``."""
    C = np.asarray(C, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if C.shape != mu.shape or C.ndim != 1:
        raise ValueError("C and mu must be 1-D sequences of equal length")
    if nu <= 0 or X0 <= 0 or np.any(C <= 0):
        raise ValueError("nu, X0 and every C_i must be positive")
    if np.any(mu <= 0) or np.any(mu > 1):
        raise ValueError("every mu_i must lie in (0, 1]")
    terms = (nu / (16 * C)) ** (1 / mu) * X0 ** (-(1 - mu) / (2 * mu))
    return float(terms.min())
