"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-check detail;
the verdict lines are also repeated in the terminal summary.
"""

import json
import math
import time

import numpy as np

from hydrofrac import exponents as ex
from hydrofrac.checkpoint import read_checkpoint, write_checkpoint
from hydrofrac.cli import main
from hydrofrac.config import SimConfig
from hydrofrac.diagnostics import interpolation_slack, slice_sobolev_norms, sobolev_x_norm
from hydrofrac.dynamics import State, nonlinear_term, recover_w, run
from hydrofrac.presets import build_initial
from hydrofrac.spectral import Grid, dx_spectral

SPLIT = 4 / math.sqrt(15)


def test_criterion_1_thresholds(acceptance):
    log = acceptance(1, "threshold roots")
    ex._THRESHOLDS = None  # time a cold computation
    t0 = time.perf_counter()
    th = ex.find_thresholds()
    elapsed = time.perf_counter() - t0
    r0, r2 = th.residuals()
    a1_closed = (13 - math.sqrt(73)) / 4
    log.check("alpha0 near 1.1108", abs(th.alpha0 - 1.1108) < 1e-3, f"alpha0 = {th.alpha0!r}")
    log.check("alpha0 cubic residual", abs(r0) < 1e-13, f"{r0:.2e}")
    log.check("alpha1 closed form", abs(th.alpha1 - a1_closed) < 1e-12, f"alpha1 = {th.alpha1!r}")
    log.check("alpha1 near 1.1140", abs(th.alpha1 - 1.1140) < 1e-3, f"|diff| = {abs(th.alpha1 - 1.114):.1e}")
    log.check("alpha2 near 1.0635", abs(th.alpha2 - 1.0635) < 1e-3, f"alpha2 = {th.alpha2!r}")
    log.check("alpha2 cubic residual", abs(r2) < 1e-13, f"{r2:.2e}")
    log.check("ordering", 1 < SPLIT < th.alpha2 < th.alpha0 < th.alpha1 < 6 / 5,
              f"{SPLIT:.6f} < {th.alpha2:.6f} < {th.alpha0:.6f} < {th.alpha1:.6f}")
    log.check("runtime < 1 s", elapsed < 1.0, f"{elapsed:.4f} s")
    log.finish()


def test_criterion_2_bootstrap_dichotomy(acceptance):
    log = acceptance(2, "bootstrap dichotomy")
    t0 = time.perf_counter()
    below = np.linspace(1, SPLIT, 52)[1:-1]
    above = np.linspace(SPLIT, 6 / 5, 52)[1:-1]
    worst, ordered = 0.0, True
    for a in below:
        tr = ex.bootstrap(a)
        if tr.reaches:
            worst = math.inf
            continue
        worst = max(worst, abs(tr.limit - ex.rho_M(a)))
        ordered &= ex.rho_M(a) < ex.rho_star(a)
    log.check("below split converges to rho_M", worst <= 1e-10, f"max |rho_k - rho_M| = {worst:.2e}")
    log.check("rho_M < rho*", ordered, "50 values")
    steps = [ex.bootstrap(a) for a in above]
    log.check("above split reaches rho*", all(t.reaches for t in steps),
              f"max steps = {max(t.steps for t in steps)}")
    lo, hi = ex.verdict_boundary()
    log.check("flip brackets 4/sqrt(15)", lo <= SPLIT <= hi and hi - lo <= 1e-6,
              f"[{lo:.10f}, {hi:.10f}]")
    s1112, s115 = ex.bootstrap(1.112), ex.bootstrap(1.15)
    log.check("alpha = 1.112 two steps", s1112.reaches and s1112.steps == 2, s1112.verdict_label())
    log.check("alpha = 1.15 one step", s115.reaches and s115.steps == 1, s115.verdict_label())
    elapsed = time.perf_counter() - t0
    log.check("runtime < 5 s", elapsed < 5.0, f"{elapsed:.3f} s")
    log.finish()


def test_criterion_3_cross_identities(acceptance):
    log = acceptance(3, "exponent cross-identities")
    rng = np.random.default_rng(20240611)
    n = 150
    worst = dict.fromkeys(["f(0)=d1", "g(d1)=r1", "f(r1)=d2", "g(d2)=r2", "h(0)", "sat f", "sat g", "sat h"], 0.0)

    def upd(key, value):
        worst[key] = max(worst[key], abs(value))

    for _ in range(n):
        # g(delta2) uses the first bound, whose pole delta2 = (alpha + 4)/2 is reached at alpha = 8/7
        a = rng.uniform(1.0001, 1.14)
        upd("f(0)=d1", ex.f_of_rho(a, 0.0) - ex.delta1(a))
        upd("g(d1)=r1", ex.g_of_delta(a, ex.delta1(a)) - ex.rho1(a))
        upd("f(r1)=d2", ex.f_of_rho(a, ex.rho1(a)) - ex.delta2(a))
        upd("g(d2)=r2", ex.g_of_delta(a, ex.delta2(a)) - ex.rho2(a))
        upd("h(0)", ex.h_of_rho(a, 0.0) - (-2 * a**2 + 2 * a + 1) / a)
        r = rng.uniform(a / 4, ex.rho_star(a))
        tm = ex.theta_mu(a, ex.f_of_rho(a, r), r)
        upd("sat f", 2 * tm.theta12 / (1 - tm.theta11) - 2)
        r = rng.uniform(a / 4, 0.5)
        tm = ex.theta_mu(a, ex.g_inverse(a, r), r)
        upd("sat g", 2 * tm.theta21 / (1 - tm.theta22) - 2)
        r = rng.uniform(a / 4, 1.0)
        tm = ex.theta_mu(a, ex.h_of_rho(a, r), r)
        upd("sat h", (2 + tm.theta32 + 2 * tm.theta33) / 4 - 1)
    for key, err in worst.items():
        log.check(key, err <= 1e-12, f"max error {err:.1e} over {n} samples")
    mu3 = ex.theta_mu(1.0, 1.0, 0.5).mu[2]
    log.check("mu3 at the critical point", abs(mu3 - 0.5) <= 1e-12, f"mu3 = {mu3!r}")
    log.finish()


def test_criterion_4_admissible_region(acceptance):
    log = acceptance(4, "admissible region")
    alpha0 = ex.find_thresholds().alpha0
    for a in np.linspace(1.0, alpha0, 11)[:-1]:
        t0 = time.perf_counter()
        sample = ex.admissible_region(a, resolution=200, upper="alpha")
        elapsed = time.perf_counter() - t0
        log.check(f"alpha = {a:.4f} optimal point admissible", sample.optimal_admissible,
                  f"(rho*, delta**) = ({sample.optimal[0]:.4f}, {sample.optimal[1]:.4f})")
        log.check(f"alpha = {a:.4f} sampling", sample.mask.any() and elapsed < 2.0,
                  f"{int(sample.mask.sum())} admissible of 40000, {elapsed:.3f} s")
    log.finish()


def test_criterion_5_linear_oracle(acceptance):
    log = acceptance(5, "linear solver oracle")
    for a in (1.0, 1.1108, 1.5, 2.0):
        cfg = SimConfig(alpha=a, nu=0.1, n_x=32, n_z=16, t_end=1.0, nonlinear=False,
                        initial_data="single_mode(1, 'linear')", record_dt=0.1)
        state, recs = run(cfg)
        g = Grid(cfg.n_x, cfg.n_z)
        u0 = build_initial(g, cfg.initial_data)
        lam = cfg.nu * (2 * np.pi) ** a
        exact = math.exp(-lam) * u0
        rel = np.abs(state.u - exact).max() / np.abs(exact).max()
        log.check(f"alpha = {a} field", rel <= 1e-10, f"relative error {rel:.1e}")
        # closed form of int_0^1 exp(-2 lam t) dt times the initial BKM integrand
        bkm_exact = recs[0].bkm_rate * -math.expm1(-2 * lam) / (2 * lam)
        rel_b = abs(recs[-1].bkm_accum - bkm_exact) / bkm_exact
        log.check(f"alpha = {a} BKM accumulator", rel_b <= 1e-8, f"relative error {rel_b:.1e}")
    log.finish()


def _rk4_order():
    def final(n):
        cfg = SimConfig(alpha=1.5, nu=0.05, n_x=32, n_z=16, t_end=0.5, dt_max=1.0, record_dt=0.5,
                        dt_policy=f"fixed({0.5 / n})",
                        initial_data="random_band(k_max=3, z_modes=2, amplitude=1.0)")
        return run(cfg)[0].u
    ref = final(640)
    ns = np.array([20, 40, 80])
    errs = np.array([np.abs(final(n) - ref).max() for n in ns])
    return np.polyfit(np.log(0.5 / ns), np.log(errs), 1)[0], errs


def _z_order():
    # u = cos(2 pi x) cos(pi z) gives u u_x + w u_z = -pi sin(4 pi x) exactly
    errs = []
    for n_z in (16, 32, 64, 128):
        g = Grid(32, n_z)
        X, Z = g.mesh
        u = np.cos(2 * np.pi * X) * np.cos(np.pi * Z)
        N = nonlinear_term(g, u, recover_w(g, u))
        errs.append(np.abs(N + np.pi * np.sin(4 * np.pi * X)).max())
    errs = np.array(errs)
    return np.polyfit(np.log([16, 32, 64, 128]), np.log(errs), 1)[0] * -1, errs


def _x_error(n_x, band=5):
    # u = f(x) (z - 1/2): N = f f' ((z - 1/2)^2 - (z^2 - z)/2), exact in z
    rng = np.random.default_rng(7)
    a, b = rng.standard_normal((2, band))
    k = np.arange(1, band + 1)
    g = Grid(n_x, 16)
    X, Z = g.mesh
    ph = 2 * np.pi * k[:, None, None] * X
    f = (a[:, None, None] * np.cos(ph) + b[:, None, None] * np.sin(ph)).sum(0)
    fp = (2 * np.pi * k[:, None, None] * (b[:, None, None] * np.cos(ph) - a[:, None, None] * np.sin(ph))).sum(0)
    u = f * (Z - 0.5)
    N = nonlinear_term(g, u, recover_w(g, u))
    return np.abs(N - f * fp * ((Z - 0.5) ** 2 - (Z**2 - Z) / 2)).max()


def test_criterion_6_convergence_orders(acceptance):
    log = acceptance(6, "convergence orders")
    p_t, errs_t = _rk4_order()
    log.check("RK4 temporal order", abs(p_t - 4) <= 0.2,
              f"slope {p_t:.3f}; errors {', '.join(f'{e:.2e}' for e in errs_t)}")
    p_z, errs_z = _z_order()
    log.check("z spatial order", abs(p_z - 2) <= 0.3,
              f"slope {p_z:.3f}; errors {', '.join(f'{e:.2e}' for e in errs_z)}")
    under = _x_error(16)
    for n_x in (32, 64):
        err = _x_error(n_x)
        log.check(f"x error at n_x = {n_x} (band 5 resolved)", err < 1e-8,
                  f"{err:.1e} (n_x = 16, unresolved: {under:.1e})")
    log.finish()


def test_criterion_7_a_priori_monitors(acceptance):
    log = acceptance(7, "a priori monitors on a production-like run")
    cfg = SimConfig(alpha=1.15, nu=0.1, n_x=128, n_z=64, t_end=1.0, initial_data="random_band()")
    t0 = time.perf_counter()
    state, recs = run(cfg)
    elapsed = time.perf_counter() - t0
    log.check("runtime <= 60 s", elapsed <= 60, f"{elapsed:.2f} s, {state.step_count} steps")
    margin = min(r.max_principle_margin for r in recs)
    log.check("max-principle margin >= 0 (tol 1e-6)", margin >= 0, f"min margin {margin:.3e}")
    ru = max(abs(r.budget_residual_u) for r in recs) / recs[0].energy_u
    rw = max(abs(r.budget_residual_omega) for r in recs) / recs[0].energy_omega
    log.check("u energy budget <= 1e-6 E(0)", ru <= 1e-6, f"max |residual| / E(0) = {ru:.3e}")
    log.check("omega energy budget <= 1e-6 E(0)", rw <= 1e-6, f"max |residual| / E(0) = {rw:.3e}")
    h = max(r.h_defect for r in recs)
    log.check("vertical mean preserved <= 1e-12", h <= 1e-12, f"max |mean_z u| = {h:.1e}")
    g = Grid(cfg.n_x, cfg.n_z)
    w = recover_w(g, state.u)
    ux = np.abs(dx_spectral(g, state.u)).max()
    log.check("w(., 0) = 0 exactly", np.all(w[0] == 0.0), "final state")
    top = max(r.w_top / r.ux_linf for r in recs)
    log.check("|w(., 1)| <= 1e-10 max|u_x|", top <= 1e-10 and np.abs(w[-1]).max() <= 1e-10 * ux,
              f"max ratio over records {top:.1e}")
    bkm = [r.bkm_accum for r in recs]
    log.check("BKM accumulator finite and nondecreasing",
              np.all(np.isfinite(bkm)) and all(b >= a for a, b in zip(bkm, bkm[1:])), f"final {bkm[-1]:.6g}")
    log.finish()


def test_criterion_8_interpolation(acceptance):
    log = acceptance(8, "interpolation inequality")
    rng = np.random.default_rng(11)
    g = Grid(64, 16)
    min_global, min_slice, strict = math.inf, math.inf, True
    for i in range(100):
        f = build_initial(g, f"random_band(k_max={int(rng.integers(2, 21))}, z_modes=3, amplitude=1.0)",
                          seed=int(rng.integers(2**31)))
        s1, s2 = np.sort(rng.uniform(0.0, 3.0, 2))
        s = rng.uniform(s1, s2)
        slack, per_slice = interpolation_slack(g, f, s1, s, s2)
        rel = slack / sobolev_x_norm(g, f, s)
        rel_slice = per_slice / slice_sobolev_norms(g, f, s)
        strict &= rel > 0
        min_global = min(min_global, rel)
        min_slice = min(min_slice, rel_slice.min())
    log.check("global inequality strict", strict and min_global > 0, f"min relative slack {min_global:.3e}")
    log.check("per z-slice inequality", min_slice >= -1e-12, f"min relative slack {min_slice:.3e}")
    log.finish()


def test_criterion_9_plumbing(acceptance, tmp_path):
    log = acceptance(9, "plumbing")
    u = np.random.default_rng(3).standard_normal((65, 128))
    write_checkpoint(tmp_path / "c.bin", State(u, t=0.7))
    back = read_checkpoint(tmp_path / "c.bin")
    log.check("checkpoint round trip", back.u.tobytes() == u.tobytes() and back.t == 0.7, "bit-exact")

    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 1.15\nnu = 0.1\nn_x = 32\nn_z = 16\nt_end = 0.2\n"
                   "initial_data = random_band(amplitude=0.5)\nseed = 5\n")
    a, b = tmp_path / "a", tmp_path / "b"
    codes = (main(["simulate", str(cfg), "--out", str(a)]),
             main(["simulate", str(a / "manifest.json"), "--out", str(b)]))
    same = (a / "diagnostics.csv").read_bytes() == (b / "diagnostics.csv").read_bytes()
    log.check("manifest reproduces byte-identical CSV", codes == (0, 0) and same, f"exit codes {codes}")

    sweep = tmp_path / "sweep.json"
    sweep.write_text(json.dumps({
        "base": {"nu": 0.1, "n_x": 32, "n_z": 16, "t_end": 0.1, "initial_data": "random_band()"},
        "jobs": [{"name": "ok1", "alpha": 1.05}, {"name": "invalid", "alpha": 2.5}, {"name": "ok2", "alpha": 1.15}],
    }))
    code = main(["sweep", str(sweep), "--jobs", "2", "--out", str(tmp_path / "sw")])
    rows = (tmp_path / "sw" / "summary.csv").read_text().splitlines()[1:]
    status = [r.split(",")[2] for r in rows]
    log.check("sweep isolates the invalid job", code == 1 and status == ["ok", "failed", "ok"], f"statuses {status}")
    log.finish()
