"""Acceptance gate: one test per criterion, each timed and reported as a PASS/FAIL line."""

import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from nmekit import (
    Box,
    SeminormProfile,
    SolverParams,
    SpaceConfig,
    check_openness,
    check_weak_pi_surjectivity,
    fixed_point_solve,
    identity_problem,
    make_diagonal,
    make_smoothing_quadratic,
    sample_graph,
    solve_continuation,
)
from nmekit.graded import CanonicalMetric
from nmekit.io import preset_target
from nmekit.suites import run_suite

SP = SpaceConfig(levels=12, coeffs=64)
SEED = 20240601


def record(num, title, ok, detail, seconds, limit):
    timed = seconds < limit
    status = "PASS" if ok and timed else "FAIL"
    line = f"[C{num:02d}] {status} {title}: {detail}; {seconds:.2f}s (limit {limit:g}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line
    assert timed, line


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_c01_metric_suite():
    r, dt = timed(lambda: run_suite("metric_axioms", SEED, 1e-12))
    worst = max(max(w["triangle"], w["shift"]) for w in r.metrics["worst"].values())
    record(1, "metric axioms, 3 handles x 1e4 triples", r.passed and r.cases == 30_000,
           f"worst triangle/shift excess {worst:.2e}", dt, 5)


def test_c02_key_inclusion():
    r, dt = timed(lambda: run_suite("key_inclusion", SEED, 1e-12))
    record(2, "rho(0,x) <= c|s| on 1e3 draws", r.passed and r.cases == 1000,
           f"worst excess {r.metrics['worst_excess']:.2e}", dt, 2)


def test_c03_banach_identity():
    r, dt = timed(lambda: run_suite("banach_identity", SEED, 1e-12))
    record(3, "s_norm <= 1 iff box membership on 1e3 draws", r.passed and r.cases == 1000,
           f"{r.metrics['members']} members, {len(r.failures)} mismatches", dt, 2)


def test_c04_net_covering():
    r, dt = timed(lambda: run_suite("net_covering", SEED, 1e-12))
    pe = r.metrics["per_eps"]
    full = all(v["covered"] == 10_000 and v["size"] < v["cap"] for v in pe.values())
    detail = ", ".join(f"eps={k}: size {v['size']}, max {v['max_distance']:.3g} <= {v['radius']:.3g}"
                       for k, v in pe.items())
    record(4, "epsilon-net covers 1e4 samples within 3 eps", r.passed and full, detail, dt, 60)


def test_c05_ekeland():
    r, dt = timed(lambda: run_suite("ekeland", SEED, 1e-12))
    record(5, "Ekeland on 100 random finite spaces", r.passed and r.cases == 100,
           f"max {r.metrics['max_points']} points, {len(r.failures)} failures", dt, 10)


def test_c06_orbit_trichotomy():
    r, dt = timed(lambda: run_suite("orbit_trichotomy", SEED))
    m = r.metrics
    ok = r.passed and m["scenarios"] == 50 and m["tampered_caught"] == 10
    record(6, "50 scripted orbits classified, 10 tampered traces rejected", ok,
           f"cases {m['cases']}, tampered caught {m['tampered_caught']}/10", dt, 10)


def test_c07_diagonal_solver():
    P = make_diagonal(1, 1.0, SP)
    y = preset_target("e1+0.1e3", SP)
    cert, dt = timed(lambda: solve_continuation(P, y))
    res = float(np.max(cert.residual_levels))
    # ratios against the closed form, recomputed here from the coefficients
    x, yc = cert.x.coeffs, y.coeffs
    ratios = [max((1 + k) ** n * abs(x[k]) for k in range(64)) / max((1 + k) ** (n + 1) * abs(yc[k]) for k in range(64))
              for n in range(11)]
    ok = res <= 1e-8 and max(ratios) <= 1 + 1e-9 and cert.passed
    record(7, "diagonal d=1 solve of y = e1 + 0.1 e3", ok,
           f"max level residual {res:.2e}, max ratio - 1 = {max(ratios) - 1:.1e}", dt, 5)


def test_c08_smoothing_solver():
    lam = 0.1
    P = make_smoothing_quadratic(lam, SP)
    y = preset_target("smoothing_small", SP)
    params = SolverParams(eps=1e-3)
    cert, dt = timed(lambda: solve_continuation(P, y, params))
    metric = CanonicalMetric(SP)
    x_fp, _ = fixed_point_solve(lam, y.coeffs)
    agree = metric.distance(cert.x.coeffs, x_fp)
    # replay the accepted steps and test each in the canonical target metric
    x = np.zeros(64)
    fx = P.f(x)
    worst_step = -np.inf
    for st in cert.steps:
        u = P.R(x, y.coeffs)
        xn = x + st.t * u
        fn = P.f(xn)
        worst_step = max(worst_step, metric.from_zero(fn - fx - st.t * y.coeffs) - params.eps * st.t)
        x, fx = xn, fn
    replay_ok = worst_step <= 0 and np.allclose(x, cert.x.coeffs, rtol=0, atol=1e-15)
    ok = cert.residual_rho <= 1e-6 and agree <= 1e-6 and replay_ok and float(np.max(np.abs(y.coeffs))) <= 0.05
    record(8, "smoothing quadratic lam=0.1, |y|_0 = 0.05", ok,
           f"residual rho {cert.residual_rho:.2e}, oracle gap {agree:.2e}, "
           f"{len(cert.steps)} steps, worst step margin {worst_step:.2e}", dt, 30)


def test_c09_openness_consistency():
    def run():
        N = SP.levels
        V = Box(np.zeros(64), SeminormProfile(2.0 ** np.arange(N)))
        F = sample_graph(make_diagonal(1, 1.0, SP), 0.05, coords=(0, 1), V=V)
        s = SeminormProfile(0.3 * 2.0 ** np.arange(N))
        kappa = 1.0
        weak = check_weak_pi_surjectivity(F, kappa, s, rng=np.random.default_rng(SEED))
        good = check_openness(F, kappa / 2, rng=np.random.default_rng(SEED))
        bad = check_openness(F, 10.0, rng=np.random.default_rng(SEED))
        return F, weak, good, bad

    (F, weak, good, bad), dt = timed(run)
    ok = weak.consistent and good.consistent and not bad.consistent
    record(9, "weak surjectivity at kappa=1 then openness at kappa/2, theta=10 control", ok,
           f"delta {F.resolution:.3g}; weak worst {weak.worst:.3g}; theta=0.5 worst {good.worst:.3g}; "
           f"theta=10 unmatched {len(bad.unmatched)}/{bad.probes}", dt, 60)


def _fd_errors(P, rng, n=100, t=1e-6, x_size=1.0):
    metric = CanonicalMetric(P.space, shift=P.d)
    k = np.arange(P.space.coeffs, dtype=np.float64)
    worst = 0.0
    for _ in range(n):
        x = x_size * rng.uniform(-1, 1, 64) * (1.0 + k) ** -11
        v = rng.uniform(-1, 1, 64) * (1.0 + k) ** -11 * 10.0 ** rng.uniform(-1, 1)
        u = P.right_inverse(x, v)
        fd = (P.f(x + t * u) - P.f(x)) / t
        worst = max(worst, metric.distance(fd, v))
    return worst


def test_c10_gradient_sanity():
    rng = np.random.default_rng(SEED)
    problems = [identity_problem(SP), make_diagonal(1, 1.0, SP), make_diagonal(3, 1.0, SP),
                make_smoothing_quadratic(0.1, SP)]

    def run():
        return {P.name: _fd_errors(P, rng, x_size=0.1 if "smoothing" in P.name else 1.0) for P in problems}

    errs, dt = timed(run)
    ok = all(e <= 1e-4 for e in errs.values())
    record(10, "finite differences of every R oracle, 100 (x, v) each, t=1e-6", ok,
           ", ".join(f"{k} {v:.1e}" for k, v in errs.items()), dt, 10)
