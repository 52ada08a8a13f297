"""Acceptance criteria 1-8, each with its pinned tolerance and runtime budget.

Every test records a ``PASS``/``FAIL`` line that is printed in the terminal
summary (and directly when this file is run as a script).
"""

import time
from functools import lru_cache

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_nonneg_finite
from jsrlab import dist
from jsrlab.dist import MatrixDistribution
from jsrlab.jsr import jsr_brute_force, jsr_limit_formula
from jsrlab.lyapunov import synth_cone_norm, synth_quadratic, verify_certificate
from jsrlab.pradius import p_radius_exact, p_radius_montecarlo
from jsrlab.simulate import count_increases, estimate_pth_mean_rate, simulate_stochastic


def record(n, ok, detail, seconds, budget):
    in_time = seconds < budget
    status = "PASS" if ok and in_time else "FAIL"
    line = f"criterion {n}: {status}  {detail}  [{seconds:.2f} s / budget {budget} s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line
    assert in_time, line


def test_criterion_1_scalar_uniform_closed_form():
    t0 = time.perf_counter()
    d = dist.uniform_scalar()
    errs = [abs(p_radius_exact(d, p).diagnostics["rho"] - 1 / (p + 1)) for p in range(1, 21)]
    seq = jsr_limit_formula(d, 100).estimates()
    closed = (1 / (np.arange(1, 101) + 1)) ** (1 / np.arange(1, 101))
    increasing = bool(np.all(np.diff(seq) > 0)) and np.allclose(seq, closed, rtol=1e-12)
    ok = max(errs) <= 1e-12 and increasing and seq[-1] >= 0.9549
    detail = (f"max|rho-1/(p+1)|={max(errs):.2e} (<=1e-12) increasing={increasing} "
              f"value(p=100)={seq[-1]:.10f} (>=0.9549)")
    record(1, ok, detail, time.perf_counter() - t0, 1)


def test_criterion_2_example5_perron_weight():
    t0 = time.perf_counter()
    d = dist.example5()
    g = synth_cone_norm(d, 1, 0.97).g
    rho = p_radius_exact(d, 1).value
    ok = g[-1] == 1.0 and abs(g[0] - 0.3838) <= 1e-3 and 0.944 <= rho <= 0.947
    detail = f"g=({g[0]:.6f}, {g[1]:g}) |g1-0.3838|<=1e-3, rho(E[A])={rho:.6f} in [0.944, 0.947]"
    record(2, ok, detail, time.perf_counter() - t0, 1)


def test_criterion_3_limit_formula_vs_brute_force():
    t0 = time.perf_counter()
    mats = [np.diag([0.9, 0.2]), np.diag([0.2, 0.9])]
    b = jsr_brute_force(mats, 8)
    t = jsr_limit_formula(MatrixDistribution.finite(mats, [0.5, 0.5]), 16)
    est16 = next(r.estimate for r in t.rows if r.p == 16)
    ok = (b.lower == 0.9 and b.lower <= 0.9 <= b.upper and t.is_monotone()
          and 0.85 <= est16 <= 0.9 + 1e-9)
    detail = (f"brute force [{b.lower:.12g}, {b.upper:.12g}] nondecreasing={t.is_monotone()} "
              f"estimate(16)={est16:.6f} in [0.85, 0.9+1e-9]")
    record(3, ok, detail, time.perf_counter() - t0, 30)


@lru_cache(maxsize=1)
def lmi_suite():
    """50 random cone-invariant finite distributions with their p=2 certificates."""
    rng = np.random.default_rng(2024)
    out = []
    for i in range(50):
        n = 2 + i % 2
        d = random_nonneg_finite(rng, n)
        target = rng.uniform(0.3, 0.95)
        d = d.scaled(target / p_radius_exact(d, 2).value)
        rho2 = p_radius_exact(d, 2).value
        gamma = (1 + rho2) / 2
        out.append((d, gamma, synth_quadratic(d, 2, gamma)))
    return out


def test_criterion_4_lmi_soundness():
    t0 = time.perf_counter()
    worst_res, worst_eig = -np.inf, np.inf
    for d, gamma, cert in lmi_suite():
        r = verify_certificate(d, cert)
        worst_res = max(worst_res, r.residual)
        worst_eig = min(worst_eig, r.min_eig)
    ok = worst_res <= 1e-8 and worst_eig >= 1 - 1e-8
    detail = (f"50 distributions: max residual={worst_res:.3e} (<=1e-8) "
              f"min lambda_min(H)={worst_eig:.12g} (>=1-1e-8)")
    record(4, ok, detail, time.perf_counter() - t0, 60)


def test_criterion_5_monotonicity_and_lift_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst_drop, worst_lift = 0.0, 0.0
    for i in range(50):
        d = random_nonneg_finite(rng, 2 + i % 2)
        vals = np.array([p_radius_exact(d, p).value for p in range(1, 9)])
        worst_drop = max(worst_drop, float(np.max(-np.diff(vals) / vals[1:])))
        sq = dist.pushforward_kron(d, 2)
        for p in range(1, 5):
            lhs = p_radius_exact(d, 2 * p).value ** 2
            rhs = p_radius_exact(sq, p).value
            worst_lift = max(worst_lift, abs(lhs - rhs) / rhs)
    ok = worst_drop <= 1e-10 and worst_lift <= 1e-8
    detail = (f"50 distributions, p<=8: max relative drop={max(worst_drop, 0):.2e}, "
              f"max |rho_2p^2 - rho_p(mu x2)|/rho={worst_lift:.2e} (<=1e-8)")
    record(5, ok, detail, time.perf_counter() - t0, 60)


def test_criterion_6_montecarlo_consistency():
    t0 = time.perf_counter()
    d = dist.example5()
    errs = {}
    for p in (1, 2):
        exact = p_radius_exact(d, p).value
        mc = p_radius_montecarlo(d, p, 30, 100_000, seed=0).value
        errs[p] = abs(mc - exact) / exact
    ok = max(errs.values()) < 0.05
    detail = f"relative error p=1: {errs[1]:.4f}, p=2: {errs[2]:.4f} (<0.05)"
    record(6, ok, detail, time.perf_counter() - t0, 60)


def test_criterion_7_figure1_qualitative():
    t0 = time.perf_counter()
    d = dist.example5()
    V = synth_cone_norm(d, 1, 0.97)
    runs = [simulate_stochastic(d, [0.0, 1.0], 50, 200, seed=42, evaluators=[V]) for _ in range(2)]
    det = np.array_equal(runs[0].states, runs[1].states) and np.array_equal(
        runs[0].mean_V[0], runs[1].mean_V[0]
    )
    inc_v = count_increases(runs[0].mean_V[0])
    inc_n = count_increases(runs[0].mean_norm)
    ok = det and inc_v < inc_n
    detail = f"seed 42: increasing steps V_g={inc_v} < norm={inc_n}, deterministic={det}"
    record(7, ok, detail, time.perf_counter() - t0, 10)


def test_criterion_8_stability_transfer():
    suite = lmi_suite()  # certificate construction is timed under criterion 4
    t0 = time.perf_counter()
    worst = -np.inf
    for i, (d, gamma, _) in enumerate(suite):
        g = estimate_pth_mean_rate(d, np.ones(d.dim), 2, 40, 2000, seed=i)
        worst = max(worst, g.rate - gamma)
    ok = worst <= 0.05
    detail = f"50 certificates: max(rate - gamma)={worst:.4f} (<=0.05)"
    record(8, ok, detail, time.perf_counter() - t0, 120)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
