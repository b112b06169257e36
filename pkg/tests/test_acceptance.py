"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from rznk.certify import (
    bound_n_real, bound_n_real_numeric, build_certificate, build_certificate_real, motzkin_eps_thresholds,
    motzkin_min_n, motzkin_poly,
)
from rznk.chiribella import (
    build_Phi, build_Phi_real, build_Psi, build_Psi_real, coeff_c_real, coeff_q_real, real_dim_ratio, trace_map,
    verify_chiribella,
)
from rznk.definetti import definetti_report, spot_check, truncated_marginal_map
from rznk.designs import (
    build_design, laguerre_nodes, pairings, verify_design, verify_hilbert_complex, verify_hilbert_real, wick_check,
)
from rznk.exact import eye_exact
from rznk.symspace import HermOp, bernstein_check, estimate_extrema, sym_dim

MOTZKIN_M = Fraction(4, 27)


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return emit


def grid_dkn():
    for d in (2, 3):
        for k in (1, 2, 3):
            for n in range(k, k + 6):
                yield d, k, n


def test_criterion_1_exact_inverse(report):
    start = time.perf_counter()
    bad = []
    for d, k, n in grid_dkn():
        prod = (build_Phi(n, k, d) @ build_Psi(n, k, d)).core
        if not np.all(prod == eye_exact(sym_dim(d, k) ** 2)):
            bad.append((d, k, n))
    elapsed = time.perf_counter() - start
    report(1, not bad and elapsed < 60, f"Phi o Psi = id exactly on 36 triples, failures={bad}, {elapsed:.1f}s")


def test_criterion_2_chiribella(report):
    worst_frob = worst_scalar = 0.0
    for k in (1, 2):
        for n in (2, 3):
            rep = verify_chiribella(n, k, 2, tol=1e-10, pairs=100, seed=n * 10 + k)
            worst_frob = max(worst_frob, rep.details["frobenius"])
            worst_scalar = max(worst_scalar, rep.details["scalar"])
    ok = worst_frob <= 1e-10 and worst_scalar <= 1e-10
    report(2, ok, f"design MP vs sum c tr* tr: frobenius {worst_frob:.2e}, scalar {worst_scalar:.2e}")


def test_criterion_3_real_identities(report):
    bad = []
    for d, k, n in grid_dkn():
        if not np.all((build_Psi_real(n, k, d) @ build_Phi_real(n, k, d)).core == eye_exact(sym_dim(d, 2 * k))):
            bad.append(("inverse", d, k, n))
        for s in range(k + 1):
            tot = sum(coeff_q_real(n, k, t, d) * coeff_c_real(n, t, s) * real_dim_ratio(d, n + k, n + t)
                      for t in range(s, k + 1))
            if tot != (1 if s == k else 0):
                bad.append(("delta", d, k, n, s))
    report(3, not bad, f"Psi_R o Phi_R = id and sum q_R c_R ratio = delta exactly, failures={bad}")


def test_criterion_4_designs(report):
    worst = 0.0
    problems = []
    for d in (1, 2, 3):
        for n in (1, 2, 3, 4):
            des = build_design(d, n)
            rep = verify_design(des, tol=1e-9)
            worst = max(worst, rep.frobenius)
            if len(des) != (n + 1) ** (2 * d) or not np.all(des.weights > 0) or rep.frobenius > 1e-9:
                problems.append((d, n))
    mom = 0.0
    for m in range(1, 11):
        lag = laguerre_nodes(m)
        ref = np.array([math.factorial(k) for k in range(2 * m)], dtype=float)
        mom = max(mom, float(np.max(np.abs(lag.moments(2 * m - 1) - ref) / ref)))
    ok = not problems and mom <= 1e-10
    report(4, ok, f"designs frobenius max {worst:.2e}, failures={problems}; Laguerre moments rel {mom:.2e}")


def test_criterion_5_certificates(report):
    W = HermOp.from_matrix(np.diag([1.0, 3.0]), 2, 1)
    cert = build_certificate(W, 4, build_design(2, 5), m=1, M=3)
    rows = [("diag(1,3) n=4", cert.residual, cert.min_value)]
    for eps in (Fraction(1, 10), Fraction(1, 5), Fraction(1, 2)):
        n = bound_n_real_numeric(3, 3, eps, eps + MOTZKIN_M)
        c = build_certificate_real(motzkin_poly(eps), n, m=eps, M=eps + MOTZKIN_M, points=100)
        rows.append((f"Motzkin eps={float(eps)} n={n}", c.residual, c.min_value))
    ok = all(r <= 1e-8 and mn >= -1e-9 for _, r, mn in rows)
    detail = "; ".join(f"{name}: residual {r:.1e}, min {mn:.3g}" for name, r, mn in rows)
    report(5, ok, detail)


def test_criterion_6_motzkin_curves(report):
    issues = []
    for eps in (Fraction(1, 100), Fraction(1, 10), Fraction(1, 5), Fraction(1, 2)):
        est = estimate_extrema(motzkin_poly(eps), samples=100_000, refine=True, seed=0)
        if abs(est.m_est - float(eps)) > 1e-6 or abs(est.M_est - float(eps + MOTZKIN_M)) > 1e-6:
            issues.append(("extrema", float(eps), est.m_est, est.M_est))
    th = motzkin_eps_thresholds(60)
    vals = [th[n] for n in range(3, 16)]
    if any(a < b for a, b in zip(vals, vals[1:])):
        issues.append("thresholds not nonincreasing")
    for eps in np.linspace(0.01, 0.5, 50):
        m = Fraction(float(eps))
        b = bound_n_real(3, 3, m, m + MOTZKIN_M)
        if not b.n_numeric <= b.n_improved <= b.n_general:
            issues.append(("ordering", float(eps)))
        n_coef = motzkin_min_n(m, 60, th)
        if n_coef is None:
            n_coef = motzkin_min_n(m, b.n_numeric)
        if n_coef is None or n_coef > b.n_numeric:
            issues.append(("threshold", float(eps), n_coef, b.n_numeric))
    far = bound_n_real(3, 3, Fraction(1, 10_000), Fraction(1, 10_000) + MOTZKIN_M)
    ratio = far.n_general / far.n_reznick
    if abs(ratio - math.log(2)) > 0.02:
        issues.append(("ratio", ratio))
    report(6, not issues, f"extrema, orderings and thresholds on a 50-point grid; "
                          f"general/Reznick ratio at 1e-4 = {ratio:.4f}; issues={issues}")


def test_criterion_7_bernstein(report):
    rng = np.random.default_rng(2024)
    worst = 0.0
    count = 0
    for d in (2, 3):
        for k in (1, 2, 3):
            N = sym_dim(d, k)
            for i in range(50):
                G = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
                W = HermOp.from_matrix(G + G.conj().T, d, k)
                sup = estimate_extrema(W, samples=10_000, refine=True, seed=i).sup_norm
                for t in range(1, k + 1):
                    rep = bernstein_check(W, t, trials=10_000, seed=i, sup_norm=sup)
                    worst = max(worst, rep.ratio)
                    count += 1
    report(7, worst <= 1 + 1e-9, f"{count} checks, worst ratio {worst:.4f}")


def test_criterion_8_definetti(report):
    issues = []
    feasible = 0
    for d in (2, 3, 4):
        for k in (1, 2, 3):
            for n in range(k + 1, 41):
                for r in range(k + 1):
                    rep = definetti_report(d, k, n, r)
                    if rep.feasible:
                        feasible += 1
                        if not rep.eps_exact <= rep.eps_bound:
                            issues.append(("bound", d, k, n, r))
    worst_gap = -math.inf
    for k in (1, 2):
        for n in range(k + 1, 9):
            if not truncated_marginal_map(2, k, n, k).equals(trace_map(2, n, k)):
                issues.append(("r=k", k, n))
            for r in range(k + 1):
                sc = spot_check(2, k, n, r, states=100, seed=n * 10 + r)
                worst_gap = max(worst_gap, sc.max_distance - sc.eps_exact)
                if not sc.passed:
                    issues.append(("spot", k, n, r))
    report(8, not issues, f"{feasible} feasible grid points, spot-check max(dist - eps) {worst_gap:.2e}, "
                          f"issues={issues}")


def test_criterion_9_wick_hilbert(report):
    issues = []
    if len(pairings(range(4))) != 3 or len(pairings(range(6))) != 15:
        issues.append("pairing counts")
    worst_c = 0.0
    for d in (1, 2, 3):
        for n in (1, 2, 3, 4):
            rep = verify_hilbert_complex(d, n)
            worst_c = max(worst_c, rep.residual)
    if worst_c > 1e-9:
        issues.append(("complex", worst_c))
    sig = []
    for d, n in ((2, 1), (3, 1), (3, 2), (2, 3)):
        rep = verify_hilbert_real(d, n, mc_samples=1_000_000, seed=0, tol=1e-10)
        sig.append(rep.mc_sigma)
        if not rep.passed:
            issues.append(("real", d, n, rep.residual, rep.mc_sigma))
    for d, n in ((2, 1), (2, 2), (3, 2)):
        w = wick_check(d, n, mc_samples=1_000_000, seed=0)
        sig.append(max(w.real_sigma, w.complex_sigma))
        if not w.passed:
            issues.append(("wick", d, n))
    report(9, not issues, f"|Pi[4]|=3, |Pi[6]|=15, complex residual {worst_c:.1e}, "
                          f"max MC deviation {max(sig):.2f} sigma, issues={issues}")
