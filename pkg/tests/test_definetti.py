from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rznk.chiribella import coeff_qhat, trace_map
from rznk.definetti import (
    definetti_delta, definetti_real_delta, definetti_report, random_symmetric_state, spot_check, trace_norm,
    truncated_marginal_map,
)


def test_delta_example():
    assert definetti_report(2, 1, 10, 0).delta == Fraction(1, 6)


def test_real_delta_examples():
    assert definetti_real_delta(2, 1, 10) == Fraction(1, 11)
    for n in range(2, 8):
        assert definetti_real_delta(1, 1, n) == Fraction(1, 2 * n + 1)


def test_full_truncation_has_empty_tail():
    for k in (1, 2, 3):
        assert definetti_report(3, k, 20, k).eps_exact == 0


def test_report_errors():
    with pytest.raises(ValueError):
        definetti_report(2, 3, 3, 0)
    with pytest.raises(ValueError):
        definetti_report(2, 2, 5, 3)
    with pytest.raises(ValueError):
        definetti_real_delta(2, 4, 4)


def test_report_frozen_values():
    rep = definetti_report(2, 2, 20, 1)
    assert rep.delta == Fraction(6, 23)
    assert rep.eps_exact == Fraction(3, 190)
    assert rep.eps_bound == Fraction(36, 115)
    assert rep.qhat_table == [Fraction(253, 190), Fraction(-33, 95), Fraction(3, 190)]


def test_infeasible_has_no_bound():
    rep = definetti_report(2, 1, 2, 0)
    assert not rep.feasible and rep.eps_bound is None


@given(st.integers(2, 4), st.integers(1, 3), st.integers(1, 40))
def test_qhat_ratio_below_delta(d, k, extra):
    n = k + extra
    delta = definetti_delta(d, k, n)
    if delta >= Fraction(1, 3):
        return
    for s in range(k):
        assert abs(coeff_qhat(n, k, s + 1, d)) <= delta * abs(coeff_qhat(n, k, s, d))


@given(st.integers(2, 4), st.integers(1, 3), st.integers(1, 40))
def test_tail_below_bound(d, k, extra):
    n = k + extra
    for r in range(k + 1):
        rep = definetti_report(d, k, n, r)
        if rep.feasible:
            assert rep.eps_exact <= rep.eps_bound


@pytest.mark.parametrize("d,k,n", [(2, 1, 4), (2, 2, 5), (3, 2, 4)])
def test_full_truncation_equals_trace(d, k, n):
    assert truncated_marginal_map(d, k, n, k).equals(trace_map(d, n, k))


def test_truncation_trace_follows_coefficients():
    d, k, n, r = 2, 2, 6, 0
    rng = np.random.default_rng(0)
    rho = random_symmetric_state(d, n, rng)
    out = truncated_marginal_map(d, k, n, r).to_float()(rho)
    expected = float(sum(coeff_qhat(n, k, s, d) for s in range(r + 1)))
    assert np.trace(out.matrix).real == pytest.approx(expected, abs=1e-12)


def test_random_state_normalised():
    rho = random_symmetric_state(2, 4, np.random.default_rng(1))
    assert np.trace(rho.matrix).real == pytest.approx(1.0)
    assert np.min(np.linalg.eigvalsh(rho.matrix)) > -1e-12


def test_trace_norm():
    assert trace_norm(np.diag([1.0, -2.0])) == pytest.approx(3.0)


@pytest.mark.parametrize("k,n,r", [(1, 5, 0), (2, 8, 0), (2, 8, 1)])
def test_spot_check(k, n, r):
    rep = spot_check(2, k, n, r, states=30, seed=0)
    assert rep.passed and rep.max_distance <= rep.eps_exact + 1e-10


@given(st.integers(1, 6), st.integers(1, 5), st.integers(1, 80))
def test_feasible_matches_closed_form_k_region(d, k, extra):
    n = k + extra
    rep = definetti_report(d, k, n, 0)
    # delta < 1/3  <=>  6k + 3d - 4 < sqrt(12n + (3d-2)^2), squared on the positive side
    lhs = 6 * k + 3 * d - 4
    assert rep.feasible == (lhs < 0 or lhs * lhs < 12 * n + (3 * d - 2) ** 2)
