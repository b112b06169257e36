from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rznk.chiribella import (
    CoeffTable, build_Clone, build_MP, build_MP_real, build_MP_real_exact_route, build_Phi, build_Phi_real,
    build_Psi, build_Psi_real, coeff_c, coeff_c_real, coeff_q, coeff_q_real, coeff_qhat, real_dim_ratio,
    real_trace_adjoint_map, sphere_monomial_integral, trace_adjoint_map, trace_map, verify_chiribella,
    verify_real_identity,
)
from rznk.designs import build_design
from rznk.exact import eye_exact
from rznk.symspace import HermOp, RealSymPoly, eval_poly, real_dim_const, sym_dim

from .test_symspace import random_herm


# ---------------------------------------------------------------- coefficients


def test_coeff_table_frozen():
    t = CoeffTable.build(2, 1, 2)
    assert t.c == [Fraction(1, 3), Fraction(2, 3)]
    assert t.q == [Fraction(-3, 8), Fraction(3, 2)]
    assert t.qhat == [Fraction(2), Fraction(-1)]
    assert t.c_R == [Fraction(1, 5), Fraction(4, 5)]


def test_identity_bracket_coefficients():
    assert coeff_q(1, 1, 1, 2) == 2
    assert coeff_q(1, 1, 0, 2) == Fraction(-2, 3)


def test_mp_11_coefficients():
    assert coeff_c(1, 1, 0) == coeff_c(1, 1, 1) == Fraction(1, 2)


@given(st.integers(0, 6), st.integers(0, 8))
def test_c_sums_to_one(k, extra):
    n = k + extra
    assert sum(coeff_c(n, k, s) for s in range(k + 1)) == 1
    assert sum(coeff_c_real(n, k, s) for s in range(k + 1)) == 1


@given(st.integers(1, 4), st.integers(0, 5), st.integers(0, 6))
def test_qhat_sums_to_one(d, k, extra):
    n = k + extra
    assert sum(coeff_qhat(n, k, s, d) for s in range(k + 1)) == 1


@given(st.integers(1, 4), st.integers(0, 4), st.integers(0, 6))
def test_q_inverts_c_scalar(d, k, extra):
    # sum_t q(n,k,t) c(n,t,s) d[n+k]/d[n+t] = delta_{k,s}
    n = k + extra
    for s in range(k + 1):
        tot = sum(coeff_q(n, k, t, d) * coeff_c(n, t, s) * Fraction(sym_dim(d, n + k), sym_dim(d, n + t))
                  for t in range(s, k + 1))
        assert tot == (1 if s == k else 0)


@given(st.integers(1, 4), st.integers(0, 4), st.integers(0, 6))
def test_q_real_inverts_c_real_scalar(d, k, extra):
    n = k + extra
    for s in range(k + 1):
        tot = sum(coeff_q_real(n, k, t, d) * coeff_c_real(n, t, s) * real_dim_ratio(d, n + k, n + t)
                  for t in range(s, k + 1))
        assert tot == (1 if s == k else 0)


def test_real_dim_ratio_consistent():
    for d in (2, 3, 5):
        assert real_dim_ratio(d, 4, 1) == real_dim_const(d, 4) / real_dim_const(d, 1)


def test_coeff_range_errors():
    with pytest.raises(ValueError):
        coeff_c(3, 2, 3)
    with pytest.raises(ValueError):
        coeff_q(1, 2, 0, 2)


# ---------------------------------------------------------------- linear maps


def test_phi_psi_inverse_224():
    phi, psi = build_Phi(4, 2, 2), build_Psi(4, 2, 2)
    I = eye_exact(sym_dim(2, 2) ** 2)
    assert np.all((phi @ psi).core == I)
    assert np.all((psi @ phi).core == I)


def test_mp_is_phi_after_trace_213():
    mp = build_MP(3, 1, 2)
    assert mp.equals(build_Phi(3, 1, 2) @ trace_map(2, 3, 1))


@pytest.mark.parametrize("n,k", [(3, 1), (2, 2), (1, 3)])
def test_mp_adjoint_symmetry(n, k):
    assert build_MP(n, k, 2).adjoint().equals(build_MP(k, n, 2))


def test_trace_adjoint_map_is_adjoint():
    assert trace_map(3, 3, 1).adjoint().equals(trace_adjoint_map(3, 1, 3))


def test_mp_to_zero_is_trace():
    design = build_design(2, 3)
    mp = build_MP(3, 0, 2, design=design)
    W = random_herm(2, 3, seed=0)
    out = mp(W)
    assert out.coef[0, 0] == pytest.approx(np.trace(W.matrix).real, rel=1e-10)


def test_design_route_213():
    rep = verify_chiribella(2, 1, 2, tol=1e-10)
    assert rep.passed, rep


def test_orthogonal_pair_only_s0():
    n, k = 3, 2
    mp = build_MP(n, k, 2).to_float()
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    val = float(eval_poly(mp(HermOp.rank_one(a, n)), b))
    assert val == pytest.approx(float(coeff_c(n, k, 0)), abs=1e-12)


def test_design_degree_too_low_rejected():
    with pytest.raises(ValueError):
        build_MP(2, 2, 2, design=build_design(2, 3))


def test_clone_preserves_trace():
    clone = build_Clone(1, 3, 2).to_float()
    rng = np.random.default_rng(0)
    G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rho = HermOp.from_matrix(G @ G.conj().T, 2, 1)
    out = clone(rho)
    assert np.trace(out.matrix).real == pytest.approx(np.trace(rho.matrix).real, rel=1e-12)


def test_map_with_ancilla_matches_blockwise():
    phi = build_Phi(3, 1, 2).to_float()
    W = random_herm(2, 1, D=2, seed=9)
    out = phi(W)
    M = phi.matrix(2)
    np.testing.assert_allclose(M @ W.coef.reshape(-1), out.coef.reshape(-1), atol=1e-12)


# ---------------------------------------------------------------- real picture


@pytest.mark.parametrize("d,k,n", [(2, 1, 2), (3, 2, 3), (2, 3, 5)])
def test_real_phi_psi_inverse(d, k, n):
    I = eye_exact(sym_dim(d, 2 * k))
    assert np.all((build_Psi_real(n, k, d) @ build_Phi_real(n, k, d)).core == I)


def test_sphere_monomial_integral():
    assert sphere_monomial_integral((2, 0, 0)) == Fraction(1, 3)
    assert sphere_monomial_integral((4, 0)) == Fraction(3, 8)
    assert sphere_monomial_integral((1, 1)) == 0


def test_real_identity_exact_112():
    rep = verify_real_identity(1, 1, 2, route="exact")
    assert rep.passed and rep.max_deviation == 0


def test_real_identity_mc_213():
    rep = verify_real_identity(2, 1, 3, route="mc", samples=1_000_000, seed=0)
    assert rep.passed, rep


def test_real_tstar_factorises():
    lhs = real_trace_adjoint_map(2, 1, 3)
    rhs = build_MP_real(1, 3, 2) @ build_Psi_real(3, 1, 2)
    assert lhs.equals(rhs)


def test_real_map_acts_on_polynomials():
    mp = build_MP_real_exact_route(2, 1, 2)
    p = RealSymPoly.norm_power(2, 2)
    out = mp(p)
    assert out.degree == 2 and isinstance(out, RealSymPoly)
