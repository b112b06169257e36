"""Exponential de Finetti truncations: exact coefficient tails and spot checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .chiribella import (
    SymLinearMap, build_Clone, build_Phi, coeff_qhat, trace_map,
)
from .exact import to_float
from .symspace import HermOp, check_desk, sym_dim


def definetti_delta(d: int, k: int, n: int) -> Fraction:
    """``delta = k (k + d - 1) / (n + k + d - 1)``."""
    return Fraction(k * (k + d - 1), n + k + d - 1)


def definetti_real_delta(d: int, k: int, n: int) -> Fraction:
    """``delta_R = k (2k + d - 2) / (2n + 2k + d - 2)``."""
    if k >= n:
        raise ValueError("need k < n")
    return Fraction(k * (2 * k + d - 2), 2 * n + 2 * k + d - 2)


@dataclass
class DeFinettiReport:
    d: int
    k: int
    n: int
    r: int
    delta: Fraction
    eps_exact: Fraction
    eps_bound: Fraction | None
    qhat_table: list = field(default_factory=list)
    feasible: bool = False
    delta_real: Fraction | None = None


def definetti_report(d: int, k: int, n: int, r: int) -> DeFinettiReport:
    """Exact tail ``eps_r = sum_{s>r} |qhat(n,k,k-s)|`` and the geometric bound ``delta^{r+1}/(1-3 delta)``.

    The bound is only meaningful for ``delta < 1/3``; otherwise ``eps_bound`` is ``None``.
    """
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    if not 0 <= r <= k:
        raise ValueError("need 0 <= r <= k")
    delta = definetti_delta(d, k, n)
    table = [coeff_qhat(n, k, s, d) for s in range(k + 1)]
    eps = sum((abs(q) for q in table[r + 1:]), Fraction(0))
    feasible = delta < Fraction(1, 3)
    bound = delta ** (r + 1) / (1 - 3 * delta) if feasible else None
    return DeFinettiReport(d, k, n, r, delta, eps, bound, table, feasible, definetti_real_delta(d, k, n))


def truncated_marginal_map(d: int, k: int, n: int, r: int, exact: bool = True) -> SymLinearMap:
    """``sum_{s<=r} qhat(n,k,k-s) Clone_{k-s->k} o MP~_{n->k-s}``, built in exact arithmetic.

    ``MP~_{n->t} = (d[n]/d[n+t]) Phi^{(n)}_{t->t} o tr_{n->t}`` so that the
    ``r = k`` case reproduces ``tr_{n->k}`` as an exact matrix identity.
    """
    if not 0 <= r <= k < n + 1:
        raise ValueError("need 0 <= r <= k <= n")
    check_desk(sym_dim(d, n) ** 2, "coefficient-space size")
    total = None
    for s in range(r + 1):
        t = k - s
        mp = build_Phi(n, t, d).compose(trace_map(d, n, t))
        mpt = mp.scale(Fraction(sym_dim(d, n), sym_dim(d, n + t)))
        term = build_Clone(t, k, d).compose(mpt).scale(coeff_qhat(n, k, s, d))
        total = term if total is None else total + term
    return total if exact else total.to_float()


def random_symmetric_state(d: int, n: int, rng: np.random.Generator, rank: int | None = None) -> HermOp:
    """Random density operator supported on the symmetric subspace."""
    N = sym_dim(d, n)
    rank = rank or N
    G = rng.standard_normal((N, rank)) + 1j * rng.standard_normal((N, rank))
    rho = G @ G.conj().T
    rho /= np.trace(rho).real
    return HermOp.from_matrix(rho, d, n)


def trace_norm(A: np.ndarray) -> float:
    return float(np.sum(np.abs(np.linalg.eigvalsh((A + A.conj().T) / 2))))


@dataclass
class SpotCheck:
    max_distance: float
    eps_exact: float
    passed: bool
    states: int


def spot_check(d: int, k: int, n: int, r: int, states: int = 100, seed: int = 0, slack: float = 1e-10) -> SpotCheck:
    """Trace-norm distance between ``tr_{n->k}(rho)`` and the truncated map output on random states."""
    rng = np.random.default_rng(seed)
    exact_tr = trace_map(d, n, k, exact=False)
    trunc = truncated_marginal_map(d, k, n, r).to_float()
    eps = float(definetti_report(d, k, n, r).eps_exact)
    worst = 0.0
    for _ in range(states):
        rho = random_symmetric_state(d, n, rng)
        diff = exact_tr(rho).matrix - trunc(rho).matrix
        worst = max(worst, trace_norm(diff))
    return SpotCheck(worst, eps, worst <= eps + slack, states)
