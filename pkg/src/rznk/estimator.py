"""Estimator-style wrappers: ``fit`` builds a certificate, ``predict`` evaluates it."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_extrema, check_hermop, check_int, check_points, check_real_poly
from .certify import (
    bound_n_numeric, bound_n_real_numeric, build_certificate, build_certificate_real, mp_real_apply,
)
from .designs import build_design
from .symspace import _block_at, estimate_extrema


class ReznickCertifier(BaseEstimator):
    """Certificate for a positive bi-Hermitian form ``p_W``.

    Parameters
    ----------
    n : int or "auto"
        Certificate degree; "auto" takes the smallest ``n`` with a
        nonnegative bracket for the given (or estimated) extrema.
    m, M : float, optional
        Extrema of ``p_W`` on the unit sphere; estimated when omitted.
    seed : int
        Seed for sampling (extrema estimation, residual checks).
    n_max : int
        Search cap for ``n="auto"``.
    """

    def __init__(self, n="auto", m=None, M=None, seed: int = 0, n_max: int = 2000):
        self.n = n
        self.m = m
        self.M = M
        self.seed = seed
        self.n_max = n_max

    def _extrema(self, obj):
        m, M = check_extrema(self.m, self.M)
        if m is None or M is None:
            est = estimate_extrema(obj, samples=10_000, refine=True, seed=self.seed)
            m = est.m_est if m is None else m
            M = est.M_est if M is None else M
        return m, M

    def _resolve_n(self, k, finder, d, m, M):
        if self.n == "auto":
            n = finder(d, k, m, M, check_int("n_max", self.n_max, k))
            if n is None:
                raise ValueError(f"no admissible n <= {self.n_max}")
            return n
        return check_int("n", self.n, k)

    def fit(self, W, y=None):
        W = check_hermop(W)
        m, M = self._extrema(W)
        self.n_ = self._resolve_n(W.k, bound_n_numeric, W.d, m, M)
        self.design_ = build_design(W.d, self.n_ + W.k)
        self.certificate_ = build_certificate(W, self.n_, self.design_, m=m, M=M, seed=self.seed)
        self.W_tilde_ = self.certificate_.W_tilde.to_float()
        self.k_, self.d_, self.D_ = W.k, W.d, W.D
        return self

    def predict(self, X, Y=None):
        """``p_W(x, y)`` recomputed from the design sum, divided by ``||x||^{2(n-k)}``."""
        check_is_fitted(self, "certificate_")
        X = check_points(X, self.d_)
        if Y is None:
            if self.D_ != 1:
                raise ValueError("Y is required when D > 1")
            Y = np.ones((len(X), 1), dtype=complex)
        Y = check_points(Y, self.D_)
        B = _block_at(self.W_tilde_, self.design_.vectors)
        pY = np.einsum("pj,aji,pi->pa", Y.conj(), B, Y).real
        ov = np.abs(X.conj() @ self.design_.vectors.T) ** (2 * self.n_)
        rhs = np.sum(pY * ov * self.design_.weights, axis=1)
        return rhs / np.linalg.norm(X, axis=1) ** (2 * (self.n_ - self.k_))


class RealReznickCertifier(ReznickCertifier):
    """Certificate for a positive real even-degree form (``D = 1``)."""

    def fit(self, v, y=None):
        v = check_real_poly(v)
        m, M = self._extrema(v)
        self.n_ = self._resolve_n(v.k, bound_n_real_numeric, v.d, m, M)
        self.certificate_ = build_certificate_real(v, self.n_, m=m, M=M, seed=self.seed)
        self.reconstruction_ = mp_real_apply(self.certificate_.W_tilde, self.n_)
        self.k_, self.d_ = v.k, v.d
        return self

    def predict(self, X, Y=None):
        """``p_v(x)`` recomputed from the sphere-integral representation."""
        check_is_fitted(self, "certificate_")
        X = check_points(X, self.d_, dtype=float)
        return self.reconstruction_(X) / np.linalg.norm(X, axis=1) ** (2 * (self.n_ - self.k_))
