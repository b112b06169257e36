from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from rznk.certify import motzkin_poly
from rznk.estimator import RealReznickCertifier, ReznickCertifier
from rznk.symspace import HermOp, eval_poly

from .test_symspace import random_herm


def test_params_roundtrip():
    est = ReznickCertifier(m=1, M=3)
    assert est.get_params() == {"M": 3, "m": 1, "n": "auto", "n_max": 2000, "seed": 0}
    est2 = clone(est).set_params(seed=4)
    assert est2.seed == 4 and est.seed == 0


def test_fit_predict_diag13():
    W = HermOp.from_matrix(np.diag([1.0, 3.0]), 2, 1)
    est = ReznickCertifier(m=1, M=3).fit(W)
    assert est.n_ == 4 and est.certificate_.passed
    X = np.random.default_rng(0).standard_normal((20, 2)) + 0j
    np.testing.assert_allclose(est.predict(X), eval_poly(W, X), rtol=1e-10)


def test_fit_with_ancilla():
    W = random_herm(2, 1, D=2, seed=2)
    W = HermOp.from_matrix(W.matrix + 10 * np.eye(4), 2, 1, 2)
    est = ReznickCertifier(n=5).fit(W)
    rng = np.random.default_rng(1)
    X = rng.standard_normal((10, 2)) + 1j * rng.standard_normal((10, 2))
    Y = rng.standard_normal((10, 2)) + 1j * rng.standard_normal((10, 2))
    np.testing.assert_allclose(est.predict(X, Y), eval_poly(W, X, Y), rtol=1e-9)
    with pytest.raises(ValueError):
        est.predict(X)


def test_predict_before_fit():
    with pytest.raises(NotFittedError):
        ReznickCertifier().predict(np.ones((1, 2)))


def test_bad_params():
    W = HermOp.identity(2, 1)
    with pytest.raises(ValueError):
        ReznickCertifier(n=0, m=1, M=1).fit(W)
    with pytest.raises(ValueError):
        ReznickCertifier(m=2, M=1).fit(W)
    with pytest.raises((TypeError, ValueError)):
        ReznickCertifier().fit(np.eye(2))


def test_real_estimator_motzkin():
    eps = Fraction(1, 2)
    p = motzkin_poly(eps)
    est = RealReznickCertifier(m=eps, M=eps + Fraction(4, 27)).fit(p)
    assert est.n_ == 30
    X = np.random.default_rng(0).standard_normal((20, 3))
    np.testing.assert_allclose(est.predict(X), p(X), rtol=1e-10)


def test_wrong_dimension_points():
    est = ReznickCertifier(m=1, M=1).fit(HermOp.identity(2, 1))
    with pytest.raises(ValueError):
        est.predict(np.ones((3, 5)))
