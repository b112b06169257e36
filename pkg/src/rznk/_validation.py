"""Input validation helpers shared by the estimators and the CLI."""
from __future__ import annotations

import numbers

import numpy as np

from .symspace import HermOp, RealSymPoly


def check_int(name: str, value, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_hermop(W) -> HermOp:
    if not isinstance(W, HermOp):
        raise TypeError(f"expected a HermOp, got {type(W).__name__}")
    if not W.is_hermitian(1e-12):
        raise ValueError("operator is not Hermitian")
    return W


def check_real_poly(v) -> RealSymPoly:
    if not isinstance(v, RealSymPoly):
        raise TypeError(f"expected a RealSymPoly, got {type(v).__name__}")
    if v.degree < 2:
        raise ValueError("real certificates need degree >= 2")
    return v


def check_points(X, d: int, dtype=complex) -> np.ndarray:
    """2-D finite array with ``d`` columns (a single point is promoted to a row)."""
    X = np.asarray(X, dtype=dtype)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != d:
        raise ValueError(f"expected points of shape (n_samples, {d}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("points contain NaN or infinity")
    return X


def check_extrema(m, M):
    if m is None or M is None:
        return m, M
    if m <= 0:
        raise ValueError("m must be > 0 for a certificate")
    if M < m:
        raise ValueError("need m <= M")
    return m, M
