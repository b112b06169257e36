"""Complex spherical designs from Gauss-Laguerre moments, plus Hilbert/Wick checks.

A one-dimensional complex quadrature reproducing the Gaussian moments
``E[conj(z)^k z^l] = k! delta_kl`` (``k, l < m``) is built from the ``m``
Laguerre roots and ``m``-th roots of unity. Its ``d``-fold product, rescaled
to unit vectors, is a complex spherical design of degree ``m - 1``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from pathlib import Path

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

from .exact import multinomial
from .symspace import monomials, real_dim_const, sphere_samples, sym_dim, sym_indices

MAX_LAGUERRE = 64


# ---------------------------------------------------------------------------
# Laguerre data


def laguerre_eval(m: int, x):
    """``(L_m(x), L_{m-1}(x))`` by the three-term recurrence; works for floats and mpmath numbers."""
    prev, cur = 0 * x + 1, 1 - x
    if m == 0:
        return prev, 0 * x
    for j in range(1, m):
        prev, cur = cur, ((2 * j + 1 - x) * cur - j * prev) / (j + 1)
    return cur, prev


@dataclass
class LaguerreData:
    m: int
    roots: np.ndarray
    weights: np.ndarray
    weights_vandermonde: np.ndarray | None = None
    cross_check: float = 0.0

    def moments(self, kmax: int | None = None) -> np.ndarray:
        kmax = self.m - 1 if kmax is None else kmax
        return np.array([np.sum(self.weights * self.roots**k) for k in range(kmax + 1)])


def _vandermonde_weights(roots_mp, m: int):
    V = mpmath.matrix(m, m)
    rhs = mpmath.matrix(m, 1)
    for k in range(m):
        rhs[k] = mpmath.factorial(k)
        for s in range(m):
            V[k, s] = roots_mp[s] ** k
    return mpmath.lu_solve(V, rhs)


def laguerre_nodes(m: int, cross_check: bool = True, tol: float = 1e-9) -> LaguerreData:
    """Gauss-Laguerre nodes and weights for ``m`` points.

    Roots come from the symmetric tridiagonal Jacobi matrix and are polished
    by Newton steps on ``L_m``. Weights use the closed form
    ``x / ((m+1) L_{m+1}(x))^2``; with ``cross_check`` they are also obtained
    by solving the moment (Vandermonde) system in extended precision.
    """
    if not 1 <= m <= MAX_LAGUERRE:
        raise ValueError(f"m must be in [1, {MAX_LAGUERRE}]")
    j = np.arange(m)
    x = eigh_tridiagonal(2.0 * j + 1.0, np.arange(1.0, m), eigvals_only=True)
    with mpmath.workdps(40 + 4 * m):
        roots_mp = []
        for x0 in x:
            r = mpmath.mpf(float(x0))
            for _ in range(100):
                L, Lm1 = laguerre_eval(m, r)
                dL = m * (L - Lm1) / r
                step = L / dL
                r -= step
                if abs(step) < mpmath.mpf(10) ** (-(30 + m)) * max(1, abs(r)):
                    break
            else:
                raise RuntimeError(f"Newton polishing of Laguerre root did not converge (m={m})")
            roots_mp.append(r)
        w_mp = [r / ((m + 1) * laguerre_eval(m + 1, r)[0]) ** 2 for r in roots_mp]
        roots = np.array([float(r) for r in roots_mp])
        weights = np.array([float(w) for w in w_mp])
        wv = None
        dev = 0.0
        if cross_check:
            sol = _vandermonde_weights(roots_mp, m)
            wv = np.array([float(sol[s]) for s in range(m)])
            dev = float(max(abs(sol[s] - w_mp[s]) / w_mp[s] for s in range(m)))
            if dev > tol:
                raise RuntimeError(f"Laguerre weight cross-check failed: {dev:.3e}")
    if np.any(np.diff(roots) <= 0) or np.any(weights <= 0):
        raise RuntimeError("Laguerre roots not strictly increasing or weights not positive")
    return LaguerreData(m, roots, weights, wv, dev)


def moment_atoms(m: int) -> tuple[np.ndarray, np.ndarray]:
    """``alpha_st = sqrt(beta_s) e^{2 pi i t / m}`` with weights ``w_s / m`` (``m^2`` atoms)."""
    lag = laguerre_nodes(m, cross_check=False)
    phases = np.exp(2j * np.pi * np.arange(m) / m)
    alpha = (np.sqrt(lag.roots)[:, None] * phases[None, :]).ravel()
    w = np.repeat(lag.weights / m, m)
    return alpha, w


def moment_matrix(alpha: np.ndarray, w: np.ndarray, m: int) -> np.ndarray:
    """``M_kl = sum w conj(alpha)^k alpha^l`` for ``k, l < m``."""
    p = alpha[:, None] ** np.arange(m)[None, :]
    return (p.conj().T * w) @ p


# ---------------------------------------------------------------------------
# designs


@dataclass
class DesignAtom:
    vector: np.ndarray
    weight: float


@dataclass
class SphericalDesign:
    """Weighted unit vectors with ``d[n] sum_i w_i |u_i><u_i|^{(x)n} = P_sym``."""

    d: int
    degree: int
    vectors: np.ndarray
    weights: np.ndarray
    construction: str = "laguerre"
    raw: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=complex).reshape(-1, self.d)
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.vectors) != len(self.weights):
            raise ValueError("vectors and weights differ in length")
        if np.any(self.weights < 0):
            raise ValueError("design weights must be nonnegative")
        norms = np.linalg.norm(self.vectors, axis=1)
        if np.any(np.abs(norms - 1) > 1e-12):
            raise ValueError("design vectors must be unit vectors")

    @property
    def atoms(self) -> list[DesignAtom]:
        return [DesignAtom(v, float(w)) for v, w in zip(self.vectors, self.weights)]

    def __len__(self):
        return len(self.weights)

    def restrict(self, degree: int) -> "SphericalDesign":
        """A degree-N design is also a design for every degree ``<= N``."""
        if degree > self.degree:
            raise ValueError("cannot raise design degree")
        return SphericalDesign(self.d, degree, self.vectors, self.weights, self.construction)


def _cache_dir() -> Path | None:
    d = os.environ.get("RZNK_CACHE_DIR")
    return Path(d) if d else None


def design_cache_path(d: int, degree: int) -> Path | None:
    base = _cache_dir()
    return None if base is None else base / f"design_d{d}_n{degree}.json"


def build_design(d: int, degree: int, use_cache: bool = True) -> SphericalDesign:
    """Product Laguerre design with ``(degree+1)^{2d}`` atoms."""
    if d < 1 or degree < 1:
        raise ValueError("build_design needs d >= 1 and degree >= 1")
    if use_cache:
        path = design_cache_path(d, degree)
        if path is not None and path.exists():
            from .io import load_design

            return load_design(path)
        des = _build_design_cached(d, degree)
        if path is not None:
            from .io import save_design

            path.parent.mkdir(parents=True, exist_ok=True)
            save_design(des, path)
        return des
    return _build_design(d, degree)


@lru_cache(maxsize=32)
def _build_design_cached(d: int, degree: int) -> SphericalDesign:
    return _build_design(d, degree)


def _build_design(d: int, degree: int) -> SphericalDesign:
    n = degree
    alpha, w1 = moment_atoms(n + 1)
    count = len(alpha) ** d
    if count > 5_000_000:
        raise OverflowError(f"design with {count} atoms exceeds desk scale")
    idx = np.array(list(product(range(len(alpha)), repeat=d)))
    gamma = alpha[idx]
    p = np.prod(w1[idx], axis=1) / math.factorial(n)
    norms = np.linalg.norm(gamma, axis=1)
    keep = norms > 0
    gamma, p, norms = gamma[keep], p[keep], norms[keep]
    u = gamma / norms[:, None]
    w = p * norms ** (2 * n) / sym_dim(d, n)
    return SphericalDesign(d, n, u, w, "laguerre", raw=(gamma, p))


def haar_mc_design(d: int, degree: int, samples: int, seed: int = 0) -> SphericalDesign:
    """Equal-weight Haar samples; an approximate design used as a statistical control."""
    rng = np.random.default_rng(seed)
    u = sphere_samples(rng, samples, d, "complex")
    return SphericalDesign(d, degree, u, np.full(samples, 1.0 / samples), "external")


@dataclass
class DesignReport:
    d: int
    degree: int
    atoms: int
    frobenius: float
    poly_residual: float
    weight_sum: float
    tol: float
    passed: bool
    raw_frobenius: float | None = None


def _moment_operator(vectors: np.ndarray, weights: np.ndarray, n: int, chunk: int = 20_000) -> np.ndarray:
    d = vectors.shape[1]
    s = np.sqrt([multinomial(n, a) for a in sym_indices(d, n)])
    N = len(s)
    out = np.zeros((N, N), dtype=complex)
    for i in range(0, len(weights), chunk):
        z = monomials(vectors[i:i + chunk], n) * s
        out += (z.T * weights[i:i + chunk]) @ z.conj()
    return out


def verify_design(design: SphericalDesign, tol: float = 1e-9, points: int = 50, seed: int = 0) -> DesignReport:
    """Frobenius deviation from ``P_sym`` and the polynomial Hilbert-identity residual."""
    d, n = design.d, design.degree
    N = sym_dim(d, n)
    if N * N > 10**8:
        raise OverflowError("design verification exceeds desk scale")
    S = sym_dim(d, n) * _moment_operator(design.vectors, design.weights, n)
    frob = float(np.linalg.norm(S - np.eye(N)))
    raw_frob = None
    if design.raw is not None:
        gamma, p = design.raw
        S_raw = _moment_operator(gamma, p, n)
        raw_frob = float(np.linalg.norm(S_raw - np.eye(N)))
    rng = np.random.default_rng(seed)
    Y = rng.standard_normal((points, d)) + 1j * rng.standard_normal((points, d))
    lhs = np.linalg.norm(Y, axis=1) ** (2 * n)
    rhs = N * (np.abs(Y.conj() @ design.vectors.T) ** (2 * n)) @ design.weights
    poly = float(np.max(np.abs(lhs - rhs) / lhs))
    worst = max(frob, poly, raw_frob or 0.0)
    return DesignReport(d, n, len(design), frob, poly, float(np.sum(design.weights)), tol, worst <= tol, raw_frob)


# ---------------------------------------------------------------------------
# Hilbert identities and Wick formulas


@dataclass
class HilbertReport:
    field: str
    d: int
    n: int
    residual: float
    tol: float
    passed: bool
    mc_sigma: float | None = None


def verify_hilbert_complex(d: int, n: int, design: SphericalDesign | None = None, points: int = 100,
                           seed: int = 0, tol: float = 1e-9) -> HilbertReport:
    """``||x||^{2n} = d[n] sum_i w_i |<x, u_i>|^{2n}`` at random ``x``."""
    if n == 0:
        return HilbertReport("complex", d, 0, 0.0, tol, True)
    if design is None:
        design = build_design(d, n)
    elif design.degree > n:
        design = design.restrict(n)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((points, d)) + 1j * rng.standard_normal((points, d))
    X[0] = np.eye(d)[0]
    lhs = np.linalg.norm(X, axis=1) ** (2 * n)
    rhs = sym_dim(d, n) * (np.abs(X.conj() @ design.vectors.T) ** (2 * n)) @ design.weights
    res = float(np.max(np.abs(lhs - rhs) / lhs))
    return HilbertReport("complex", d, n, res, tol, res <= tol)


def verify_hilbert_real(d: int, n: int, mc_samples: int = 1_000_000, points: int = 10, seed: int = 0,
                        tol: float = 1e-10, sigma: float = 4.0, chunk: int = 200_000) -> HilbertReport:
    """``||x||^{2n} = d_R[n] E<x, phi>^{2n}`` on the real sphere.

    Exact route: compare coefficients using closed-form sphere moments (must
    vanish identically). MC route: normalised Gaussian samples, worst
    deviation reported in standard errors.
    """
    from .chiribella import sphere_monomial_integral

    c = real_dim_const(d, n)
    # exact coefficient comparison
    res = Fraction(0)
    for a in sym_indices(d, 2 * n):
        lhs = multinomial(n, [e // 2 for e in a]) if all(e % 2 == 0 for e in a) else 0
        rhs = c * multinomial(2 * n, a) * sphere_monomial_integral(a)
        res = max(res, abs(lhs - rhs))
    exact_res = float(res)
    mc_sigma = None
    if mc_samples and n > 0:
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((points, d))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        s1 = np.zeros(points)
        s2 = np.zeros(points)
        done = 0
        while done < mc_samples:
            m = min(chunk, mc_samples - done)
            phi = sphere_samples(rng, m, d, "real")
            v = float(c) * (phi @ X.T) ** (2 * n)
            s1 += v.sum(axis=0)
            s2 += (v**2).sum(axis=0)
            done += m
        mean = s1 / mc_samples
        se = np.sqrt(np.maximum(s2 / mc_samples - mean**2, 0) / mc_samples)
        mc_sigma = float(np.max(np.abs(mean - 1.0) / se))
    passed = exact_res <= tol and (mc_sigma is None or mc_sigma <= sigma)
    return HilbertReport("real", d, n, exact_res, tol, passed, mc_sigma)


def pairings(items) -> list[list[tuple]]:
    """All perfect matchings of ``items`` (a sequence of even length)."""
    items = list(items)
    if not items:
        return [[]]
    if len(items) % 2:
        raise ValueError("need an even number of items")
    first, rest = items[0], items[1:]
    out = []
    for i, other in enumerate(rest):
        for tail in pairings(rest[:i] + rest[i + 1:]):
            out.append([(first, other)] + tail)
    return out


def pairing_tensor(d: int, n: int) -> np.ndarray:
    """``sum_{pi in Pi[2n]} |pi>`` as a ``d^{2n}`` array."""
    T = np.zeros((d,) * (2 * n))
    for pi in pairings(range(2 * n)):
        for idx in product(range(d), repeat=2 * n):
            if all(idx[a] == idx[b] for a, b in pi):
                T[idx] += 1
    return T


def permutation_sum(d: int, n: int) -> np.ndarray:
    """``sum_sigma P_sigma`` on ``(C^d)^{(x)n}`` (equals ``n! P_sym``)."""
    dim = d**n
    out = np.zeros((dim, dim))
    tuples = list(product(range(d), repeat=n))
    pos = {t: i for i, t in enumerate(tuples)}
    for sigma in permutations(range(n)):
        for t in tuples:
            out[pos[tuple(t[sigma[i]] for i in range(n))], pos[t]] += 1
    return out


def _tensor_power(v: np.ndarray, p: int) -> np.ndarray:
    out = np.ones((v.shape[0], 1), dtype=v.dtype)
    for _ in range(p):
        out = (out[:, :, None] * v[:, None, :]).reshape(v.shape[0], -1)
    return out


@dataclass
class WickReport:
    d: int
    n: int
    num_pairings: int
    real_sigma: float
    complex_sigma: float
    sigma: float
    passed: bool


def wick_check(d: int, n: int, mc_samples: int = 200_000, seed: int = 0, sigma: float = 4.0,
               chunk: int = 20_000) -> WickReport:
    """Gaussian moment tensors vs pair-partition and permutation sums, in standard errors."""
    if n > 3 or d > 3:
        raise ValueError("wick_check is limited to n <= 3, d <= 3")
    rng = np.random.default_rng(seed)
    T_real = pairing_tensor(d, n).ravel()
    T_cplx = permutation_sum(d, n).ravel()
    s1r = np.zeros_like(T_real)
    s2r = np.zeros_like(T_real)
    s1c = np.zeros(T_cplx.shape, dtype=complex)
    s2c = np.zeros(T_cplx.shape)
    done = 0
    while done < mc_samples:
        m = min(chunk, mc_samples - done)
        g = rng.standard_normal((m, d))
        pr = _tensor_power(g, 2 * n)
        s1r += pr.sum(axis=0)
        s2r += (pr**2).sum(axis=0)
        z = (rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))) / math.sqrt(2)
        zn = _tensor_power(z, n)
        pc = (zn[:, :, None] * zn.conj()[:, None, :]).reshape(m, -1)
        s1c += pc.sum(axis=0)
        s2c += (np.abs(pc) ** 2).sum(axis=0)
        done += m
    N = mc_samples

    def zscore(s1, s2, ref):
        mean = s1 / N
        se = np.sqrt(np.maximum(s2 / N - np.abs(mean) ** 2, 0) / N)
        diff = np.abs(mean - ref)
        safe = np.where(se > 0, se, 1.0)
        return float(np.max(np.where(se > 0, diff / safe, np.where(diff > 1e-12, np.inf, 0.0))))

    zr = zscore(s1r, s2r, T_real)
    zc = zscore(s1c, s2c, T_cplx)
    npair = len(pairings(range(2 * n)))
    return WickReport(d, n, npair, zr, zc, sigma, zr <= sigma and zc <= sigma)
