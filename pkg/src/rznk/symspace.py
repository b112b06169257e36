"""Symmetric-subspace algebra and the operator <-> polynomial dictionary.

Conventions
-----------
Multi-indices ``alpha`` of degree ``k`` in ``d`` variables are enumerated in
descending lexicographic order, ``(k, 0, ..., 0)`` first.

The orthonormal symmetric basis ``e_alpha`` satisfies
``<e_alpha | x^{(x)k}> = sqrt(k!/alpha!) x^alpha`` (no conjugation on ``x``).

A Hermitian operator ``W`` on ``Sym^k C^d (x) C^D`` is stored through its
*coefficient matrix* ``C = S W S`` with ``S = diag(sqrt(k!/alpha!)) (x) I_D``.
Rows of ``C`` are labelled by the conjugated monomial ``conj(x)^beta conj(y_j)``
and columns by ``x^alpha y_i``, so that

    p_W(x, y) = sum C[(beta, j), (alpha, i)] conj(x)^beta conj(y_j) x^alpha y_i.

``C`` is rational whenever the polynomial is, which is what makes exact
identity checks possible; the orthonormal matrix ``W`` carries square roots and
is only ever produced in floating point (``HermOp.matrix``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement, product
from typing import Mapping

import numpy as np
from scipy import optimize

from .exact import (
    QQi, exact_array, exact_matmul, falling, is_exact, multi_factorial, multinomial,
    to_float, zeros_exact,
)

DESK_LIMIT = 10_000


# ---------------------------------------------------------------------------
# index algebra


def sym_dim(d: int, n: int) -> int:
    """Dimension ``binom(d+n-1, n)`` of the symmetric subspace."""
    if d < 1 or n < 0:
        raise ValueError(f"sym_dim needs d >= 1, n >= 0 (got d={d}, n={n})")
    return math.comb(d + n - 1, n)


def check_desk(size: int, what: str = "dimension") -> int:
    if size > DESK_LIMIT:
        raise OverflowError(f"{what} {size} exceeds desk-scale limit {DESK_LIMIT}")
    return size


@lru_cache(maxsize=None)
def sym_indices(d: int, n: int) -> tuple[tuple[int, ...], ...]:
    """All exponent tuples of length ``d`` and total degree ``n``."""
    out = []
    for combo in combinations_with_replacement(range(d), n):
        alpha = [0] * d
        for c in combo:
            alpha[c] += 1
        out.append(tuple(alpha))
    return tuple(out)


@lru_cache(maxsize=None)
def index_map(d: int, n: int) -> dict[tuple[int, ...], int]:
    return {a: i for i, a in enumerate(sym_indices(d, n))}


@lru_cache(maxsize=None)
def _exponent_array(d: int, n: int) -> np.ndarray:
    return np.array(sym_indices(d, n), dtype=np.int64).reshape(-1, d)


def real_dim_const(d: int, n: int) -> Fraction:
    """Real Hilbert-identity constant ``2^{2n} n! Gamma(n+d/2) / ((2n)! Gamma(d/2))``.

    The Gamma ratio is the rational product ``prod_{j<n} (j + d/2)``.
    """
    if d < 1 or n < 0:
        raise ValueError("real_dim_const needs d >= 1, n >= 0")
    g = Fraction(1)
    for j in range(n):
        g *= Fraction(2 * j + d, 2)
    return Fraction(4**n * math.factorial(n), math.factorial(2 * n)) * g


def scale_vector(d: int, k: int, D: int = 1) -> np.ndarray:
    """Diagonal of ``S``: ``sqrt(k!/alpha!)`` repeated over the ancilla."""
    s = np.array([math.sqrt(multinomial(k, a)) for a in sym_indices(d, k)])
    return np.repeat(s, D)


def hs_weights(d: int, k: int, D: int = 1, exact: bool = True) -> np.ndarray:
    """Weights ``g_ab = alpha! beta! / (k!)^2`` turning coefficient arrays into HS products."""
    w = [Fraction(1, multinomial(k, a)) for a in sym_indices(d, k) for _ in range(D)]
    g = np.empty((len(w), len(w)), dtype=object)
    for a, wa in enumerate(w):
        for b, wb in enumerate(w):
            g[a, b] = wa * wb
    return g if exact else to_float(g)


# ---------------------------------------------------------------------------
# lowering / raising matrices


def _mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if is_exact(a) or is_exact(b):
        if not is_exact(a):
            a = exact_array(a)
        if not is_exact(b):
            b = exact_array(b)
        return exact_matmul(a, b)
    return a @ b


@lru_cache(maxsize=None)
def _lowering(d: int, k: int, c: int, D: int, exact: bool, step: int = 1) -> np.ndarray:
    """Map ``x^alpha -> d^step/dx_c^step x^alpha`` on degree-``k`` monomials, tensored with I_D."""
    src, dst = index_map(d, k), index_map(d, k - step)
    m = zeros_exact((len(dst), len(src))) if exact else np.zeros((len(dst), len(src)))
    for a, ia in src.items():
        if a[c] >= step:
            b = list(a)
            b[c] -= step
            m[dst[tuple(b)], ia] = falling(a[c], step)
    if exact:
        m = np.kron(m, np.eye(D, dtype=int)).astype(object)
        return exact_array(m)
    return np.kron(m, np.eye(D))


@lru_cache(maxsize=None)
def _raising(d: int, k: int, c: int, D: int, exact: bool, step: int = 1) -> np.ndarray:
    """Map ``x^alpha -> x_c^step x^alpha`` from degree ``k`` to ``k + step``."""
    src, dst = index_map(d, k), index_map(d, k + step)
    m = np.zeros((len(dst), len(src)), dtype=int)
    for a, ia in src.items():
        b = list(a)
        b[c] += step
        m[dst[tuple(b)], ia] = 1
    m = np.kron(m, np.eye(D, dtype=int))
    return exact_array(m) if exact else m.astype(float)


# ---------------------------------------------------------------------------
# coefficient-array kernels (any square array, Hermitian or not)


def laplacian_coef(C: np.ndarray, d: int, k: int, D: int = 1) -> np.ndarray:
    """Complex Laplacian ``sum_c d^2/dconj(x_c) dx_c`` on a coefficient array of degree ``k``."""
    if k == 0:
        raise ValueError("Laplacian of a degree-0 coefficient array")
    ex = is_exact(C)
    out = None
    for c in range(d):
        L = _lowering(d, k, c, D, ex)
        term = _mm(_mm(L, C), L.T)
        out = term if out is None else out + term
    return out


def mul_norm_coef(C: np.ndarray, d: int, k: int, D: int = 1) -> np.ndarray:
    """Multiply the polynomial of a degree-``k`` coefficient array by ``||x||^2``."""
    ex = is_exact(C)
    out = None
    for c in range(d):
        R = _raising(d, k, c, D, ex)
        term = _mm(_mm(R, C), R.T)
        out = term if out is None else out + term
    return out


def partial_trace_coef(C: np.ndarray, d: int, k: int, t: int, D: int = 1) -> np.ndarray:
    """``tr_{k -> k-t}`` through ``((k)_t)^{-2} Delta^t``."""
    if not 0 <= t <= k:
        raise ValueError(f"partial trace steps t={t} outside [0, {k}]")
    out = C
    for s in range(t):
        out = laplacian_coef(out, d, k - s, D)
    f = falling(k, t) ** 2
    if is_exact(out):
        return out * Fraction(1, f)
    return out / f


def trace_adjoint_coef(C: np.ndarray, d: int, k: int, n: int, D: int = 1) -> np.ndarray:
    """``tr*_{k -> n}``: multiplication by ``||x||^{2(n-k)}``."""
    if n < k:
        raise ValueError(f"trace adjoint needs n >= k (got n={n}, k={k})")
    out = C
    for s in range(k, n):
        out = mul_norm_coef(out, d, s, D)
    return out


def _tuples_by_index(d: int, k: int) -> list[tuple[tuple[int, ...], int]]:
    idx = index_map(d, k)
    out = []
    for tup in product(range(d), repeat=k):
        alpha = [0] * d
        for c in tup:
            alpha[c] += 1
        out.append((tup, idx[tuple(alpha)]))
    return out


def full_tensor_from_coef(C: np.ndarray, d: int, k: int, D: int = 1) -> np.ndarray:
    """Matrix of the operator in the product basis ``|i_1..i_k> (x) |a>`` (shape ``(d^k D)^2``)."""
    tuples = _tuples_by_index(d, k)
    alphas = sym_indices(d, k)
    ex = is_exact(C)
    size = d**k * D
    out = zeros_exact((size, size)) if ex else np.zeros((size, size), dtype=complex)
    for r, (tr, ir) in enumerate(tuples):
        wr = Fraction(1, multinomial(k, alphas[ir]))
        for s, (ts, is_) in enumerate(tuples):
            w = wr * Fraction(1, multinomial(k, alphas[is_]))
            for a in range(D):
                for b in range(D):
                    v = C[ir * D + a, is_ * D + b]
                    out[r * D + a, s * D + b] = v * w if ex else v * float(w)
    return out


def coef_from_full_tensor(T: np.ndarray, d: int, k: int, D: int = 1) -> np.ndarray:
    """Inverse of :func:`full_tensor_from_coef`: sum entries over monomial classes."""
    tuples = _tuples_by_index(d, k)
    N = sym_dim(d, k) * D
    ex = is_exact(T)
    out = zeros_exact((N, N)) if ex else np.zeros((N, N), dtype=T.dtype)
    for r, (_, ir) in enumerate(tuples):
        for s, (_, is_) in enumerate(tuples):
            for a in range(D):
                for b in range(D):
                    out[ir * D + a, is_ * D + b] = out[ir * D + a, is_ * D + b] + T[r * D + a, s * D + b]
    return out


def partial_trace_contraction(C: np.ndarray, d: int, k: int, t: int, D: int = 1) -> np.ndarray:
    """``tr_{k -> k-t}`` by explicit index contraction of the product-basis tensor."""
    if not 0 <= t <= k:
        raise ValueError(f"partial trace steps t={t} outside [0, {k}]")
    T = full_tensor_from_coef(C, d, k, D)
    kk = k
    for _ in range(t):
        # (i_1..i_{kk-1}, c, a) x (j_1..j_{kk-1}, c, b)  -> trace over c
        m = d ** (kk - 1)
        T4 = T.reshape(m, d, D, m, d, D)
        acc = None
        for c in range(d):
            blk = T4[:, c, :, :, c, :]
            acc = blk.copy() if acc is None else acc + blk
        T = acc.reshape(m * D, m * D)
        kk -= 1
    return coef_from_full_tensor(T, d, kk, D)


# ---------------------------------------------------------------------------
# Hermitian operators


class HermOp:
    """Hermitian operator on ``Sym^k C^d (x) C^D`` held as its coefficient matrix.

    Parameters
    ----------
    coef : array (N, N), N = sym_dim(d, k) * D
        Coefficient matrix (see module docstring). Object arrays of
        ``Fraction``/``QQi`` select exact mode.
    """

    def __init__(self, coef, d: int, k: int, D: int = 1, *, check: bool = True, atol: float = 1e-12):
        coef = np.asarray(coef)
        if coef.dtype != object:
            coef = coef.astype(complex) if np.iscomplexobj(coef) else coef.astype(float)
        N = sym_dim(d, k) * D
        if coef.shape != (N, N):
            raise ValueError(f"coefficient matrix must be {N}x{N} for d={d}, k={k}, D={D}; got {coef.shape}")
        self.coef = coef
        self.d, self.k, self.D = d, k, D
        if check and not self.is_hermitian(atol):
            raise ValueError("operator is not Hermitian")

    @property
    def exact(self) -> bool:
        return is_exact(self.coef)

    @property
    def shape(self) -> tuple[int, int]:
        return self.coef.shape

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        C = self.coef
        if self.exact:
            n = C.shape[0]
            return all(C[a, b] == C[b, a].conjugate() for a in range(n) for b in range(a, n))
        return bool(np.allclose(C, C.conj().T, atol=atol, rtol=0))

    # construction ---------------------------------------------------------

    @classmethod
    def from_matrix(cls, W, d: int, k: int, D: int = 1, **kw) -> "HermOp":
        """From a (float) matrix in the orthonormal symmetric basis."""
        W = np.asarray(W)
        s = scale_vector(d, k, D)
        return cls(s[:, None] * W * s[None, :], d, k, D, **kw)

    @classmethod
    def identity(cls, d: int, k: int, D: int = 1, exact: bool = False) -> "HermOp":
        s2 = [Fraction(multinomial(k, a)) for a in sym_indices(d, k) for _ in range(D)]
        N = len(s2)
        C = zeros_exact((N, N))
        for i, v in enumerate(s2):
            C[i, i] = v
        return cls(C if exact else to_float(C), d, k, D)

    @classmethod
    def rank_one(cls, v, k: int) -> "HermOp":
        """``|v><v|^{(x)k}`` for a complex vector ``v``."""
        v = np.asarray(v, dtype=complex)
        d = v.shape[0]
        m = np.array([multinomial(k, a) for a in sym_indices(d, k)], dtype=float)
        u = m * monomials(v, k)
        return cls(np.outer(u, u.conj()), d, k)

    @classmethod
    def from_terms(cls, terms: Mapping, d: int, k: int, D: int = 1, **kw) -> "HermOp":
        """From ``{(alpha, beta, i, j): q}`` with ``q`` the coefficient of
        ``x^alpha conj(x)^beta y_i conj(y_j)``."""
        idx = index_map(d, k)
        N = len(idx) * D
        vals = list(terms.values())
        exact = any(isinstance(v, (Fraction, QQi, int)) and not isinstance(v, bool) for v in vals) and not any(
            isinstance(v, (float, complex)) for v in vals
        )
        C = zeros_exact((N, N)) if exact else np.zeros((N, N), dtype=complex)
        for (alpha, beta, i, j), q in terms.items():
            a, b = idx[tuple(alpha)], idx[tuple(beta)]
            C[b * D + j, a * D + i] = q if not exact else (q if isinstance(q, QQi) else Fraction(q))
        if not exact and np.allclose(C.imag, 0):
            C = C.real
        return cls(C, d, k, D, **kw)

    # views ----------------------------------------------------------------

    @property
    def matrix(self) -> np.ndarray:
        """Matrix in the orthonormal symmetric basis (floating point)."""
        s = scale_vector(self.d, self.k, self.D)
        return to_float(self.coef) / np.outer(s, s)

    def terms(self) -> dict:
        """Nonzero bi-Hermitian coefficients ``{(alpha, beta, i, j): q}``."""
        alphas = sym_indices(self.d, self.k)
        D = self.D
        out = {}
        for r in range(self.coef.shape[0]):
            for c in range(self.coef.shape[1]):
                v = self.coef[r, c]
                if v != 0:
                    out[(alphas[c // D], alphas[r // D], c % D, r % D)] = v
        return out

    def to_float(self) -> "HermOp":
        return HermOp(to_float(self.coef), self.d, self.k, self.D, check=False)

    def __repr__(self):
        mode = "exact" if self.exact else "float"
        return f"HermOp(d={self.d}, k={self.k}, D={self.D}, {mode})"


def poly_from_op(W: HermOp) -> dict:
    """Bi-Hermitian coefficients of ``p_W``; see :meth:`HermOp.terms`."""
    return W.terms()


def monomials(x, k: int) -> np.ndarray:
    """``x^alpha`` for all degree-``k`` multi-indices; ``x`` may be batched ``(..., d)``."""
    x = np.asarray(x)
    d = x.shape[-1]
    E = _exponent_array(d, k)
    if k == 0:
        return np.ones(x.shape[:-1] + (1,), dtype=x.dtype)
    return np.prod(x[..., None, :] ** E, axis=-1)


def _block_at(W: HermOp, x: np.ndarray) -> np.ndarray:
    """``W_x[..., j, i]`` with ``p_W(x, y) = y^dagger W_x y``."""
    u = monomials(x, W.k)
    C = to_float(W.coef).reshape(u.shape[-1], W.D, u.shape[-1], W.D)
    return np.einsum("...b,bjai,...a->...ji", u.conj(), C, u)


def eval_poly(W: HermOp, x, y=None) -> np.ndarray:
    """``<x^{(x)k} (x) y| W |x^{(x)k} (x) y>``; ``x`` (and ``y``) may be batched."""
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] != W.d:
        raise ValueError(f"x has length {x.shape[-1]}, expected d={W.d}")
    if y is None:
        if W.D != 1:
            raise ValueError("y is required when D > 1")
        y = np.ones(x.shape[:-1] + (1,), dtype=complex)
    y = np.asarray(y, dtype=complex)
    if y.shape[-1] != W.D:
        raise ValueError(f"y has length {y.shape[-1]}, expected D={W.D}")
    Wx = _block_at(W, x)
    return np.einsum("...j,...ji,...i->...", y.conj(), Wx, y).real


def partial_trace(W: HermOp, t: int, route: str = "laplacian") -> HermOp:
    """``tr_{k -> k-t}(W)`` with the ancilla untouched."""
    if route == "laplacian":
        C = partial_trace_coef(W.coef, W.d, W.k, t, W.D)
    elif route == "contraction":
        C = partial_trace_contraction(W.coef, W.d, W.k, t, W.D)
    else:
        raise ValueError(f"unknown route {route!r}")
    return HermOp(C, W.d, W.k - t, W.D, check=False)


def trace_adjoint(W: HermOp, n: int) -> HermOp:
    """``tr*_{k -> n}(W)``; multiplies ``p_W`` by ``||x||^{2(n-k)}``."""
    check_desk(sym_dim(W.d, n) * W.D)
    return HermOp(trace_adjoint_coef(W.coef, W.d, W.k, n, W.D), W.d, n, W.D, check=False)


def laplacian_complex(W: HermOp) -> HermOp:
    """Formal complex Laplacian of ``p_W``; a degree-0 input maps to the zero form."""
    if W.k == 0:
        N = W.D
        C = zeros_exact((N, N)) if W.exact else np.zeros((N, N))
        return HermOp(C, W.d, 0, W.D, check=False)
    return HermOp(laplacian_coef(W.coef, W.d, W.k, W.D), W.d, W.k - 1, W.D, check=False)


def hs_inner(A: HermOp, B: HermOp):
    """Hilbert-Schmidt product ``tr(A^dagger B)`` computed from coefficient arrays."""
    if (A.d, A.k, A.D) != (B.d, B.k, B.D):
        raise ValueError("operators live on different spaces")
    g = hs_weights(A.d, A.k, A.D, exact=A.exact and B.exact)
    if A.exact and B.exact:
        total = Fraction(0)
        for idx, w in np.ndenumerate(g):
            total = A.coef[idx].conjugate() * B.coef[idx] * w + total
        return total
    return complex(np.sum(to_float(A.coef).conj() * to_float(B.coef) * g))


# ---------------------------------------------------------------------------
# real homogeneous polynomials


@dataclass
class RealSymPoly:
    """Real homogeneous polynomial ``sum_alpha c_alpha x^alpha`` of even degree."""

    d: int
    degree: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.degree % 2:
            raise ValueError("degree must be even")
        clean = {}
        for a, v in self.coeffs.items():
            a = tuple(int(e) for e in a)
            if len(a) != self.d or sum(a) != self.degree or min(a) < 0:
                raise ValueError(f"exponent {a} does not have length {self.d} and degree {self.degree}")
            if v != 0:
                clean[a] = v
        self.coeffs = clean

    @property
    def k(self) -> int:
        return self.degree // 2

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.coeffs.values())

    @classmethod
    def norm_power(cls, d: int, n: int) -> "RealSymPoly":
        """``||x||^{2n}`` with exact multinomial coefficients."""
        return cls(d, 2 * n, {tuple(2 * e for e in a): Fraction(multinomial(n, a)) for a in sym_indices(d, n)})

    @classmethod
    def from_vector(cls, vec, d: int, degree: int) -> "RealSymPoly":
        return cls(d, degree, dict(zip(sym_indices(d, degree), list(vec))))

    def vector(self, exact: bool | None = None) -> np.ndarray:
        exact = self.exact if exact is None else exact
        alphas = sym_indices(self.d, self.degree)
        if exact:
            out = zeros_exact(len(alphas))
            for i, a in enumerate(alphas):
                out[i] = Fraction(self.coeffs.get(a, 0))
            return out
        return np.array([float(self.coeffs.get(a, 0)) for a in alphas])

    def symmetric_tensor_vector(self) -> np.ndarray:
        """Coordinates of ``v`` in the orthonormal basis of ``Sym^{2k} R^d`` (float)."""
        alphas = sym_indices(self.d, self.degree)
        return np.array([float(self.coeffs.get(a, 0)) / math.sqrt(multinomial(self.degree, a)) for a in alphas])

    @classmethod
    def from_symmetric_tensor_vector(cls, v, d: int, degree: int) -> "RealSymPoly":
        alphas = sym_indices(d, degree)
        return cls(d, degree, {a: float(x) * math.sqrt(multinomial(degree, a)) for a, x in zip(alphas, v)})

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.coeffs:
            return np.zeros(x.shape[:-1])
        E = np.array(list(self.coeffs), dtype=np.int64)
        c = np.array([float(v) for v in self.coeffs.values()])
        return np.prod(x[..., None, :] ** E, axis=-1) @ c

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        E = np.array(list(self.coeffs), dtype=np.int64)
        c = np.array([float(v) for v in self.coeffs.values()])
        out = np.empty(x.shape)
        for i in range(self.d):
            Ei = E.copy()
            f = Ei[:, i].astype(float)
            Ei[:, i] = np.maximum(Ei[:, i] - 1, 0)
            out[..., i] = np.prod(x[..., None, :] ** Ei, axis=-1) @ (c * f)
        return out

    def __add__(self, other: "RealSymPoly") -> "RealSymPoly":
        if (self.d, self.degree) != (other.d, other.degree):
            raise ValueError("incompatible polynomials")
        out = dict(self.coeffs)
        for a, v in other.coeffs.items():
            out[a] = out.get(a, 0) + v
        return RealSymPoly(self.d, self.degree, out)

    def scale(self, s) -> "RealSymPoly":
        return RealSymPoly(self.d, self.degree, {a: v * s for a, v in self.coeffs.items()})

    def mul_norm2(self, times: int = 1) -> "RealSymPoly":
        """Multiply by ``||x||^{2 times}``."""
        cur = self.coeffs
        deg = self.degree
        for _ in range(times):
            nxt: dict = {}
            for a, v in cur.items():
                for c in range(self.d):
                    b = a[:c] + (a[c] + 2,) + a[c + 1:]
                    nxt[b] = nxt.get(b, 0) + v
            cur = nxt
            deg += 2
        return RealSymPoly(self.d, deg, cur)

    def __repr__(self):
        return f"RealSymPoly(d={self.d}, degree={self.degree}, terms={len(self.coeffs)})"


def laplacian_real(p: RealSymPoly) -> RealSymPoly:
    """``sum_i d^2 p / dx_i^2``."""
    if p.degree < 2:
        raise ValueError("Laplacian needs degree >= 2")
    out: dict = {}
    for a, v in p.coeffs.items():
        for c in range(p.d):
            if a[c] >= 2:
                b = a[:c] + (a[c] - 2,) + a[c + 1:]
                out[b] = out.get(b, 0) + v * (a[c] * (a[c] - 1))
    return RealSymPoly(p.d, p.degree - 2, out)


def real_partial_trace(p: RealSymPoly, steps: int, route: str = "laplacian") -> RealSymPoly:
    """Real ``tr_{n -> n-steps}`` on a degree-``2n`` polynomial."""
    n = p.k
    if not 0 <= steps <= n:
        raise ValueError(f"steps={steps} outside [0, {n}]")
    if route == "laplacian":
        q = p
        for _ in range(steps):
            q = laplacian_real(q)
        f = Fraction(1, falling(2 * n, 2 * steps))
        return q.scale(f if q.exact else float(f))
    if route == "contraction":
        return _real_trace_contraction(p, steps)
    raise ValueError(f"unknown route {route!r}")


def _real_trace_contraction(p: RealSymPoly, steps: int) -> RealSymPoly:
    d, m = p.d, p.degree
    exact = p.exact
    # full symmetric tensor T[i_1..i_m] = c_alpha alpha! / m!
    T = np.empty((d,) * m, dtype=object) if exact else np.zeros((d,) * m)
    for tup in product(range(d), repeat=m):
        alpha = [0] * d
        for c in tup:
            alpha[c] += 1
        alpha = tuple(alpha)
        v = p.coeffs.get(alpha, 0)
        w = Fraction(1, multinomial(m, alpha))
        T[tup] = Fraction(v) * w if exact else float(v) * float(w)
    for _ in range(steps):
        acc = None
        for c in range(d):
            blk = T[..., c, c]
            acc = blk.copy() if acc is None else acc + blk
        T = acc
        m -= 2
    out: dict = {}
    if m == 0:
        out[(0,) * d] = T[()] if isinstance(T, np.ndarray) else T
        return RealSymPoly(d, 0, out)
    for tup in product(range(d), repeat=m):
        alpha = [0] * d
        for c in tup:
            alpha[c] += 1
        alpha = tuple(alpha)
        out[alpha] = out.get(alpha, 0) + T[tup]
    return RealSymPoly(d, m, out)


def bombieri_inner(p: RealSymPoly, q: RealSymPoly):
    """Inner product of the corresponding symmetric tensors: ``sum c_a c'_a alpha!/(2k)!``."""
    if (p.d, p.degree) != (q.d, q.degree):
        raise ValueError("incompatible polynomials")
    total = 0
    for a, v in p.coeffs.items():
        if a in q.coeffs:
            total = total + v * q.coeffs[a] * Fraction(1, multinomial(p.degree, a))
    return total


# ---------------------------------------------------------------------------
# sampling, extrema, Bernstein


def sphere_samples(rng: np.random.Generator, n: int, d: int, field: str = "complex") -> np.ndarray:
    """Uniform points on the unit sphere of ``C^d`` or ``R^d`` (normalised Gaussians)."""
    if field == "complex":
        g = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    else:
        g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


@dataclass
class ExtremaEstimate:
    """Heuristic (not certified) extrema of a form over the unit sphere(s)."""

    m_est: float
    M_est: float
    samples: int
    refined: bool
    argmin: tuple = ()
    argmax: tuple = ()

    @property
    def sup_norm(self) -> float:
        return max(abs(self.m_est), abs(self.M_est))


def _complex_objective(W: HermOp, sign: float):
    d = W.d

    def f(v):
        x = v[:d] + 1j * v[d:]
        nx = np.linalg.norm(x)
        Wx = _block_at(W, x / nx)
        ev = np.linalg.eigvalsh((Wx + Wx.conj().T) / 2)
        return sign * (ev[0] if sign > 0 else ev[-1])

    return f


def _witness_complex(W: HermOp, x: np.ndarray, which: str):
    x = x / np.linalg.norm(x)
    Wx = _block_at(W, x)
    ev, vec = np.linalg.eigh((Wx + Wx.conj().T) / 2)
    y = vec[:, 0] if which == "min" else vec[:, -1]
    return x, y, float(eval_poly(W, x, y))


def estimate_extrema(obj, samples: int = 10_000, refine: bool = True, seed: int = 0, starts: int = 4) -> ExtremaEstimate:
    """Estimate ``min``/``max`` of ``p`` over the unit sphere(s).

    Uniform sphere sampling, then BFGS polishing of the best ``starts``
    candidates with the normalisation folded into the objective. For operators
    with ancilla, the inner ``y``-optimisation is exact (extreme eigenvalue).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    if isinstance(obj, HermOp):
        X = sphere_samples(rng, samples, obj.d, "complex")
        Wx = _block_at(obj, X)
        ev = np.linalg.eigvalsh((Wx + np.swapaxes(Wx.conj(), -1, -2)) / 2)
        lo, hi = ev[:, 0], ev[:, -1]
        best_min = _witness_complex(obj, X[int(np.argmin(lo))], "min")
        best_max = _witness_complex(obj, X[int(np.argmax(hi))], "max")
        if refine:
            for sign, vals, which in ((1.0, lo, "min"), (-1.0, -hi, "max")):
                f = _complex_objective(obj, sign)
                for i in np.argsort(vals)[:starts]:
                    v0 = np.concatenate([X[i].real, X[i].imag])
                    res = optimize.minimize(f, v0, method="BFGS", options={"gtol": 1e-12})
                    x = res.x[: obj.d] + 1j * res.x[obj.d:]
                    cand = _witness_complex(obj, x, which)
                    if which == "min" and cand[2] < best_min[2]:
                        best_min = cand
                    if which == "max" and cand[2] > best_max[2]:
                        best_max = cand
        return ExtremaEstimate(best_min[2], best_max[2], samples, refine, best_min[:2], best_max[:2])
    if isinstance(obj, RealSymPoly):
        p = obj
        X = sphere_samples(rng, samples, p.d, "real")
        vals = p(X)
        best_min = (X[int(np.argmin(vals))],)
        best_max = (X[int(np.argmax(vals))],)
        if refine:
            k2 = p.degree

            def make(sign):
                def f(v):
                    r2 = v @ v
                    return sign * p(v) / r2 ** (k2 / 2)

                def g(v):
                    r2 = v @ v
                    return sign * (p.gradient(v) / r2 ** (k2 / 2) - k2 * p(v) * v / r2 ** (k2 / 2 + 1))

                return f, g

            for sign, order, slot in ((1.0, np.argsort(vals), 0), (-1.0, np.argsort(-vals), 1)):
                f, g = make(sign)
                for i in order[:starts]:
                    res = optimize.minimize(f, X[i], jac=g, method="BFGS", options={"gtol": 1e-13})
                    x = res.x / np.linalg.norm(res.x)
                    if slot == 0 and p(x) < p(best_min[0]):
                        best_min = (x,)
                    if slot == 1 and p(x) > p(best_max[0]):
                        best_max = (x,)
        return ExtremaEstimate(float(p(best_min[0])), float(p(best_max[0])), samples, refine, best_min, best_max)
    raise TypeError("estimate_extrema expects a HermOp or RealSymPoly")


@dataclass
class BernsteinReport:
    t: int
    max_abs_laplacian: float
    bound: float
    ratio: float
    passed: bool
    sup_norm: float


def bernstein_check(obj, t: int, trials: int = 10_000, seed: int = 0, sup_norm: float | None = None,
                    rtol: float = 1e-9) -> BernsteinReport:
    """Sampled check of ``|Delta^t p| <= C(d, k, t) sup|p|`` on the unit sphere.

    ``C = (d/2)^t (2k)_{2t}`` for complex forms (complex Laplacian) and
    ``d^t (2k)_{2t}`` for real forms of degree ``2k``. ``sup_norm`` defaults to
    the refined extremum estimate, which equals ``M`` for nonnegative forms.
    """
    rng = np.random.default_rng(seed)
    if isinstance(obj, HermOp):
        k, d = obj.k, obj.d
        if not 0 <= t <= k:
            raise ValueError("t outside [0, k]")
        L = obj
        for _ in range(t):
            L = laplacian_complex(L)
        X = sphere_samples(rng, trials, d, "complex")
        Y = sphere_samples(rng, trials, obj.D, "complex")
        lhs = float(np.max(np.abs(eval_poly(L.to_float(), X, Y))))
        const = (d / 2) ** t * falling(2 * k, 2 * t)
    elif isinstance(obj, RealSymPoly):
        k, d = obj.k, obj.d
        if not 0 <= t <= k:
            raise ValueError("t outside [0, k]")
        L = obj
        for _ in range(t):
            L = laplacian_real(L)
        X = sphere_samples(rng, trials, d, "real")
        lhs = float(np.max(np.abs(L(X))))
        const = d**t * falling(2 * k, 2 * t)
    else:
        raise TypeError("bernstein_check expects a HermOp or RealSymPoly")
    if sup_norm is None:
        sup_norm = estimate_extrema(obj, samples=trials, refine=True, seed=seed + 1).sup_norm
    bound = const * sup_norm
    ratio = lhs / bound if bound > 0 else (0.0 if lhs == 0 else math.inf)
    return BernsteinReport(t, lhs, bound, ratio, ratio <= 1 + rtol, sup_norm)
