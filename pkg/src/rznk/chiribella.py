"""Coefficient families and the measure-and-prepare / Phi / Psi / Clone maps.

Every map here is linear on coefficient arrays and commutes with the ancilla,
so it is stored as a *core* matrix acting on ``vec(C)`` (row-major) for
``D = 1``; :meth:`SymLinearMap.__call__` threads the ancilla through. Real
maps act on coefficient vectors of degree-``2k`` forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exact import (
    QQi, exact_array, exact_matmul, eye_exact, falling, is_exact, multinomial, to_float,
    zeros_exact,
)
from .symspace import (
    HermOp, RealSymPoly, _lowering, _raising, check_desk, eval_poly, index_map, monomials,
    real_dim_const, sphere_samples, sym_dim, sym_indices,
)

# ---------------------------------------------------------------------------
# coefficients


def _check_range(name, lo, x, hi):
    if not lo <= x <= hi:
        raise ValueError(f"{name}={x} outside [{lo}, {hi}]")


def coeff_c(n: int, k: int, s: int) -> Fraction:
    """``c(n,k,s) = binom(k,s) binom(n,s) / binom(n+k,k)``."""
    _check_range("s", 0, s, min(n, k))
    return Fraction(math.comb(k, s) * math.comb(n, s), math.comb(n + k, k))


def coeff_q(n: int, k: int, t: int, d: int) -> Fraction:
    """Signed inverse coefficient ``q(n,k,t)``."""
    if d < 1 or n < k:
        raise ValueError("coeff_q needs d >= 1 and n >= k")
    _check_range("t", 0, t, k)
    sign = -1 if (t + k) % 2 else 1
    return sign * Fraction(math.comb(n + t, t) * math.comb(k, t), math.comb(n, k)) * Fraction(
        sym_dim(d, n + t), sym_dim(d, n + k)
    )


def coeff_qhat(n: int, k: int, s: int, d: int) -> Fraction:
    """``qhat(n,k,k-s) = q(n,k,k-s) d[n+k] d[k] / (d[n] d[k-s])``."""
    _check_range("s", 0, s, k)
    return coeff_q(n, k, k - s, d) * Fraction(
        sym_dim(d, n + k) * sym_dim(d, k), sym_dim(d, n) * sym_dim(d, k - s)
    )


def coeff_c_real(n: int, k: int, s: int, d: int | None = None) -> Fraction:
    """``c_R(n,k,s) = 4^s multinom(n+k; 2s, n-s, k-s) / binom(2n+2k, 2k)`` (``d`` unused)."""
    _check_range("s", 0, s, min(n, k))
    return Fraction(4**s * multinomial(n + k, (2 * s, n - s, k - s)), math.comb(2 * n + 2 * k, 2 * k))


def coeff_q_real(n: int, k: int, t: int, d: int) -> Fraction:
    if d < 1 or n < k:
        raise ValueError("coeff_q_real needs d >= 1 and n >= k")
    _check_range("t", 0, t, k)
    sign = -1 if (t + k) % 2 else 1
    return (
        sign
        * Fraction(math.comb(2 * n + 2 * t, 2 * t) * math.comb(2 * k, k - t), 4**k * math.comb(n + t, k + t))
        * real_dim_ratio(d, n + t, n + k)
    )


def real_dim_ratio(d: int, a: int, b: int) -> Fraction:
    """``d_R[a] / d_R[b]`` via ``d_R[j+1] / d_R[j] = (2j+d)/(2j+1)``."""
    if a > b:
        return 1 / real_dim_ratio(d, b, a)
    r = Fraction(1)
    for j in range(a, b):
        r *= Fraction(2 * j + 1, 2 * j + d)
    return r


@dataclass
class CoeffTable:
    """Exact coefficient values for one ``(d, k, n)`` triple; ``qhat[s]`` is ``qhat(n,k,k-s)``."""

    d: int
    k: int
    n: int
    c: list = field(default_factory=list)
    q: list = field(default_factory=list)
    qhat: list = field(default_factory=list)
    c_R: list = field(default_factory=list)
    q_R: list = field(default_factory=list)

    @classmethod
    def build(cls, d: int, k: int, n: int) -> "CoeffTable":
        if n < k:
            raise ValueError("CoeffTable needs n >= k")
        return cls(
            d, k, n,
            c=[coeff_c(n, k, s) for s in range(min(n, k) + 1)],
            q=[coeff_q(n, k, t, d) for t in range(k + 1)],
            qhat=[coeff_qhat(n, k, s, d) for s in range(k + 1)],
            c_R=[coeff_c_real(n, k, s) for s in range(min(n, k) + 1)],
            q_R=[coeff_q_real(n, k, t, d) for t in range(k + 1)],
        )


# ---------------------------------------------------------------------------
# linear maps


def _vec_weights(d: int, k: int, field: str) -> np.ndarray:
    """Diagonal Gram weights of the coefficient-space inner product (exact)."""
    if field == "complex":
        w = [Fraction(1, multinomial(k, a)) for a in sym_indices(d, k)]
        return np.array([a * b for a in w for b in w], dtype=object)
    return np.array([Fraction(1, multinomial(2 * k, a)) for a in sym_indices(d, 2 * k)], dtype=object)


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ea, eb = is_exact(a), is_exact(b)
    if ea and eb:
        return exact_matmul(a, b)
    return to_float(a) @ to_float(b)


@dataclass(frozen=True, eq=False)
class SymLinearMap:
    """Linear map between symmetric coefficient spaces.

    ``field == "complex"``: source/target are coefficient matrices of degree
    ``k_in``/``k_out`` (``core`` acts on their row-major vectorisation).
    ``field == "real"``: source/target are coefficient vectors of forms of
    degree ``2 k_in``/``2 k_out``.
    """

    d: int
    k_in: int
    k_out: int
    core: np.ndarray
    field: str = "complex"
    name: str = ""

    def __post_init__(self):
        n_in, n_out = self.dims
        if self.core.shape != (n_out, n_in):
            raise ValueError(f"core has shape {self.core.shape}, expected {(n_out, n_in)}")

    @property
    def dims(self) -> tuple[int, int]:
        if self.field == "complex":
            return sym_dim(self.d, self.k_in) ** 2, sym_dim(self.d, self.k_out) ** 2
        return sym_dim(self.d, 2 * self.k_in), sym_dim(self.d, 2 * self.k_out)

    @property
    def exact(self) -> bool:
        return is_exact(self.core)

    def matrix(self, D: int = 1) -> np.ndarray:
        """Matrix of ``map (x) id_D`` on vectorised ``(d[k] D)``-sized coefficient arrays."""
        if self.field == "real" or D == 1:
            return self.core
        No, Ni = sym_dim(self.d, self.k_out), sym_dim(self.d, self.k_in)
        core = to_float(self.core).reshape(No, No, Ni, Ni)
        eye = np.eye(D)
        full = np.einsum("rcab,jJ,iI->rjciaJbI", core, eye, eye)
        return full.reshape((No * D) ** 2, (Ni * D) ** 2)

    def to_float(self) -> "SymLinearMap":
        return SymLinearMap(self.d, self.k_in, self.k_out, to_float(self.core), self.field, self.name)

    def compose(self, other: "SymLinearMap") -> "SymLinearMap":
        """``self o other``."""
        if other.k_out != self.k_in or other.d != self.d or other.field != self.field:
            raise ValueError("maps do not compose")
        return SymLinearMap(self.d, other.k_in, self.k_out, _dot(self.core, other.core), self.field)

    def __matmul__(self, other):
        return self.compose(other)

    def __add__(self, other: "SymLinearMap") -> "SymLinearMap":
        if (self.d, self.k_in, self.k_out, self.field) != (other.d, other.k_in, other.k_out, other.field):
            raise ValueError("maps live on different spaces")
        a, b = self.core, other.core
        if is_exact(a) != is_exact(b):
            a, b = to_float(a), to_float(b)
        return SymLinearMap(self.d, self.k_in, self.k_out, a + b, self.field)

    def scale(self, s) -> "SymLinearMap":
        core = self.core * (s if self.exact else float(s))
        return SymLinearMap(self.d, self.k_in, self.k_out, core, self.field, self.name)

    def adjoint(self) -> "SymLinearMap":
        """Adjoint w.r.t. the Hilbert-Schmidt (complex) or tensor (real) inner product."""
        g_in = _vec_weights(self.d, self.k_in, self.field)
        g_out = _vec_weights(self.d, self.k_out, self.field)
        M = self.core
        if self.exact:
            MH = np.vectorize(lambda v: v.conjugate() if isinstance(v, QQi) else v, otypes=[object])(M.T)
            adj = np.empty(MH.shape, dtype=object)
            for (i, j), v in np.ndenumerate(MH):
                adj[i, j] = v * g_out[j] / g_in[i]
        else:
            adj = M.conj().T * to_float(g_out)[None, :] / to_float(g_in)[:, None]
        return SymLinearMap(self.d, self.k_out, self.k_in, adj, self.field)

    def __call__(self, X):
        if self.field == "complex":
            if isinstance(X, HermOp):
                C = self._apply_coef(X.coef, X.D)
                return HermOp(C, self.d, self.k_out, X.D, check=False)
            return self._apply_coef(np.asarray(X), 1)
        if isinstance(X, RealSymPoly):
            v = X.vector(exact=self.exact and X.exact)
            out = _dot(self.core, v[:, None])[:, 0]
            return RealSymPoly.from_vector(out, self.d, 2 * self.k_out)
        return _dot(self.core, np.asarray(X)[:, None])[:, 0]

    def _apply_coef(self, C: np.ndarray, D: int) -> np.ndarray:
        Ni, No = sym_dim(self.d, self.k_in), sym_dim(self.d, self.k_out)
        if C.shape != (Ni * D, Ni * D):
            raise ValueError(f"input has shape {C.shape}, expected {(Ni * D, Ni * D)}")
        X = C.reshape(Ni, D, Ni, D).transpose(0, 2, 1, 3).reshape(Ni * Ni, D * D)
        core = self.core
        if is_exact(X) and not is_exact(core):
            X = to_float(X)
        elif is_exact(core) and not is_exact(X):
            core = to_float(core)
        Y = _dot(core, X)
        return Y.reshape(No, No, D, D).transpose(0, 2, 1, 3).reshape(No * D, No * D)

    def equals(self, other: "SymLinearMap", atol: float | None = None) -> bool:
        if self.core.shape != other.core.shape:
            return False
        if atol is None and self.exact and other.exact:
            return bool(np.all(self.core == other.core))
        return bool(np.allclose(to_float(self.core), to_float(other.core), atol=atol or 0.0, rtol=0))


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.kron(a, b)
    return out.astype(object) if is_exact(a) else out


@lru_cache(maxsize=None)
def _lap_core(d: int, k: int, exact: bool) -> np.ndarray:
    out = None
    for c in range(d):
        L = _lowering(d, k, c, 1, exact)
        t = _kron(L, L)
        out = t if out is None else out + t
    return out


@lru_cache(maxsize=None)
def _mul_core(d: int, k: int, exact: bool) -> np.ndarray:
    out = None
    for c in range(d):
        R = _raising(d, k, c, 1, exact)
        t = _kron(R, R)
        out = t if out is None else out + t
    return out


def _identity(N: int, exact: bool) -> np.ndarray:
    return eye_exact(N) if exact else np.eye(N)


@lru_cache(maxsize=None)
def _trace_core(d: int, k: int, t: int, exact: bool) -> np.ndarray:
    """Core of ``tr_{k -> t}`` (complex)."""
    _check_range("t", 0, t, k)
    out = _identity(sym_dim(d, k) ** 2, exact)
    for j in range(k, t, -1):
        out = _dot(_lap_core(d, j, exact), out)
    f = Fraction(1, falling(k, k - t) ** 2)
    return out * (f if exact else float(f))


@lru_cache(maxsize=None)
def _adj_core(d: int, t: int, k: int, exact: bool) -> np.ndarray:
    """Core of ``tr*_{t -> k}`` (complex)."""
    out = _identity(sym_dim(d, t) ** 2, exact)
    for j in range(t, k):
        out = _dot(_mul_core(d, j, exact), out)
    return out


@lru_cache(maxsize=None)
def _tstar_t_core(d: int, k: int, s: int, exact: bool) -> np.ndarray:
    """Core of ``tr*_{s -> k} o tr_{k -> s}``."""
    return _dot(_adj_core(d, s, k, exact), _trace_core(d, k, s, exact))


def trace_map(d: int, k: int, t: int, exact: bool = True) -> SymLinearMap:
    """``tr_{k -> t}`` as a map on coefficient matrices."""
    return SymLinearMap(d, k, t, _trace_core(d, k, t, exact), "complex", "tr")


def trace_adjoint_map(d: int, t: int, k: int, exact: bool = True) -> SymLinearMap:
    if k < t:
        raise ValueError("trace adjoint needs k >= t")
    return SymLinearMap(d, t, k, _adj_core(d, t, k, exact), "complex", "tr*")


def _combo(d: int, k: int, coeffs, exact: bool, field: str) -> np.ndarray:
    core_fn = _tstar_t_core if field == "complex" else _tstar_t_core_real
    out = None
    for s, c in enumerate(coeffs):
        if c == 0:
            continue
        term = core_fn(d, k, s, exact) * (c if exact else float(c))
        out = term if out is None else out + term
    if out is None:
        N = sym_dim(d, k) ** 2 if field == "complex" else sym_dim(d, 2 * k)
        out = zeros_exact((N, N)) if exact else np.zeros((N, N))
    return out


def build_Phi(n: int, k: int, d: int, D: int = 1, exact: bool = True) -> SymLinearMap:
    """``Phi^{(n)}_{k->k} = sum_s c(n,k,s) tr*_{s->k} o tr_{k->s}``; ``D`` is carried implicitly."""
    check_desk(sym_dim(d, k) * D)
    coeffs = [coeff_c(n, k, s) for s in range(min(n, k) + 1)]
    return SymLinearMap(d, k, k, _combo(d, k, coeffs, exact, "complex"), "complex", "Phi")


def build_Psi(n: int, k: int, d: int, D: int = 1, exact: bool = True) -> SymLinearMap:
    """``Psi^{(n)}_{k->k} = sum_t q(n,k,t) tr*_{t->k} o tr_{k->t}``, the inverse of Phi."""
    if n < k:
        raise ValueError("build_Psi needs n >= k")
    check_desk(sym_dim(d, k) * D)
    coeffs = [coeff_q(n, k, t, d) for t in range(k + 1)]
    return SymLinearMap(d, k, k, _combo(d, k, coeffs, exact, "complex"), "complex", "Psi")


def _mp_exact_core(n: int, k: int, d: int, exact: bool) -> np.ndarray:
    out = None
    for s in range(min(n, k) + 1):
        c = coeff_c(n, k, s)
        core = _dot(_adj_core(d, s, k, exact), _trace_core(d, n, s, exact))
        term = core * (c if exact else float(c))
        out = term if out is None else out + term
    return out


def _mp_design_core(n: int, k: int, d: int, design) -> np.ndarray:
    U = np.asarray(design.vectors, dtype=complex)
    w = np.asarray(design.weights, dtype=float)
    un = monomials(U, n)
    mk = np.array([multinomial(k, a) for a in sym_indices(d, k)], dtype=float)
    vk = mk * monomials(U, k)
    # out[(b',a'),(b,a)] = d[n+k] sum_i w_i vk[b'] conj(vk[a']) conj(un[b]) un[a]
    core = np.einsum("i,ip,iq,ir,is->pqrs", w, vk, vk.conj(), un.conj(), un, optimize=True)
    Nk, Nn = vk.shape[1], un.shape[1]
    return sym_dim(d, n + k) * core.reshape(Nk * Nk, Nn * Nn)


def build_MP(n: int, k: int, d: int, D: int = 1, design="exact", exact: bool = True) -> SymLinearMap:
    """Measure-and-prepare ``MP_{n->k}``.

    ``design="exact"`` uses ``sum_s c(n,k,s) tr*_{s->k} o tr_{n->s}``;
    a :class:`~rznk.designs.SphericalDesign` of degree ``>= n+k`` uses quadrature.
    """
    check_desk(sym_dim(d, max(n, k)) * D)
    if isinstance(design, str):
        if design != "exact":
            raise ValueError("design must be 'exact' or a SphericalDesign")
        return SymLinearMap(d, n, k, _mp_exact_core(n, k, d, exact), "complex", "MP")
    if design.d != d:
        raise ValueError(f"design is for d={design.d}, expected {d}")
    if design.degree < n + k:
        raise ValueError(f"design degree {design.degree} < n+k = {n + k}")
    return SymLinearMap(d, n, k, _mp_design_core(n, k, d, design), "complex", "MP")


def build_MP_tilde(n: int, k: int, d: int, exact: bool = True) -> SymLinearMap:
    """Trace-preserving rescaling ``(d[n]/d[n+k]) MP_{n->k}``."""
    return build_MP(n, k, d, exact=exact).scale(Fraction(sym_dim(d, n), sym_dim(d, n + k)))


def build_Clone(k: int, n: int, d: int, exact: bool = True) -> SymLinearMap:
    """``Clone_{k->n} = (d[k]/d[n]) tr*_{k->n}``."""
    return trace_adjoint_map(d, k, n, exact).scale(Fraction(sym_dim(d, k), sym_dim(d, n)))


# ---------------------------------------------------------------------------
# real picture


@lru_cache(maxsize=None)
def _lap_core_real(d: int, deg: int, exact: bool) -> np.ndarray:
    src, dst = index_map(d, deg), index_map(d, deg - 2)
    M = zeros_exact((len(dst), len(src))) if exact else np.zeros((len(dst), len(src)))
    for a, ia in src.items():
        for c in range(d):
            if a[c] >= 2:
                b = a[:c] + (a[c] - 2,) + a[c + 1:]
                M[dst[b], ia] = M[dst[b], ia] + a[c] * (a[c] - 1)
    return M


@lru_cache(maxsize=None)
def _mul_core_real(d: int, deg: int, exact: bool) -> np.ndarray:
    src, dst = index_map(d, deg), index_map(d, deg + 2)
    M = zeros_exact((len(dst), len(src))) if exact else np.zeros((len(dst), len(src)))
    for a, ia in src.items():
        for c in range(d):
            b = a[:c] + (a[c] + 2,) + a[c + 1:]
            M[dst[b], ia] = M[dst[b], ia] + 1
    return M


@lru_cache(maxsize=None)
def _trace_core_real(d: int, k: int, t: int, exact: bool) -> np.ndarray:
    _check_range("t", 0, t, k)
    out = _identity(sym_dim(d, 2 * k), exact)
    for j in range(k, t, -1):
        out = _dot(_lap_core_real(d, 2 * j, exact), out)
    f = Fraction(1, falling(2 * k, 2 * (k - t)))
    return out * (f if exact else float(f))


@lru_cache(maxsize=None)
def _adj_core_real(d: int, t: int, k: int, exact: bool) -> np.ndarray:
    out = _identity(sym_dim(d, 2 * t), exact)
    for j in range(t, k):
        out = _dot(_mul_core_real(d, 2 * j, exact), out)
    return out


@lru_cache(maxsize=None)
def _tstar_t_core_real(d: int, k: int, s: int, exact: bool) -> np.ndarray:
    return _dot(_adj_core_real(d, s, k, exact), _trace_core_real(d, k, s, exact))


def real_trace_map(d: int, k: int, t: int, exact: bool = True) -> SymLinearMap:
    return SymLinearMap(d, k, t, _trace_core_real(d, k, t, exact), "real", "tr")


def real_trace_adjoint_map(d: int, t: int, k: int, exact: bool = True) -> SymLinearMap:
    if k < t:
        raise ValueError("trace adjoint needs k >= t")
    return SymLinearMap(d, t, k, _adj_core_real(d, t, k, exact), "real", "tr*")


def build_Phi_real(n: int, k: int, d: int, exact: bool = True) -> SymLinearMap:
    coeffs = [coeff_c_real(n, k, s) for s in range(min(n, k) + 1)]
    return SymLinearMap(d, k, k, _combo(d, k, coeffs, exact, "real"), "real", "Phi_R")


def build_Psi_real(n: int, k: int, d: int, exact: bool = True) -> SymLinearMap:
    if n < k:
        raise ValueError("build_Psi_real needs n >= k")
    coeffs = [coeff_q_real(n, k, t, d) for t in range(k + 1)]
    return SymLinearMap(d, k, k, _combo(d, k, coeffs, exact, "real"), "real", "Psi_R")


def _double_factorial_odd(m: int) -> int:
    """``(2m-1)!!``."""
    r = 1
    for j in range(1, 2 * m, 2):
        r *= j
    return r


@lru_cache(maxsize=200_000)
def sphere_monomial_integral(exponents) -> Fraction:
    """``E[phi^gamma]`` for ``phi`` uniform on the real unit sphere in ``R^d``."""
    exponents = tuple(int(e) for e in exponents)
    if any(e % 2 for e in exponents):
        return Fraction(0)
    d = len(exponents)
    half = [e // 2 for e in exponents]
    num = 1
    for a in half:
        num *= _double_factorial_odd(a)
    den = 1
    for j in range(sum(half)):
        den *= d + 2 * j
    return Fraction(num, den)


def build_MP_real(n: int, k: int, d: int, exact: bool = True) -> SymLinearMap:
    """``MP^R_{n->k}`` by exact expansion of ``<x, phi>^{2k}`` and closed-form sphere moments."""
    src, dst = sym_indices(d, 2 * n), sym_indices(d, 2 * k)
    check_desk(len(src))
    check_desk(len(dst))
    c = real_dim_const(d, n + k)
    M = zeros_exact((len(dst), len(src)))
    for i, g in enumerate(dst):
        mg = multinomial(2 * k, g)
        for j, a in enumerate(src):
            e = sphere_monomial_integral(tuple(x + y for x, y in zip(a, g)))
            if e:
                M[i, j] = c * mg * e
    return SymLinearMap(d, n, k, M if exact else to_float(M), "real", "MP_R")


def build_MP_real_exact_route(n: int, k: int, d: int, exact: bool = True) -> SymLinearMap:
    """``sum_s c_R(n,k,s) tr*_{s->k} o tr_{n->s}`` (the right-hand side of the real identity)."""
    out = None
    for s in range(min(n, k) + 1):
        core = _dot(_adj_core_real(d, s, k, exact), _trace_core_real(d, n, s, exact))
        c = coeff_c_real(n, k, s)
        term = core * (c if exact else float(c))
        out = term if out is None else out + term
    return SymLinearMap(d, n, k, out, "real", "MP_R")


# ---------------------------------------------------------------------------
# verification


@dataclass
class IdentityReport:
    name: str
    max_deviation: float
    tol: float
    passed: bool
    details: dict = field(default_factory=dict)


def verify_chiribella(n: int, k: int, d: int, tol: float = 1e-10, design=None, pairs: int = 100,
                      seed: int = 0) -> IdentityReport:
    """Compare design-quadrature ``MP_{n->k}`` with ``sum_s c tr* o tr`` and the rank-one formula."""
    from .designs import build_design

    if design is None:
        design = build_design(d, n + k)
    lhs = build_MP(n, k, d, design=design)
    rhs = build_MP(n, k, d, design="exact")
    frob = float(np.linalg.norm(lhs.core - to_float(rhs.core)))
    rng = np.random.default_rng(seed)
    A = sphere_samples(rng, pairs, d, "complex")
    B = sphere_samples(rng, pairs, d, "complex")
    rhs_f = rhs.to_float()
    cs = [float(coeff_c(n, k, s)) for s in range(min(n, k) + 1)]
    scalar = 0.0
    for a, b in zip(A, B):
        out = rhs_f(HermOp.rank_one(a, n))
        val = float(eval_poly(out, b))
        ov = abs(np.vdot(a, b)) ** 2
        ref = sum(c * ov**s for s, c in enumerate(cs))
        scalar = max(scalar, abs(val - ref))
    dev = max(frob, scalar)
    return IdentityReport("chiribella", dev, tol, dev <= tol, {"frobenius": frob, "scalar": scalar})


def verify_real_identity(n: int, k: int, d: int, tol: float = 0.0, route: str = "exact",
                         samples: int = 1_000_000, seed: int = 0, chunk: int = 100_000) -> IdentityReport:
    """Check ``MP^R_{n->k} = sum_s c_R tr* o tr``.

    ``route="exact"`` compares rational matrices built from closed-form sphere
    moments; ``route="mc"`` estimates ``MP^R`` from normalised Gaussian
    samples and reports the worst deviation in units of the per-entry
    standard error (``tol`` then means a sigma multiple, default 4).
    """
    rhs = build_MP_real_exact_route(n, k, d)
    if route == "exact":
        lhs = build_MP_real(n, k, d)
        diff = lhs.core - rhs.core
        dev = float(max(abs(v) for v in diff.flat))
        return IdentityReport("real_chiribella_exact", dev, tol, dev <= tol)
    if route != "mc":
        raise ValueError(f"unknown route {route!r}")
    tol = tol or 4.0
    rng = np.random.default_rng(seed)
    En = np.array(sym_indices(d, 2 * n))
    Ek = np.array(sym_indices(d, 2 * k))
    mk = np.array([multinomial(2 * k, g) for g in sym_indices(d, 2 * k)], dtype=float)
    c = float(real_dim_const(d, n + k))
    s1 = np.zeros((len(Ek), len(En)))
    s2 = np.zeros_like(s1)
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        phi = sphere_samples(rng, m, d, "real")
        pn = np.prod(phi[:, None, :] ** En, axis=-1)
        pk = np.prod(phi[:, None, :] ** Ek, axis=-1) * mk
        s1 += pk.T @ pn
        s2 += (pk**2).T @ (pn**2)
        done += m
    mean = c * s1 / samples
    var = c**2 * (s2 / samples - (s1 / samples) ** 2)
    se = np.sqrt(np.maximum(var, 0) / samples)
    ref = to_float(rhs.core)
    diff = np.abs(mean - ref)
    z = np.where(se > 0, diff / np.where(se > 0, se, 1), np.where(diff > 1e-12, np.inf, 0.0))
    worst = float(np.max(z))
    return IdentityReport("real_chiribella_mc", worst, tol, worst <= tol,
                          {"samples": samples, "max_abs_deviation": float(np.max(diff))})
