"""Degree bounds, SOS certificate construction and the shifted Motzkin family."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .chiribella import (
    build_MP_real, build_Psi, build_Psi_real, coeff_q, coeff_q_real, real_trace_adjoint_map,
    sphere_monomial_integral,
)
from .designs import SphericalDesign, build_design
from .exact import falling, is_exact, multinomial, to_float, to_fraction
from .symspace import (
    HermOp, RealSymPoly, _block_at, estimate_extrema, eval_poly, partial_trace_coef,
    real_dim_const, sphere_samples, sym_dim, sym_indices, trace_adjoint_coef,
)

PSD_CLIP = 1e-9
POSITIVITY_TOL = 1e-9
RESIDUAL_TOL = 1e-8


# ---------------------------------------------------------------------------
# bounds


def _check_mM(m, M):
    if m <= 0:
        raise ValueError("certificate undefined: m must be > 0")
    if M < m:
        raise ValueError("need m <= M")


def _ceil_n(value: float, k: int) -> int:
    return max(k, math.ceil(value - 1e-12))


def _ceil_half(value, k: int) -> int:
    """Smallest ``n >= k`` with ``2n >= value``."""
    return max(k, math.ceil(value / 2 - 1e-12))


@dataclass
class BoundReport:
    """Sufficient degrees ``n``; ``None`` marks a bound that does not apply."""

    field: str
    d: int
    k: int
    m: float
    M: float
    n_general: int
    n_k1: int | None
    n_improved: int | None
    n_numeric: int | None
    n_reznick: int | None = None
    Gamma: float = 0.0
    r: float = 0.0
    n_max: int = 0

    def as_dict(self) -> dict:
        out = {
            "field": self.field, "d": self.d, "k": self.k, "m": self.m, "M": self.M,
            "n_numeric": self.n_numeric, "Gamma": self.Gamma, "r": self.r, "n_max": self.n_max,
        }
        out.update(n_general=self.n_general, n_k1=self.n_k1, n_improved=self.n_improved, n_reznick=self.n_reznick)
        return out


def complex_bracket(n: int, d: int, k: int, m, M) -> Fraction:
    """``m q(n,k,k) - M sum_{t<k} |q(n,k,t)| (d/2)^{k-t} (2k)_{2k-2t} / ((k)_{k-t})^2``."""
    m, M = to_fraction(m), to_fraction(M)
    neg = sum(
        abs(coeff_q(n, k, t, d)) * Fraction(d, 2) ** (k - t) * Fraction(falling(2 * k, 2 * k - 2 * t), falling(k, k - t) ** 2)
        for t in range(k)
    )
    return m * coeff_q(n, k, k, d) - M * neg


def real_bracket(n: int, d: int, k: int, m, M) -> Fraction:
    """``m q_R(n,k,k) - M sum_{t<k} |q_R(n,k,t)| d^{k-t}``."""
    m, M = to_fraction(m), to_fraction(M)
    neg = sum(abs(coeff_q_real(n, k, t, d)) * d ** (k - t) for t in range(k))
    return m * coeff_q_real(n, k, k, d) - M * neg


def bound_n_numeric(d: int, k: int, m, M, n_max: int = 100_000) -> int | None:
    """Smallest ``n >= k`` with a nonnegative complex bracket, or ``None`` if none up to ``n_max``."""
    _check_mM(m, M)
    for n in range(k, n_max + 1):
        if complex_bracket(n, d, k, m, M) >= 0:
            return n
    return None


def bound_n_real_numeric(d: int, k: int, m, M, n_max: int = 100_000) -> int | None:
    _check_mM(m, M)
    for n in range(k, n_max + 1):
        if real_bracket(n, d, k, m, M) >= 0:
            return n
    return None


def bound_n_complex(d: int, k: int, m, M, n_max: int = 100_000, numeric: bool = True) -> BoundReport:
    if d < 1 or k < 1:
        raise ValueError("need d >= 1 and k >= 1")
    _check_mM(m, M)
    mf, Mf = float(m), float(M)
    gamma = math.log1p(mf / Mf)
    n_gen = _ceil_n(d * k * (2 * k - 1) / gamma - d - k + 1, k)
    n_k1 = None
    if k == 1:
        v = d * to_fraction(M) / to_fraction(m) - d
        n_k1 = max(k, math.ceil(v))
    n_imp = None
    if k >= 2:
        a = (k - 1) * (2 * k - 3)
        n_imp = _ceil_n(d * a / math.log1p(a / (k * (2 * k - 1)) * mf / Mf) - d - k + 2, k)
    n_num = bound_n_numeric(d, k, m, M, n_max) if numeric else None
    r = d * k * (2 * k - 1) / (n_gen + k + d - 1)
    return BoundReport("complex", d, k, mf, Mf, n_gen, n_k1, n_imp, n_num, None, gamma, r, n_max)


def bound_n_real(d: int, k: int, m, M, n_max: int = 100_000, numeric: bool = True) -> BoundReport:
    if d < 1 or k < 1:
        raise ValueError("need d >= 1 and k >= 1")
    _check_mM(m, M)
    mf, Mf = float(m), float(M)
    gamma = math.log1p(mf / Mf)
    n42 = _ceil_half(d * k * (2 * k - 1) / gamma + 2 - 2 * k - d, k)
    n43 = None
    if k == 1:
        v = d * to_fraction(M) / to_fraction(m) - d
        n43 = max(k, math.ceil(v / 2))
    n44 = None
    if k >= 2:
        a = (k - 1) * (2 * k - 3)
        n44 = _ceil_half(d * a / math.log1p(a / (k * (2 * k - 1)) * mf / Mf) + 4 - 2 * k - d, k)
    n45 = _ceil_half(d * k * (2 * k - 1) / math.log(2) * Mf / mf - d, k)
    n_num = bound_n_real_numeric(d, k, m, M, n_max) if numeric else None
    r = k * (2 * k - 1) / (2 * n42 + 2 * k + d - 2)
    return BoundReport("real", d, k, mf, Mf, n42, n43, n44, n_num, n45, gamma, r, n_max)


# ---------------------------------------------------------------------------
# complex certificates


@dataclass
class SOSTerm:
    """One design atom contributing ``sum_i |<v_i, y>|^2 |<phi, x>|^{2n}``.

    The vectors absorb the design weight: ``sum_i v_i v_i^dagger = weight * W~_phi``.
    """

    phi: np.ndarray
    weight: float
    vectors: list


@dataclass
class CertBundle:
    field: str
    d: int
    k: int
    n: int
    D: int
    W_tilde: object
    design: SphericalDesign | None
    sos_terms: list
    min_value: float
    residual: float
    regime: str
    passed: bool
    diagnostics: dict = field(default_factory=dict)


def transformed_operator(W: HermOp, n: int, route: str = "psi") -> HermOp:
    """``W~ = d[n+k] (Psi^{(n)} (x) id)(W)``.

    ``route="psi"`` applies the assembled Psi matrix; ``route="laplacian"``
    expands ``sum_t q(n,k,t) ||x||^{2(k-t)} ((k)_{k-t})^{-2} Delta^{k-t} p_W`` directly.
    """
    d, k, D = W.d, W.k, W.D
    if n < k:
        raise ValueError("n must be >= k")
    scale = sym_dim(d, n + k)
    if route == "psi":
        out = build_Psi(n, k, d, D, exact=W.exact)(W)
        C = out.coef
    elif route == "laplacian":
        C = None
        for t in range(k + 1):
            q = coeff_q(n, k, t, d)
            term = trace_adjoint_coef(partial_trace_coef(W.coef, d, k, k - t, D), d, t, k, D)
            term = term * (q if W.exact else float(q))
            C = term if C is None else C + term
    else:
        raise ValueError(f"unknown route {route!r}")
    C = C * (scale if W.exact else float(scale))
    return HermOp(C, d, k, D, check=False)


def _op_scale(W: HermOp) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(W.matrix)))) or 1.0


def reconstruction_residual(W: HermOp, W_tilde: HermOp, n: int, design: SphericalDesign, points: int = 100,
                            seed: int = 0) -> float:
    """Worst relative gap between ``||x||^{2(n-k)} p_W(x,y)`` and the design sum at random ``(x, y)``.

    The denominator is ``max(|lhs|, 1e-3 * ||x||^{2n} ||y||^2 ||W||)`` so that
    near-zeros of indefinite forms do not blow the ratio up.
    """
    d, k, D = W.d, W.k, W.D
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((points, d)) + 1j * rng.standard_normal((points, d))
    Y = rng.standard_normal((points, D)) + 1j * rng.standard_normal((points, D))
    Wf, Wt = W.to_float(), W_tilde.to_float()
    nx = np.linalg.norm(X, axis=1)
    lhs = nx ** (2 * (n - k)) * eval_poly(Wf, X, Y)
    B = _block_at(Wt, design.vectors)  # (atoms, D, D)
    pY = np.einsum("pj,aji,pi->pa", Y.conj(), B, Y).real
    ov = np.abs(X.conj() @ design.vectors.T) ** (2 * n)
    rhs = np.sum(pY * ov * design.weights, axis=1)
    floor = 1e-3 * nx ** (2 * n) * np.linalg.norm(Y, axis=1) ** 2 * _op_scale(Wf)
    return float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(lhs), floor)))


def build_certificate(W: HermOp, n: int, design: SphericalDesign | None = None, m=None, M=None,
                      points: int = 100, extra_samples: int = 2000, seed: int = 0) -> CertBundle:
    """Construct and verify the sum-of-squares certificate for ``p_W`` at degree ``n``.

    A negative design evaluation is reported through ``passed=False`` (and
    the bundle is still returned), since probing ``n`` below the threshold is
    a legitimate use.
    """
    d, k, D = W.d, W.k, W.D
    if n < k:
        raise ValueError("n must be >= k")
    if design is None:
        design = build_design(d, n + k)
    if design.d != d:
        raise ValueError(f"design is for d={design.d}, expected {d}")
    if design.degree < n + k:
        raise ValueError(f"design degree {design.degree} < n+k = {n + k}")
    source = "user"
    if m is None or M is None:
        est = estimate_extrema(W, samples=10_000, refine=True, seed=seed)
        m = est.m_est if m is None else m
        M = est.M_est if M is None else M
        source = "estimated"
    if m <= 0:
        raise ValueError(f"m(W) = {float(m):.6g} <= 0: the certificate requires a strictly positive form")

    Wt = transformed_operator(W, n, "psi")
    Wt_lap = transformed_operator(W, n, "laplacian")
    if W.exact:
        route_dev = 0.0 if np.all(Wt.coef == Wt_lap.coef) else float(np.max(np.abs(to_float(Wt.coef - Wt_lap.coef))))
    else:
        route_dev = float(np.max(np.abs(Wt.coef - Wt_lap.coef)))

    Wtf = Wt.to_float()
    B = _block_at(Wtf, design.vectors)
    B = (B + np.swapaxes(B.conj(), -1, -2)) / 2
    evals, evecs = np.linalg.eigh(B)
    min_atoms = float(np.min(evals[:, 0]))
    terms = []
    psd_ok = True
    for phi, w, lam, vec in zip(design.vectors, design.weights, evals, evecs):
        if lam[0] < -PSD_CLIP:
            psd_ok = False
        lam = np.where((lam < 0) & (lam >= -PSD_CLIP), 0.0, lam)
        vs = [np.sqrt(w * l) * vec[:, i] for i, l in enumerate(lam) if l > 0]
        terms.append(SOSTerm(phi, float(w), vs))
    rng = np.random.default_rng(seed + 1)
    Xs = sphere_samples(rng, extra_samples, d, "complex")
    Bs = _block_at(Wtf, Xs)
    min_samples = float(np.min(np.linalg.eigvalsh((Bs + np.swapaxes(Bs.conj(), -1, -2)) / 2)[:, 0]))
    residual = reconstruction_residual(W, Wt, n, design, points, seed)
    n_num = bound_n_numeric(d, k, m, M, n_max=max(n, k))
    regime = "proven" if n_num is not None and n >= n_num else "empirical"
    min_value = min(min_atoms, min_samples)
    passed = psd_ok and residual <= RESIDUAL_TOL and min_atoms >= -POSITIVITY_TOL
    diag = {
        "route_deviation": route_dev, "min_at_atoms": min_atoms, "min_at_samples": min_samples,
        "m": float(m), "M": float(M), "extrema_source": source, "n_numeric": n_num,
        "atoms": len(design), "max_terms": (n + k + 1) ** (2 * d) * D,
    }
    return CertBundle("complex", d, k, n, D, Wt, design, terms, min_value, residual, regime, passed, diag)


# ---------------------------------------------------------------------------
# real certificates


def transformed_poly_real(v: RealSymPoly, n: int) -> RealSymPoly:
    """``v~ = d_R[n+k] Psi^R(v)``."""
    k = v.k
    out = build_Psi_real(n, k, v.d, exact=v.exact)(v)
    c = real_dim_const(v.d, n + k)
    return out.scale(c if v.exact else float(c))


def mp_real_apply(p: RealSymPoly, n: int) -> RealSymPoly:
    """``int p(phi) <x, phi>^{2n} dphi`` as an exact degree-``2n`` form (no normalising constant)."""
    d = p.d
    even = all(e % 2 == 0 for a in p.coeffs for e in a)
    out = {}
    for g in sym_indices(d, 2 * n):
        if even and any(e % 2 for e in g):
            continue
        mg = multinomial(2 * n, g)
        acc = 0
        for a, c in p.coeffs.items():
            e = sphere_monomial_integral(tuple(x + y for x, y in zip(a, g)))
            if e:
                acc = acc + c * e
        if acc:
            out[g] = acc * mg
    return RealSymPoly(d, 2 * n, out)


def build_certificate_real(v: RealSymPoly, n: int, m=None, M=None, samples: int = 20_000, points: int = 100,
                           seed: int = 0, matrix_check_limit: int = 500) -> CertBundle:
    """Real certificate ``||x||^{2(n-k)} p_v(x) = int p_v~(phi) <phi, x>^{2n} dphi``.

    The identity is checked exactly on coefficients (closed-form sphere
    moments), and as the matrix equation ``tr*_{k->n} = MP^R_{k->n} o Psi^R``
    when ``d_R``-space sizes stay below ``matrix_check_limit``. Nonnegativity
    of ``p_v~`` is checked by dense sphere sampling plus local refinement.
    """
    d, k = v.d, v.k
    if n < k:
        raise ValueError("n must be >= k")
    source = "user"
    if m is None or M is None:
        est = estimate_extrema(v, samples=samples, refine=True, seed=seed)
        m = est.m_est if m is None else m
        M = est.M_est if M is None else M
        source = "estimated"
    if m <= 0:
        raise ValueError(f"m(v) = {float(m):.6g} <= 0: the certificate requires a strictly positive form")
    vt = transformed_poly_real(v, n)

    lhs_poly = v.mul_norm2(n - k)
    rhs_poly = mp_real_apply(vt, n)
    if v.exact:
        keys = set(lhs_poly.coeffs) | set(rhs_poly.coeffs)
        exact_gap = max((abs(Fraction(lhs_poly.coeffs.get(a, 0)) - rhs_poly.coeffs.get(a, 0)) for a in keys),
                        default=Fraction(0))
        coef_dev = float(exact_gap)
    else:
        keys = set(lhs_poly.coeffs) | set(rhs_poly.coeffs)
        coef_dev = max((abs(float(lhs_poly.coeffs.get(a, 0)) - float(rhs_poly.coeffs.get(a, 0))) for a in keys),
                       default=0.0)

    matrix_ok = None
    if sym_dim(d, 2 * n) <= matrix_check_limit:
        lhs_m = real_trace_adjoint_map(d, k, n, exact=True)
        rhs_m = build_MP_real(k, n, d).compose(build_Psi_real(n, k, d))
        matrix_ok = lhs_m.equals(rhs_m)

    rng = np.random.default_rng(seed)
    X = rng.standard_normal((points, d))
    lhs = np.linalg.norm(X, axis=1) ** (2 * (n - k)) * v(X)
    rhs = rhs_poly(X)
    floor = 1e-3 * np.linalg.norm(X, axis=1) ** (2 * n) * max(abs(float(m)), abs(float(M)))
    residual = float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(lhs), floor)))

    est_t = estimate_extrema(vt, samples=samples, refine=True, seed=seed + 1)
    min_value = est_t.m_est
    n_num = bound_n_real_numeric(d, k, m, M, n_max=max(n, k))
    regime = "proven" if n_num is not None and n >= n_num else "empirical"
    passed = residual <= RESIDUAL_TOL and min_value >= -POSITIVITY_TOL and (matrix_ok is not False)
    diag = {
        "coefficient_deviation": coef_dev, "matrix_identity": matrix_ok, "m": float(m), "M": float(M),
        "extrema_source": source, "n_numeric": n_num, "argmin": est_t.argmin,
    }
    return CertBundle("real", d, k, n, 1, vt, None, [], min_value, residual, regime, passed, diag)


# ---------------------------------------------------------------------------
# shifted Motzkin family


_MOTZKIN = {(4, 2, 0): 1, (0, 4, 2): 1, (2, 0, 4): 1, (2, 2, 2): -3}


def motzkin_poly(eps=0) -> RealSymPoly:
    """``x^4 y^2 + y^4 z^2 + z^4 x^2 - 3 x^2 y^2 z^2 + eps (x^2 + y^2 + z^2)^3``."""
    eps = to_fraction(eps)
    if eps < 0:
        raise ValueError("eps must be >= 0")
    base = RealSymPoly(3, 6, {a: Fraction(c) for a, c in _MOTZKIN.items()})
    return base + RealSymPoly.norm_power(3, 3).scale(eps)


def _half_mul_norm(coeffs: dict) -> dict:
    """Multiply by ``u1 + u2 + u3`` in half-exponent (``u = x^2``) coordinates."""
    out: dict = {}
    for (a, b, c), v in coeffs.items():
        for key in ((a + 1, b, c), (a, b + 1, c), (a, b, c + 1)):
            out[key] = out.get(key, 0) + v
    return out


def motzkin_eps_thresholds(n_max: int) -> dict[int, Fraction]:
    """``{n: eps_n}`` for ``3 <= n <= n_max``: the least ``eps`` making every coefficient of
    ``||x||^{2(n-3)} p_eps`` nonnegative."""
    if n_max < 3:
        raise ValueError("n must be >= 3")
    a = {(2, 1, 0): 1, (0, 2, 1): 1, (1, 0, 2): 1, (1, 1, 1): -3}
    out = {}
    for n in range(3, n_max + 1):
        worst = Fraction(0)
        for key, val in a.items():
            if val < 0:
                b = multinomial(n, key)
                worst = max(worst, Fraction(-val, b))
        out[n] = worst
        a = _half_mul_norm(a)
    return out


def motzkin_eps_threshold(n: int) -> Fraction:
    return motzkin_eps_thresholds(n)[n]


def motzkin_min_n(eps, n_max: int, thresholds: dict | None = None) -> int | None:
    """``min{n : eps_n <= eps}`` searched up to ``n_max``."""
    eps = to_fraction(eps)
    th = thresholds or motzkin_eps_thresholds(n_max)
    for n in range(3, n_max + 1):
        if th[n] <= eps:
            return n
    return None
