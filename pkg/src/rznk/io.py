"""JSON/CSV readers and writers for polynomials, designs, certificates and reports."""
from __future__ import annotations

import csv
import hashlib
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .exact import QQi, fraction_str, to_fraction
from .symspace import HermOp, RealSymPoly

FLOAT_DIGITS = 17


class InputError(ValueError):
    """Malformed or inconsistent user input."""


# ---------------------------------------------------------------------------
# scalars


def fmt_float(x: float) -> str:
    """Shortest string that round-trips the double (at most 17 significant digits)."""
    return repr(float(x))


def encode_number(x):
    """Fractions become ``"p/q"`` strings; floats stay JSON numbers."""
    if isinstance(x, Fraction):
        return fraction_str(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return encode_number(obj)


def _read_scalar(term: dict, key: str):
    """Read ``key`` (``re`` or ``im``) in float or rational form; ``None`` when absent."""
    prefix = "" if key == "re" else "im_"
    if prefix + "num" in term:
        return Fraction(int(term[prefix + "num"]), int(term.get(prefix + "den", 1)))
    if key not in term:
        return None
    v = term[key]
    if isinstance(v, dict):
        return Fraction(int(v["num"]), int(v.get("den", 1)))
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InputError(f"bad coefficient value {v!r}")
    return v


# ---------------------------------------------------------------------------
# polynomials


def poly_from_dict(data: dict):
    """Parse the polynomial schema into a :class:`HermOp` (complex) or :class:`RealSymPoly` (real)."""
    try:
        fld = data["field"]
        d, k = int(data["d"]), int(data["k"])
        D = int(data.get("D", 1))
        terms = data["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed polynomial JSON: {exc}") from exc
    if fld not in ("complex", "real"):
        raise InputError("field must be 'complex' or 'real'")
    if d < 1 or k < 0 or D < 1:
        raise InputError("need d >= 1, k >= 0, D >= 1")
    parsed = []
    for t in terms:
        re = _read_scalar(t, "re")
        im = _read_scalar(t, "im")
        if re is None and im is None:
            raise InputError(f"term without a coefficient: {t}")
        parsed.append((t, re if re is not None else 0, im if im is not None else 0))
    exact = all(not isinstance(v, float) for _, re, im in parsed for v in (re, im))
    if fld == "real":
        if D != 1:
            raise InputError("real polynomials are supported for D = 1 only")
        coeffs = {}
        for t, re, im in parsed:
            if im != 0:
                raise InputError("real polynomial with an imaginary coefficient")
            alpha = tuple(int(e) for e in t["alpha"])
            coeffs[alpha] = coeffs.get(alpha, 0) + (Fraction(re) if exact else float(re))
        try:
            return RealSymPoly(d, 2 * k, coeffs)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    out = {}
    for t, re, im in parsed:
        try:
            key = (tuple(int(e) for e in t["alpha"]), tuple(int(e) for e in t["beta"]), int(t.get("i", 0)),
                   int(t.get("j", 0)))
        except KeyError as exc:
            raise InputError(f"complex term missing {exc}") from exc
        if len(key[0]) != d or len(key[1]) != d or sum(key[0]) != k or sum(key[1]) != k:
            raise InputError(f"term {t} does not match d={d}, k={k}")
        if not (0 <= key[2] < D and 0 <= key[3] < D):
            raise InputError(f"ancilla index out of range in {t}")
        if exact:
            val = QQi(re, im) if im != 0 else Fraction(re)
        else:
            val = complex(float(re), float(im))
        out[key] = out.get(key, 0) + val
    try:
        return HermOp.from_terms(out, d, k, D)
    except ValueError as exc:
        raise InputError(f"{exc}; both Hermitian halves of every off-diagonal term are required") from exc


def poly_to_dict(obj) -> dict:
    if isinstance(obj, RealSymPoly):
        terms = []
        for a, v in sorted(obj.coeffs.items(), reverse=True):
            t = {"alpha": list(a)}
            t.update(_value_fields(v, 0))
            terms.append(t)
        return {"field": "real", "d": obj.d, "k": obj.k, "D": 1, "terms": terms}
    terms = []
    for (alpha, beta, i, j), v in obj.terms().items():
        t = {"alpha": list(alpha), "beta": list(beta), "i": i, "j": j}
        if isinstance(v, QQi):
            t.update(_value_fields(v.re, v.im))
        elif isinstance(v, Fraction):
            t.update(_value_fields(v, 0))
        else:
            t.update(_value_fields(float(np.real(v)), float(np.imag(v))))
        terms.append(t)
    return {"field": "complex", "d": obj.d, "k": obj.k, "D": obj.D, "terms": terms}


def _value_fields(re, im) -> dict:
    if isinstance(re, (Fraction, int)) and isinstance(im, (Fraction, int)):
        re, im = Fraction(re), Fraction(im)
        out = {"num": re.numerator, "den": re.denominator}
        if im:
            out.update(im_num=im.numerator, im_den=im.denominator)
        return out
    return {"re": float(re), "im": float(im)}


def load_poly(path):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc
    return poly_from_dict(data)


# ---------------------------------------------------------------------------
# designs


def design_to_dict(design) -> dict:
    return {
        "d": design.d,
        "degree": design.degree,
        "construction": design.construction,
        "atoms": [
            {"v_re": v.real.tolist(), "v_im": v.imag.tolist(), "w": float(w)}
            for v, w in zip(design.vectors, design.weights)
        ],
    }


def design_from_dict(data: dict):
    from .designs import SphericalDesign

    try:
        atoms = data["atoms"]
        V = np.array([np.array(a["v_re"], dtype=float) + 1j * np.array(a["v_im"], dtype=float) for a in atoms])
        w = np.array([float(a["w"]) for a in atoms])
        return SphericalDesign(int(data["d"]), int(data["degree"]), V, w, data.get("construction", "external"))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed design JSON: {exc}") from exc


def save_design(design, path) -> None:
    write_json(path, design_to_dict(design))


def load_design(path):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc
    return design_from_dict(data)


# ---------------------------------------------------------------------------
# reports


def input_hash(payload) -> str:
    """SHA-256 of raw bytes, or of the canonical JSON of a parameter dict."""
    if isinstance(payload, (bytes, bytearray)):
        raw = bytes(payload)
    else:
        raw = json.dumps(_jsonable(payload), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(raw).hexdigest()


def meta(seed: int, mode: str, tolerances: dict, payload) -> dict:
    return {
        "tool": "rznk",
        "version": __version__,
        "seed": int(seed),
        "mode": mode,
        "tolerances": tolerances,
        "input_hash": input_hash(payload),
    }


def write_json(path, data) -> None:
    text = json.dumps(_jsonable(data), indent=2, sort_keys=False) + "\n"
    if path in (None, "-"):
        print(text, end="")
    else:
        Path(path).write_text(text)


def write_csv(path, header: list, rows: list) -> None:
    def cell(v):
        if v is None:
            return ""
        if isinstance(v, Fraction):
            return fraction_str(v)
        if isinstance(v, (bool, np.bool_)):
            return str(bool(v)).lower()
        if isinstance(v, (float, np.floating)):
            return fmt_float(v)
        return str(v)

    if path in (None, "-"):
        import sys

        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows([[cell(v) for v in r] for r in rows])
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([[cell(v) for v in r] for r in rows])


def cert_to_dict(cert, precision: int = FLOAT_DIGITS) -> dict:
    def s(x):
        return format(float(x), f".{precision}g")

    out = {
        "field": cert.field, "d": cert.d, "k": cert.k, "n": cert.n, "D": cert.D,
        "regime": cert.regime, "passed": cert.passed, "residual": cert.residual,
        "min_evaluation": cert.min_value, "precision": precision,
        "sos_terms": [
            {
                "phi_re": [s(v) for v in t.phi.real], "phi_im": [s(v) for v in t.phi.imag],
                "weight": s(t.weight),
                "vectors": [{"re": [s(v) for v in w.real], "im": [s(v) for v in w.imag]} for w in t.vectors],
            }
            for t in cert.sos_terms
        ],
        "transformed": poly_to_dict(cert.W_tilde),
        "diagnostics": {k: v for k, v in cert.diagnostics.items() if k != "argmin"},
    }
    return out


def cert_from_dict(data: dict):
    from .certify import CertBundle, SOSTerm

    terms = []
    for t in data.get("sos_terms", []):
        phi = np.array([float(a) for a in t["phi_re"]]) + 1j * np.array([float(a) for a in t["phi_im"]])
        vecs = [np.array([float(a) for a in w["re"]]) + 1j * np.array([float(a) for a in w["im"]])
                for w in t["vectors"]]
        terms.append(SOSTerm(phi, float(t["weight"]), vecs))
    return CertBundle(
        data["field"], data["d"], data["k"], data["n"], data["D"], poly_from_dict(data["transformed"]), None,
        terms, data["min_evaluation"], data["residual"], data["regime"], data["passed"], data.get("diagnostics", {}),
    )


def bounds_from_dict(data: dict):
    from .certify import BoundReport

    return BoundReport(data["field"], data["d"], data["k"], data["m"], data["M"], data["n_general"], data["n_k1"],
                       data["n_improved"], data["n_numeric"], data.get("n_reznick"), data["Gamma"], data["r"],
                       data["n_max"])


def coeff_table_to_dict(table) -> dict:
    return {
        "d": table.d, "k": table.k, "n": table.n,
        **{name: [fraction_str(v) for v in getattr(table, name)] for name in ("c", "q", "qhat", "c_R", "q_R")},
    }


def coeff_table_from_dict(data: dict):
    from .chiribella import CoeffTable

    return CoeffTable(data["d"], data["k"], data["n"],
                      **{name: [Fraction(v) for v in data[name]] for name in ("c", "q", "qhat", "c_R", "q_R")})


def definetti_to_dict(rep) -> dict:
    return {
        "d": rep.d, "k": rep.k, "n": rep.n, "r": rep.r,
        "delta": fraction_str(rep.delta), "eps_exact": fraction_str(rep.eps_exact),
        "eps_bound": None if rep.eps_bound is None else fraction_str(rep.eps_bound),
        "qhat_table": [fraction_str(v) for v in rep.qhat_table], "feasible": rep.feasible,
        "delta_real": None if rep.delta_real is None else fraction_str(rep.delta_real),
    }


def definetti_from_dict(data: dict):
    from .definetti import DeFinettiReport

    def f(v):
        return None if v is None else Fraction(v)

    return DeFinettiReport(data["d"], data["k"], data["n"], data["r"], Fraction(data["delta"]),
                           Fraction(data["eps_exact"]), f(data["eps_bound"]),
                           [Fraction(v) for v in data["qhat_table"]], data["feasible"], f(data.get("delta_real")))


__all__ = [
    "InputError", "bounds_from_dict", "cert_from_dict", "cert_to_dict", "coeff_table_from_dict",
    "coeff_table_to_dict", "definetti_from_dict", "definetti_to_dict", "design_from_dict", "design_to_dict",
    "fmt_float", "input_hash", "load_design", "load_poly", "meta", "poly_from_dict", "poly_to_dict",
    "save_design", "to_fraction", "write_csv", "write_json",
]
