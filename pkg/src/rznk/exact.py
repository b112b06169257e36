"""Exact rational helpers: combinatorial numbers, Gaussian rationals, object-array matmul."""
from __future__ import annotations

import numbers
from fractions import Fraction
from math import comb, factorial, lcm
from typing import Iterable

import numpy as np


def falling(x, p: int):
    """Falling factorial ``x (x-1) ... (x-p+1)``; equals 1 for ``p == 0``."""
    if p < 0:
        raise ValueError("p must be non-negative")
    r = 1
    for i in range(p):
        r *= x - i
    return r


def multinomial(n: int, parts: Iterable[int]) -> int:
    parts = list(parts)
    if any(p < 0 for p in parts) or sum(parts) != n:
        return 0
    r = factorial(n)
    for p in parts:
        r //= factorial(p)
    return r


def multi_factorial(alpha: Iterable[int]) -> int:
    r = 1
    for a in alpha:
        r *= factorial(a)
    return r


def to_fraction(x) -> Fraction:
    """Read ints, Fractions, decimal strings and floats (binary-exact) as a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


class QQi(numbers.Number):
    """Gaussian rational ``re + i*im`` with Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = to_fraction(re)
        self.im = to_fraction(im)

    @staticmethod
    def _coerce(other):
        if isinstance(other, QQi):
            return other
        if isinstance(other, (int, Fraction, np.integer)):
            return QQi(other, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QQi(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QQi(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QQi(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        den = o.re * o.re + o.im * o.im
        num = self * o.conjugate()
        return QQi(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def conjugate(self):
        return QQi(self.re, -self.im)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QQi({self.re}, {self.im})"


def exact_array(a) -> np.ndarray:
    """Object array of Fractions (QQi kept as is) from ints/Fractions/strings."""
    a = np.asarray(a, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = v if isinstance(v, QQi) else to_fraction(v)
    return out


def zeros_exact(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(0))
    return out


def eye_exact(n: int) -> np.ndarray:
    out = zeros_exact((n, n))
    for i in range(n):
        out[i, i] = Fraction(1)
    return out


def is_exact(a: np.ndarray) -> bool:
    return np.asarray(a).dtype == object


def _int_scaled(a: np.ndarray):
    den = 1
    for v in a.flat:
        den = lcm(den, v.denominator)
    ints = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        ints[idx] = v.numerator * (den // v.denominator)
    return ints, den


def exact_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of two Fraction object arrays via common-denominator integer arithmetic."""
    if any(isinstance(v, QQi) for v in a.flat) or any(isinstance(v, QQi) for v in b.flat):
        return a @ b
    ai, da = _int_scaled(a)
    bi, db = _int_scaled(b)
    prod = ai.dot(bi)
    den = da * db
    out = np.empty(prod.shape, dtype=object)
    for idx, v in np.ndenumerate(prod):
        out[idx] = Fraction(int(v), den)
    return out


def to_float(a: np.ndarray) -> np.ndarray:
    """Float or complex ndarray from a (possibly exact) array."""
    a = np.asarray(a)
    if a.dtype != object:
        return a
    if any(isinstance(v, (QQi, complex)) for v in a.flat):
        return np.array([complex(v) for v in a.flat], dtype=complex).reshape(a.shape)
    return np.array([float(v) for v in a.flat], dtype=float).reshape(a.shape)


def fraction_str(x) -> str:
    x = to_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


__all__ = [
    "QQi", "comb", "exact_array", "exact_matmul", "eye_exact", "factorial", "falling",
    "fraction_str", "is_exact", "multi_factorial", "multinomial", "to_float", "to_fraction",
    "zeros_exact",
]
