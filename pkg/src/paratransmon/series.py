"""Truncated power series in the transmon small parameter with exact rational coefficients.

A series is stored as a dense list of :class:`fractions.Fraction` coefficients
starting at ``min_power`` (which may be negative, e.g. ``-1`` for the
frequency series where the plasma frequency contributes ``4/xi``) and ending at
``truncation_order``.  Arithmetic is exact; floating point only enters in
:func:`series_eval` and :meth:`RationalSeries.evaluate`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Rational = Fraction

DEFAULT_ORDER = 25


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # exact binary value of the float
        return Fraction(value)
    return Fraction(value)


@dataclass(frozen=True)
class RationalSeries:
    """Truncated Laurent/power series ``sum_k c_k xi^k`` for ``min_power <= k <= truncation_order``."""

    coefficients: tuple[Fraction, ...]
    min_power: int = 0

    def __post_init__(self):
        coeffs = tuple(_as_fraction(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("a series needs at least one coefficient")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_coefficients(cls, coeffs: Iterable, min_power: int = 0) -> "RationalSeries":
        return cls(tuple(coeffs), min_power)

    @classmethod
    def zero(cls, truncation_order: int = DEFAULT_ORDER, min_power: int = 0) -> "RationalSeries":
        return cls((Fraction(0),) * (truncation_order - min_power + 1), min_power)

    @classmethod
    def constant(cls, value, truncation_order: int = DEFAULT_ORDER) -> "RationalSeries":
        coeffs = [Fraction(0)] * (truncation_order + 1)
        coeffs[0] = _as_fraction(value)
        return cls(tuple(coeffs), 0)

    @classmethod
    def monomial(cls, power: int, value=1, truncation_order: int = DEFAULT_ORDER) -> "RationalSeries":
        lo = min(0, power)
        coeffs = [Fraction(0)] * (truncation_order - lo + 1)
        if power <= truncation_order:
            coeffs[power - lo] = _as_fraction(value)
        return cls(tuple(coeffs), lo)

    @property
    def truncation_order(self) -> int:
        return self.min_power + len(self.coefficients) - 1

    def coeff(self, power: int) -> Fraction:
        """Coefficient of ``xi**power`` (zero outside the stored range below truncation)."""
        if power > self.truncation_order:
            raise IndexError(f"power {power} beyond truncation order {self.truncation_order}")
        k = power - self.min_power
        if k < 0:
            return Fraction(0)
        return self.coefficients[k]

    def items(self):
        for k, c in enumerate(self.coefficients):
            yield self.min_power + k, c

    def truncate(self, order: int) -> "RationalSeries":
        if order < self.min_power:
            raise ValueError("truncation below min_power")
        order = min(order, self.truncation_order)
        return RationalSeries(self.coefficients[: order - self.min_power + 1], self.min_power)

    def _aligned(self, other: "RationalSeries"):
        lo = min(self.min_power, other.min_power)
        hi = min(self.truncation_order, other.truncation_order)
        return lo, hi

    def __add__(self, other):
        if not isinstance(other, RationalSeries):
            other = RationalSeries.constant(other, self.truncation_order)
        lo, hi = self._aligned(other)
        return RationalSeries(tuple(self.coeff(k) + other.coeff(k) for k in range(lo, hi + 1)), lo)

    __radd__ = __add__

    def __neg__(self):
        return RationalSeries(tuple(-c for c in self.coefficients), self.min_power)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, factor) -> "RationalSeries":
        f = _as_fraction(factor)
        return RationalSeries(tuple(f * c for c in self.coefficients), self.min_power)

    def shift(self, power: int) -> "RationalSeries":
        """Multiply by ``xi**power`` (truncation order moves with the coefficients)."""
        return RationalSeries(self.coefficients, self.min_power + power)

    def __mul__(self, other):
        if not isinstance(other, RationalSeries):
            return self.scale(other)
        lo = self.min_power + other.min_power
        # the product is known only up to the smaller absolute truncation offset
        hi = min(self.truncation_order + other.min_power, other.truncation_order + self.min_power)
        out = [Fraction(0)] * (hi - lo + 1)
        a, b = self.coefficients, other.coefficients
        for i, ai in enumerate(a):
            if not ai:
                continue
            for j in range(min(len(b), hi - lo - i + 1)):
                bj = b[j]
                if bj:
                    out[i + j] += ai * bj
        return RationalSeries(tuple(out), lo)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, RationalSeries):
            return NotImplemented
        if self.truncation_order != other.truncation_order:
            return False
        lo = min(self.min_power, other.min_power)
        return all(self.coeff(k) == other.coeff(k) for k in range(lo, self.truncation_order + 1))

    def __hash__(self):
        return hash((self.truncation_order, tuple(c for _, c in self.items() if c)))

    def derivative_log(self) -> "RationalSeries":
        """``xi d/dxi`` applied termwise (keeps the power range)."""
        return RationalSeries(tuple(k * c for k, c in self.items()), self.min_power)

    def sqrt(self) -> "RationalSeries":
        """Square root of a series with constant term 1 (exact rationals)."""
        if self.min_power != 0 and any(c for k, c in self.items() if k < 0):
            raise ValueError("sqrt needs a power series")
        if self.coeff(0) != 1:
            raise ValueError("sqrt implemented for series with unit constant term")
        n = self.truncation_order
        a = [self.coeff(k) for k in range(n + 1)]
        r = [Fraction(0)] * (n + 1)
        r[0] = Fraction(1)
        for k in range(1, n + 1):
            acc = a[k] - sum(r[i] * r[k - i] for i in range(1, k))
            r[k] = acc / 2
        return RationalSeries(tuple(r), 0)

    def reciprocal(self) -> "RationalSeries":
        """``1/s`` for a power series with non-zero constant term."""
        n = self.truncation_order
        a = [self.coeff(k) for k in range(n + 1)]
        if not a[0]:
            raise ZeroDivisionError("constant term vanishes")
        r = [Fraction(0)] * (n + 1)
        r[0] = 1 / a[0]
        for k in range(1, n + 1):
            r[k] = -sum(a[i] * r[k - i] for i in range(1, k + 1)) / a[0]
        return RationalSeries(tuple(r), 0)

    def float_coefficients(self) -> np.ndarray:
        return np.array([float(c) for c in self.coefficients])

    def evaluate(self, xi):
        """Vectorised double-precision Horner evaluation (for sweeps)."""
        x = np.asarray(xi, dtype=float)
        if self.min_power < 0 and np.any(x <= 0):
            raise ValueError("xi must be positive for a series with negative powers")
        acc = np.zeros_like(x)
        for c in reversed(self.float_coefficients()):
            acc = acc * x + c
        if self.min_power:
            acc = acc * x ** self.min_power
        return acc if acc.ndim else float(acc)

    def exact_value(self, xi) -> Fraction:
        x = _as_fraction(xi)
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc * x ** self.min_power

    def __repr__(self):
        terms = ", ".join(f"{k}: {c}" for k, c in self.items() if c)
        return f"RationalSeries({{{terms}}}, order={self.truncation_order})"

    def to_json(self) -> dict:
        return {
            "min_power": self.min_power,
            "coeffs": [[str(c.numerator), str(c.denominator)] for c in self.coefficients],
        }

    @classmethod
    def from_json(cls, data: dict) -> "RationalSeries":
        coeffs = [Fraction(int(num), int(den)) for num, den in data["coeffs"]]
        return cls(tuple(coeffs), int(data["min_power"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def series_add(a: RationalSeries, b: RationalSeries) -> RationalSeries:
    return a + b


def series_mul(a: RationalSeries, b: RationalSeries) -> RationalSeries:
    return a * b


def series_eval(s: RationalSeries, xi) -> float:
    """Evaluate ``s`` at ``xi``, correctly rounded to double precision.

    The point is converted exactly to a rational so the only rounding is the
    final conversion.
    """
    x = float(xi) if not isinstance(xi, Fraction) else xi
    if x <= 0 and s.min_power < 0:
        raise ValueError("xi must be positive for a series with negative powers")
    return float(s.exact_value(x))


def from_pairs(pairs: Sequence[tuple[int, Fraction]], truncation_order: int, min_power: int = 0) -> RationalSeries:
    coeffs = [Fraction(0)] * (truncation_order - min_power + 1)
    for k, c in pairs:
        coeffs[k - min_power] = _as_fraction(c)
    return RationalSeries(tuple(coeffs), min_power)
