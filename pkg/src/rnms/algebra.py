"""Exact arithmetic in Z[lambda_m] and the star map.

lambda_m = (m + sqrt(m^2 + 4)) / 2 is the root of x^2 = m x + 1, and its
algebraic conjugate is lambda'_m = m - lambda_m.  Elements a + b*lambda_m are
kept with integer coefficients; Python integers never overflow, so no width
checks are needed here (vectorised numpy paths elsewhere guard their own
int64 ranges).

The module also provides ``frac_turns``, the fractional part of k*x for a
frequency k and a module element x, computed with fixed-point integers.  Phases
like exp(-2 pi i k lambda^n) are useless in double precision once k*lambda^n is
large, so every phase in the package goes through this function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from numbers import Rational

__all__ = [
    "QuadInt",
    "FourierModulePoint",
    "lambda_value",
    "lambda_conjugate",
    "discriminant",
    "quad_add",
    "quad_mul",
    "star",
    "lambda_power",
    "sign_of",
    "frac_turns",
]

# Fixed-point precision (bits) for frac_turns.
_PRECISION = 256


def discriminant(m: int) -> int:
    """m**2 + 4."""
    return m * m + 4


def lambda_value(m: int) -> float:
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    return (m + math.sqrt(discriminant(m))) / 2


def lambda_conjugate(m: int) -> float:
    """lambda'_m = m - lambda_m, computed without cancellation."""
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    # lambda * lambda' = -1
    return -1.0 / lambda_value(m)


def _sign_u_plus_v_sqrt(u: int, v: int, d: int) -> int:
    """Exact sign of u + v*sqrt(d) for integers u, v and d > 0 non-square."""
    if u >= 0 and v >= 0:
        return 1 if (u or v) else 0
    if u <= 0 and v <= 0:
        return -1
    # mixed signs: compare magnitudes squared
    lhs = u * u
    rhs = v * v * d
    if u > 0:
        return 1 if lhs > rhs else -1
    return 1 if rhs > lhs else -1


def sign_of(a: int, b: int, m: int) -> int:
    """Exact sign of a + b*lambda_m."""
    # a + b (m + sqrt D)/2 has the sign of (2a + b m) + b sqrt D
    return _sign_u_plus_v_sqrt(2 * a + b * m, b, discriminant(m))


@total_ordering
@dataclass(frozen=True, slots=True)
class QuadInt:
    """The number ``a + b*lambda_m`` with integer ``a`` (rational part) and ``b``."""

    a: int
    b: int
    m: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")

    @classmethod
    def lam(cls, m: int) -> QuadInt:
        return cls(0, 1, m)

    @classmethod
    def lam_conjugate(cls, m: int) -> QuadInt:
        """lambda'_m = m - lambda_m as an element of Z[lambda_m]."""
        return cls(m, -1, m)

    @property
    def rational_part(self) -> int:
        return self.a

    @property
    def lambda_part(self) -> int:
        return self.b

    def _coerce(self, other) -> QuadInt:
        if isinstance(other, QuadInt):
            if other.m != self.m:
                raise ValueError(f"mismatched family parameter: m={self.m} vs m={other.m}")
            return other
        if isinstance(other, int):
            return QuadInt(other, 0, self.m)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadInt(self.a + other.a, self.b + other.b, self.m)

    __radd__ = __add__

    def __neg__(self):
        return QuadInt(-self.a, -self.b, self.m)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadInt(self.a - other.a, self.b - other.b, self.m)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        # (a + b L)(c + d L) with L^2 = m L + 1
        a, b, c, d = self.a, self.b, other.a, other.b
        bd = b * d
        return QuadInt(a * c + bd, a * d + b * c + self.m * bd, self.m)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not closed in Z[lambda]; use star/units explicitly")
        result = QuadInt(1, 0, self.m)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def star(self) -> QuadInt:
        # a + b lambda' = (a + b m) - b lambda
        return QuadInt(self.a + self.b * self.m, -self.b, self.m)

    def trace(self) -> int:
        """x + x* = 2a + b m."""
        return 2 * self.a + self.b * self.m

    def norm(self) -> int:
        """x * x* = a^2 + a b m - b^2."""
        return self.a * self.a + self.a * self.b * self.m - self.b * self.b

    def sign(self) -> int:
        return sign_of(self.a, self.b, self.m)

    def __float__(self) -> float:
        # avoid cancellation when a and b*lambda nearly cancel: use the norm
        lam = lambda_value(self.m)
        value = self.a + self.b * lam
        if self.a and self.b and abs(value) < 1e-6 * (abs(self.a) + abs(self.b * lam)):
            conj = self.a + self.b * lambda_conjugate(self.m)
            if conj != 0:
                return self.norm() / conj
        return value

    def __eq__(self, other):
        if isinstance(other, int):
            return self.b == 0 and self.a == other
        if isinstance(other, QuadInt):
            return (self.a, self.b, self.m) == (other.a, other.b, other.m)
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.m))

    def __lt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).sign() < 0

    def __repr__(self):
        return f"QuadInt({self.a}, {self.b}, m={self.m})"

    def __str__(self):
        return f"{self.a}{self.b:+d}λ{self.m}"


def quad_add(x: QuadInt, y: QuadInt) -> QuadInt:
    return x + y


def quad_mul(x: QuadInt, y: QuadInt) -> QuadInt:
    return x * y


def star(x: QuadInt | int) -> QuadInt | int:
    if isinstance(x, int):
        return x
    return x.star()


def lambda_power(m: int, n: int) -> QuadInt:
    """lambda_m**n for n >= 0 as ``c + d*lambda``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    c, d = 1, 0
    for _ in range(n):
        # (c + d L) L = d + (c + m d) L
        c, d = d, c + m * d
    return QuadInt(c, d, m)


@dataclass(frozen=True, slots=True)
class FourierModulePoint:
    """A frequency ``numerator / sqrt(m^2 + 4)`` with ``numerator`` in Z[lambda_m].

    The star map acts on the numerator only, so ``k * x - k_star * x_star`` is
    an integer for every x in Z[lambda_m].  With that pairing the deterministic
    model-set amplitudes take the closed form used in ``diffraction``.
    """

    numerator: QuadInt

    @classmethod
    def from_coefficients(cls, a: int, b: int, m: int) -> FourierModulePoint:
        return cls(QuadInt(a, b, m))

    @property
    def m(self) -> int:
        return self.numerator.m

    def __float__(self) -> float:
        return float(self.numerator) / math.sqrt(discriminant(self.m))

    def star(self) -> FourierModulePoint:
        return FourierModulePoint(self.numerator.star())

    def star_value(self) -> float:
        return float(self.numerator.star()) / math.sqrt(discriminant(self.m))

    def __str__(self):
        return f"({self.numerator})/sqrt({discriminant(self.m)})"


@lru_cache(maxsize=None)
def _fixed_point_constants(m: int, precision: int):
    """Integer approximations (scaled by 2**precision) of lambda, 1/sqrt D, lambda/sqrt D."""
    d = discriminant(m)
    one = 1 << precision
    sqrt_d = math.isqrt(d << (2 * precision))  # floor(sqrt(D) 2^P)
    lam = (m * one + sqrt_d) // 2
    inv_sqrt_d = math.isqrt((1 << (4 * precision)) // d) >> precision  # floor(2^P / sqrt D)
    lam_over_sqrt_d = (m * inv_sqrt_d + one) // 2
    return lam, inv_sqrt_d, lam_over_sqrt_d


def _as_fraction(k) -> Fraction:
    if isinstance(k, Fraction):
        return k
    if isinstance(k, int):
        return Fraction(k)
    if isinstance(k, Rational):
        return Fraction(k.numerator, k.denominator)
    f = float(k)
    if not math.isfinite(f):
        raise ValueError(f"frequency must be finite, got {k!r}")
    return Fraction(f)


def frac_turns(k, x: QuadInt) -> float:
    """Fractional part of ``k * x`` in [0, 1).

    ``k`` may be an int, a Fraction, a float (taken as the exact binary
    rational it stores) or a FourierModulePoint with the same m as ``x``.
    The product is formed in fixed point with 256 fractional bits, so the
    result is correct to double precision as long as the coefficients of
    ``x`` stay below roughly 2**190.
    """
    c, d, m = x.a, x.b, x.m
    if max(abs(c), abs(d)).bit_length() > _PRECISION - 64:
        raise OverflowError("module element too large for the fixed-point phase precision")
    lam, inv_sqrt_d, lam_over_sqrt_d = _fixed_point_constants(m, _PRECISION)
    if isinstance(k, FourierModulePoint):
        if k.m != m:
            raise ValueError(f"mismatched family parameter: m={k.m} vs m={m}")
        z = k.numerator * x
        scaled = z.a * inv_sqrt_d + z.b * lam_over_sqrt_d
        mod = 1 << _PRECISION
    else:
        q = _as_fraction(k)
        scaled = q.numerator * ((c << _PRECISION) + d * lam)
        mod = q.denominator << _PRECISION
    t = (scaled % mod) / mod
    # rounding can land exactly on 1.0
    return 0.0 if t >= 1.0 else t
