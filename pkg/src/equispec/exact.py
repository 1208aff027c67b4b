"""Exact arithmetic: numbers of the form q*sqrt(t) and rational polynomials."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Sequence, Union

__all__ = ["RadicalRational", "RationalPolynomial", "squarefree_split", "as_fraction"]

RationalLike = Union[int, Fraction, str, Rational]


def as_fraction(value) -> Fraction:
    """Exact conversion; floats go through their shortest repr (0.1 -> 1/10)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"cannot represent {value} exactly")
        return Fraction(repr(value))
    return Fraction(value)


@lru_cache(maxsize=None)
def _primes_upto(n: int) -> tuple:
    if n < 2:
        return ()
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return tuple(i for i, v in enumerate(sieve) if v)


def squarefree_split(n: int, prime_bound: int = 1000):
    """Write ``n = s**2 * r`` with ``r`` square-free; returns ``(s, r)``.

    Trial division by primes up to ``prime_bound``; a remaining cofactor is
    absorbed when it is a perfect square. Hermite-basis radicands only carry
    primes up to the largest basis index, so the bound is never limiting there.
    """
    if n < 0:
        raise ValueError("radicand must be non-negative")
    if n == 0:
        return 0, 1
    s, r = 1, 1
    for p in _primes_upto(prime_bound):
        if p * p > n:
            break
        if n % p:
            continue
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            r *= p
    root = math.isqrt(n)
    if root * root == n:
        s *= root
    else:
        r *= n
    return s, r


class RadicalRational:
    """Exact value ``q * sqrt(t)`` with rational ``q`` and canonical radicand.

    The radicand is kept as a square-free positive integer (square factors
    and denominators are absorbed into ``q``); zero is ``q = 0, t = 1``.
    Sums are defined only between equal radicands: mixing two incommensurable
    radicals raises ``ValueError``.
    """

    __slots__ = ("q", "t")

    def __init__(self, q: RationalLike = 0, t: RationalLike = 1, *, _canonical: bool = False):
        q = as_fraction(q)
        if _canonical:
            self.q, self.t = q, t
            return
        t = as_fraction(t)
        if t < 0:
            raise ValueError(f"negative radicand {t}")
        if q == 0 or t == 0:
            self.q, self.t = Fraction(0), 1
            return
        # sqrt(a/b) = sqrt(a*b)/b
        num = t.numerator * t.denominator
        s, r = squarefree_split(num)
        self.q = q * Fraction(s, t.denominator)
        self.t = r

    @classmethod
    def sqrt(cls, value: RationalLike) -> "RadicalRational":
        return cls(1, value)

    @classmethod
    def rational(cls, value: RationalLike) -> "RadicalRational":
        return cls(value, 1)

    def is_zero(self) -> bool:
        return self.q == 0

    def is_rational(self) -> bool:
        return self.q == 0 or self.t == 1

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return self.q

    def __float__(self) -> float:
        return float(self.q) * math.sqrt(self.t)

    def __mul__(self, other):
        if isinstance(other, RadicalRational):
            if self.q == 0 or other.q == 0:
                return RadicalRational()
            g = math.gcd(self.t, other.t)
            return RadicalRational(
                self.q * other.q * g, (self.t // g) * (other.t // g), _canonical=True
            )
        other = as_fraction(other)
        if other == 0 or self.q == 0:
            return RadicalRational()
        return RadicalRational(self.q * other, self.t, _canonical=True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, RadicalRational):
            if other.q == 0:
                raise ZeroDivisionError("division by zero radical")
            # 1/(q sqrt t) = sqrt(t) / (q t)
            inv = RadicalRational(1 / (other.q * other.t), other.t, _canonical=True)
            return self * inv
        return self * (1 / as_fraction(other))

    def __neg__(self):
        return RadicalRational(-self.q, self.t, _canonical=True)

    def __add__(self, other):
        if not isinstance(other, RadicalRational):
            other = RadicalRational(as_fraction(other), 1, _canonical=True)
        if other.q == 0:
            return self
        if self.q == 0:
            return other
        if self.t != other.t:
            raise ValueError(f"cannot add incommensurable radicals {self} and {other}")
        q = self.q + other.q
        return RadicalRational(q, self.t if q else 1, _canonical=True)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, RadicalRational):
            other = RadicalRational(as_fraction(other), 1, _canonical=True)
        return self + (-other)

    def __eq__(self, other):
        if isinstance(other, RadicalRational):
            return self.q == other.q and (self.q == 0 or self.t == other.t)
        try:
            f = as_fraction(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.is_rational() and self.q == f

    def __hash__(self):
        return hash((self.q, self.t if self.q else 1))

    def __repr__(self):
        return f"RadicalRational({self.q!s}, {self.t})"

    def __str__(self):
        if self.q == 0:
            return "0"
        if self.t == 1:
            return str(self.q)
        return f"{self.q}*sqrt({self.t})"

    def format(self, radicand: Fraction | None = None) -> str:
        """Render as ``p/q*sqrt(r/s)``; with ``radicand`` given, the radical
        part is expressed relative to it (``self = c * sqrt(radicand)``)."""
        if radicand is None:
            return str(self)
        base = RadicalRational.sqrt(radicand)
        if base.q == 0:
            raise ValueError("radicand must be positive")
        c = self / base
        if not c.is_rational():
            raise ValueError(f"{self} is not a rational multiple of sqrt({radicand})")
        if c.q == 0:
            return "0"
        r = as_fraction(radicand)
        return f"{c.q}*sqrt({r})" if r != 1 else str(c.q)


class RationalPolynomial:
    """Polynomial with exact rational coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[RationalLike] = ()):
        c = [as_fraction(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial has degree -1."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x):
        acc = Fraction(0) if isinstance(x, (int, Fraction)) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + (c if isinstance(acc, Fraction) else float(c))
        return acc

    def derivative(self) -> "RationalPolynomial":
        return RationalPolynomial(i * c for i, c in enumerate(self.coeffs) if i)

    def __add__(self, other):
        if not isinstance(other, RationalPolynomial):
            other = RationalPolynomial([other])
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return RationalPolynomial(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        if not isinstance(other, RationalPolynomial):
            other = RationalPolynomial([other])
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, RationalPolynomial):
            f = as_fraction(other)
            return RationalPolynomial(c * f for c in self.coeffs)
        if self.is_zero() or other.is_zero():
            return RationalPolynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RationalPolynomial(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, RationalPolynomial):
            return self.coeffs == other.coeffs
        try:
            return self.coeffs == RationalPolynomial([other]).coeffs
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"RationalPolynomial([{', '.join(str(c) for c in self.coeffs)}])"

    def __str__(self):
        return self.format("k")

    def format(self, var: str = "k") -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            if i == 0:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            elif c == -1:
                terms.append(f"-{mono}")
            else:
                terms.append(f"{c}*{mono}")
        return " + ".join(terms).replace("+ -", "- ")

    @classmethod
    def monomial(cls, degree: int, coeff: RationalLike = 1) -> "RationalPolynomial":
        return cls([0] * degree + [coeff])

    @classmethod
    def interpolate(cls, xs: Sequence[RationalLike], ys: Sequence[RationalLike]) -> "RationalPolynomial":
        """Exact interpolating polynomial through ``(xs[i], ys[i])``
        (Newton divided differences, expanded to monomial form)."""
        xs = [as_fraction(x) for x in xs]
        ys = [as_fraction(y) for y in ys]
        if len(xs) != len(ys) or not xs:
            raise ValueError("need equally many, and at least one, abscissae and ordinates")
        if len(set(xs)) != len(xs):
            raise ValueError("abscissae must be distinct")
        n = len(xs)
        table = list(ys)
        newton = [table[0]]
        for level in range(1, n):
            table = [
                (table[i + 1] - table[i]) / (xs[i + level] - xs[i]) for i in range(n - level)
            ]
            newton.append(table[0])
        poly = cls([newton[-1]])
        for i in range(n - 2, -1, -1):
            poly = poly * cls([-xs[i], 1]) + newton[i]
        return poly
