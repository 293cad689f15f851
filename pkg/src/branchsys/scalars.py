"""Exact scalars used as operator weights.

A :class:`Scalar` is ``r * sqrt(q) * exp(2*pi*i*phase)`` with ``r`` a
non-negative rational, ``q`` a square-free positive integer and ``phase`` a
rational in ``[0, 1)``.  The set is closed under multiplication, conjugation
and inversion, which is all that the normal forms of ``S_mu S_nu*`` words
ever need.  Equality is structural and therefore exact.

A :class:`Monomial` is a scalar times ``t**k`` with rational ``k``; it models
the Radon-Nikodym densities of power maps and the weights of the operators
they induce.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction]


def square_split(n: int) -> tuple[int, int]:
    """Return ``(s, q)`` with ``n == s*s*q`` and ``q`` square-free."""
    if n <= 0:
        raise ValueError(f"square_split needs a positive integer, got {n}")
    s, q = 1, 1
    p = 2
    while p * p <= n:
        mult = 0
        while n % p == 0:
            n //= p
            mult += 1
        s *= p ** (mult // 2)
        if mult % 2:
            q *= p
        p += 1 if p == 2 else 2
    return s, q * n


@dataclass(frozen=True, slots=True)
class Scalar:
    mag: Fraction = Fraction(1)
    rad: int = 1
    phase: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        mag = self.mag if type(self.mag) is Fraction else Fraction(self.mag)
        if mag < 0:
            raise ValueError("magnitude must be non-negative; use the phase for signs")
        if self.rad < 1:
            raise ValueError("radicand must be a positive integer")
        rad = self.rad
        if rad == 1:
            q = 1
        else:
            s, q = square_split(rad)
            mag *= s
        phase = self.phase if type(self.phase) is Fraction else Fraction(self.phase)
        if not 0 <= phase < 1:
            phase %= 1
        if mag == 0:
            q, phase = 1, Fraction(0)
        object.__setattr__(self, "mag", mag)
        object.__setattr__(self, "rad", q)
        object.__setattr__(self, "phase", phase)

    # constructors -------------------------------------------------------

    @classmethod
    def rational(cls, r: Rational) -> "Scalar":
        r = Fraction(r)
        return cls(abs(r), 1, Fraction(0) if r >= 0 else Fraction(1, 2))

    @classmethod
    def root_of_unity(cls, k: int, n: int) -> "Scalar":
        """``exp(2*pi*i*k/n)``."""
        return cls(Fraction(1), 1, Fraction(k, n))

    @classmethod
    def sqrt(cls, r: Rational) -> "Scalar":
        """Exact square root of a non-negative rational."""
        r = Fraction(r)
        if r < 0:
            raise ValueError("square root of a negative rational")
        if r == 0:
            return ZERO
        # sqrt(a/b) = sqrt(a*b) / b
        s, q = square_split(r.numerator * r.denominator)
        return cls(Fraction(s, r.denominator), q)

    # algebra ------------------------------------------------------------

    def __mul__(self, other: "Scalar") -> "Scalar":
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction)):
                other = Scalar.rational(other)
            else:
                return NotImplemented
        if other == ONE:
            return self
        if self == ONE:
            return other
        g = math.gcd(self.rad, other.rad)
        return Scalar(
            self.mag * other.mag * g,
            (self.rad // g) * (other.rad // g),
            self.phase + other.phase,
        )

    __rmul__ = __mul__

    def conj(self) -> "Scalar":
        if self.phase == 0:
            return self
        return Scalar(self.mag, self.rad, -self.phase)

    def inverse(self) -> "Scalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero scalar")
        # 1/(r sqrt q) = sqrt(q) / (r q)
        return Scalar(1 / (self.mag * self.rad), self.rad, -self.phase)

    def is_zero(self) -> bool:
        return self.mag == 0

    def is_one(self) -> bool:
        return self == ONE

    def is_unimodular(self) -> bool:
        return self.mag == 1 and self.rad == 1

    def __complex__(self) -> complex:
        return float(self.mag) * math.sqrt(self.rad) * cmath.exp(2j * math.pi * float(self.phase))

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        if self.mag != 1 or self.rad == 1:
            parts.append(str(self.mag))
        if self.rad != 1:
            parts.append(f"sqrt({self.rad})")
        body = "*".join(parts)
        if self.phase == Fraction(1, 2):
            return "-" + body
        if self.phase:
            return f"{body}*exp(2pi i {self.phase})"
        return body

    def to_json(self) -> list:
        return [
            [self.mag.numerator, self.mag.denominator],
            self.rad,
            [self.phase.numerator, self.phase.denominator],
        ]

    @classmethod
    def from_json(cls, data: list) -> "Scalar":
        mag, rad, phase = data
        return cls(Fraction(*mag), int(rad), Fraction(*phase))


ONE = Scalar()
ZERO = Scalar(Fraction(0))


@dataclass(frozen=True, slots=True)
class Monomial:
    """``coeff * t**exp`` on the local coordinate ``t`` of an interval."""

    coeff: Scalar = ONE
    exp: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "exp", Fraction(self.exp))
        if self.coeff.is_zero():
            object.__setattr__(self, "exp", Fraction(0))

    @classmethod
    def constant(cls, c: Rational | Scalar) -> "Monomial":
        if not isinstance(c, Scalar):
            c = Scalar.rational(c)
        return cls(c, Fraction(0))

    def is_constant(self) -> bool:
        return self.exp == 0

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(self.coeff * other.coeff, self.exp + other.exp)

    def conj(self) -> "Monomial":
        return Monomial(self.coeff.conj(), self.exp)

    def substitute_power(self, p: Fraction) -> "Monomial":
        """The monomial ``t -> m(t**p)``."""
        return Monomial(self.coeff, self.exp * p)

    def sqrt(self) -> "Monomial":
        """Square root of a monomial with a positive rational coefficient."""
        c = self.coeff
        if c.rad != 1 or c.phase != 0:
            raise ValueError(f"sqrt only defined for positive rational coefficients, got {c}")
        return Monomial(Scalar.sqrt(c.mag), self.exp / 2)

    def evaluate(self, t: float) -> complex:
        return complex(self.coeff) * float(t) ** float(self.exp)

    def __str__(self) -> str:
        if self.exp == 0:
            return str(self.coeff)
        return f"{self.coeff}*t^{self.exp}"

    def to_json(self) -> dict:
        return {"coeff": self.coeff.to_json(), "exp": [self.exp.numerator, self.exp.denominator]}

    @classmethod
    def from_json(cls, data: dict) -> "Monomial":
        return cls(Scalar.from_json(data["coeff"]), Fraction(*data["exp"]))


UNIT = Monomial()
