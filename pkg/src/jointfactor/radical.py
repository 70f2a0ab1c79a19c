"""Exact positive real roots of rationals, ``radicand ** (1/degree)``.

Values are kept in a canonical form (smallest possible degree), so equal
numbers compare and hash equal. Ordering is decided exactly by raising both
sides to a common integer power.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

from .errors import InputError


def iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a nonnegative integer."""
    if n < 0:
        raise ValueError("negative radicand")
    if n < 2 or k == 1:
        return n
    x = 1 << -(-n.bit_length() // k)  # upper bound
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def exact_root(q: Fraction, k: int):
    """The rational k-th root of ``q`` if it exists, else None."""
    a, b = q.numerator, q.denominator
    ra, rb = iroot(a, k), iroot(b, k)
    if ra**k == a and rb**k == b:
        return Fraction(ra, rb)
    return None


def _prime_factors(n: int):
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


@dataclass(frozen=True)
class Radical:
    """The nonnegative real ``radicand ** (1/degree)``."""

    radicand: Fraction
    degree: int = 1

    def __post_init__(self):
        r = Fraction(self.radicand)
        if r < 0:
            raise InputError(f"negative radicand {r}")
        if not isinstance(self.degree, int) or self.degree < 1:
            raise InputError(f"degree must be a positive integer, got {self.degree!r}")
        deg = self.degree
        if r in (0, 1):
            deg = 1
        else:
            changed = True
            while changed and deg > 1:
                changed = False
                for q in _prime_factors(deg):
                    root = exact_root(r, q)
                    if root is not None:
                        r, deg = root, deg // q
                        changed = True
                        break
        object.__setattr__(self, "radicand", r)
        object.__setattr__(self, "degree", deg)

    @classmethod
    def from_power(cls, base, num: int, den: int):
        """``base ** (num/den)`` for rational ``base > 0`` (or 0 with num > 0)."""
        base = Fraction(base)
        if den < 1:
            raise InputError("exponent denominator must be positive")
        if num < 0:
            if base == 0:
                raise ZeroDivisionError("zero to a negative power")
            return cls(1 / base ** (-num), den)
        return cls(base**num, den)

    def is_zero(self) -> bool:
        return self.radicand == 0

    def is_rational(self) -> bool:
        return self.degree == 1

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Radical(Fraction(other))
        if not isinstance(other, Radical):
            return NotImplemented
        m = math.lcm(self.degree, other.degree)
        return Radical(
            self.radicand ** (m // self.degree) * other.radicand ** (m // other.degree), m
        )

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.inverse() ** (-e)
        return Radical(self.radicand**e, self.degree)

    def inverse(self):
        if self.radicand == 0:
            raise ZeroDivisionError("inverse of zero")
        return Radical(1 / self.radicand, self.degree)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Radical(Fraction(other))
        return self * other.inverse()

    def _cmp(self, other) -> int:
        if isinstance(other, (int, Fraction)):
            if other < 0:
                return 1
            other = Radical(Fraction(other))
        m = math.lcm(self.degree, other.degree)
        a = self.radicand ** (m // self.degree)
        b = other.radicand ** (m // other.degree)
        return (a > b) - (a < b)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __float__(self):
        if self.radicand == 0:
            return 0.0
        # logs avoid overflow for huge radicands
        r = self.radicand
        log = (math.log(r.numerator) - math.log(r.denominator)) / self.degree
        return math.exp(log)

    def to_json(self):
        r = self.radicand
        text = str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"
        return {"radicand": text, "num": 1, "den": self.degree}

    @classmethod
    def from_json(cls, obj):
        try:
            base = Fraction(obj["radicand"])
            num, den = int(obj["num"]), int(obj["den"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad root expression {obj!r}") from exc
        return cls.from_power(base, num, den)

    def __str__(self):
        if self.degree == 1:
            return str(self.radicand)
        return f"({self.radicand})^(1/{self.degree})"
