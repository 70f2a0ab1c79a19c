"""Exact scalar fields: prime fields F_p and the rationals.

Elements are plain Python values: ``int`` in ``[0, p)`` for F_p and
``fractions.Fraction`` for Q. A field object coerces inputs and supplies the
few operations the linear algebra needs (``reduce``, ``inv``).
"""

from dataclasses import dataclass
from fractions import Fraction
import re

from .errors import InputError


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    # deterministic Miller-Rabin for n < 3.3e24
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def parse_rational(value) -> Fraction:
    """Parse ints, Fractions or strings such as ``"-3"`` and ``"7/2"``."""
    if isinstance(value, bool):
        raise InputError(f"not a number: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(f"not a rational: {value!r}") from None
    raise InputError(f"not an exact number: {value!r}")


@dataclass(frozen=True)
class PrimeField:
    p: int

    is_finite = True

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise InputError(f"{self.p} is not prime")
        if self.p >= 2**31:
            raise InputError(f"prime {self.p} exceeds 2^31")

    def __call__(self, x) -> int:
        if isinstance(x, bool):
            raise InputError(f"not a field element: {x!r}")
        if isinstance(x, int):
            return x % self.p
        if isinstance(x, Fraction):
            if x.denominator != 1:
                raise InputError(f"mixed fields: rational {x} used in F_{self.p}")
            return x.numerator % self.p
        if isinstance(x, str) and re.fullmatch(r"\s*[+-]?\d+\s*", x):
            return int(x) % self.p
        raise InputError(f"not an element of F_{self.p}: {x!r}")

    def reduce(self, x: int) -> int:
        return x % self.p

    def inv(self, x: int) -> int:
        if x % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(x, -1, self.p)

    @property
    def characteristic(self) -> int:
        return self.p

    def elements(self):
        return range(self.p)

    def __str__(self):
        return f"F{self.p}"


@dataclass(frozen=True)
class RationalField:
    is_finite = False

    def __call__(self, x) -> Fraction:
        return parse_rational(x)

    def reduce(self, x):
        return x

    def inv(self, x: Fraction) -> Fraction:
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(x)

    @property
    def characteristic(self) -> int:
        return 0

    def elements(self):
        raise TypeError("Q is infinite")

    def __str__(self):
        return "Q"


QQ = RationalField()


def GF(p: int) -> PrimeField:
    return PrimeField(p)


def parse_field(desc):
    """Field from a descriptor: ``"Q"``, ``"F5"``, ``"Fp:5"`` or ``{"type": "Fp", "p": 5}``."""
    if isinstance(desc, (PrimeField, RationalField)):
        return desc
    if isinstance(desc, dict):
        kind = desc.get("type")
        if kind == "Q":
            return QQ
        if kind == "Fp":
            p = desc.get("p")
            if not isinstance(p, int):
                raise InputError(f"field prime must be an integer, got {p!r}")
            return PrimeField(p)
        raise InputError(f"unknown field type {kind!r}")
    if isinstance(desc, str):
        s = desc.strip()
        if s in ("Q", "QQ"):
            return QQ
        m = re.fullmatch(r"F(?:p:)?_?(\d+)", s)
        if m:
            return PrimeField(int(m.group(1)))
    raise InputError(f"unknown field descriptor {desc!r}")


def field_descriptor(field) -> str:
    return str(field)
