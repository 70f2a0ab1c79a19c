from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from jointfactor.errors import InputError
from jointfactor.fields import GF, QQ, is_prime, parse_field, parse_rational


def test_is_prime_small_table():
    primes = [n for n in range(60) if is_prime(n)]
    assert primes == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]


@given(st.integers(2, 5000))
def test_is_prime_matches_trial_division(n):
    assert is_prime(n) == all(n % k for k in range(2, int(n**0.5) + 1))


def test_nonprime_rejected():
    with pytest.raises(InputError, match="not prime"):
        GF(4)
    with pytest.raises(InputError, match="not prime"):
        parse_field("F9")


def test_field_descriptors():
    assert parse_field("F5") == GF(5)
    assert parse_field("Fp:7") == GF(7)
    assert parse_field({"type": "Fp", "p": 3}) == GF(3)
    assert parse_field("Q") is QQ
    with pytest.raises(InputError):
        parse_field("R")


def test_prime_field_arithmetic():
    F = GF(7)
    assert F(-1) == 6
    assert F(Fraction(10)) == 3
    assert F.inv(3) * 3 % 7 == 1
    with pytest.raises(ZeroDivisionError):
        F.inv(0)
    with pytest.raises(InputError, match="mixed fields"):
        F(Fraction(1, 2))


def test_parse_rational():
    assert parse_rational("7/2") == Fraction(7, 2)
    assert parse_rational(" -3 ") == -3
    for bad in ("x", "1/0", 1.5, True):
        with pytest.raises(InputError):
            parse_rational(bad)
