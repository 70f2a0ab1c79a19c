from fractions import Fraction
import math

from hypothesis import given, strategies as st

from jointfactor.radical import Radical, exact_root, iroot

rationals = st.fractions(min_value=Fraction(1, 1000), max_value=1000)


@given(st.integers(0, 10**30), st.integers(1, 6))
def test_iroot_is_floor(n, k):
    r = iroot(n, k)
    assert r**k <= n < (r + 1) ** k


def test_canonical_form():
    assert Radical(8, 3) == Radical(2)
    assert Radical(Fraction(1, 27), 3).is_rational()
    assert Radical(4, 6) == Radical(2, 3)
    assert exact_root(Fraction(16, 81), 4) == Fraction(2, 3)
    assert exact_root(Fraction(2), 2) is None


@given(rationals, st.integers(1, 4), rationals, st.integers(1, 4))
def test_order_matches_floats(a, j, b, k):
    x, y = Radical(a, j), Radical(b, k)
    fx, fy = float(a) ** (1 / j), float(b) ** (1 / k)
    if abs(fx - fy) > 1e-9 * max(fx, fy):
        assert (x < y) == (fx < fy)


@given(rationals, st.integers(1, 4), rationals, st.integers(1, 4))
def test_product_is_exact(a, j, b, k):
    p = Radical(a, j) * Radical(b, k)
    assert math.isclose(float(p), float(a) ** (1 / j) * float(b) ** (1 / k), rel_tol=1e-12)
    assert (p / Radical(b, k)) == Radical(a, j)


def test_thirty_example_roots():
    small = Radical.from_power(Fraction(30), -1, 3)
    big = Radical.from_power(Fraction(30), 2, 3)
    assert small * small * big == Radical(1)
    assert math.isclose(float(big), 30 ** (2 / 3))


def test_json_round_trip():
    r = Radical(Fraction(7, 3), 5)
    assert Radical.from_json(r.to_json()) == r
