from fractions import Fraction
from itertools import permutations
import math

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from jointfactor.errors import DegenerateError, InputError
from jointfactor.fields import GF, QQ
from jointfactor.generators import planted_heavy_weights, random_weights
from jointfactor.heavy import (
    DirectionWeights, SWeights, alpha, build_S, estimate_constant, find_heavy_chain,
    independent_mass, layer_constant, lightness_audit, lightness_factor, main_estimate_ratio,
    rho_weights, verify_admissibility,
)
from jointfactor.radical import Radical

F7 = GF(7)


def thirty_one(field=F7):
    return DirectionWeights(field, 3, {(1, 0, 0): 10, (0, 1, 0): 10, (1, 1, 0): 10, (0, 0, 1): 1})


def test_alpha():
    assert [alpha(k) for k in (1, 2, 3, 4)] == [1, 2, 4, 8]


def test_thirty_one_chain():
    chain = find_heavy_chain(thirty_one())
    assert chain.dims == [2]
    assert chain.layer_masses == [30, 1]
    assert chain.subspaces[0].contains((1, 1, 0))
    assert not chain.subspaces[0].contains((0, 0, 1))


def test_thirty_one_rho_and_S():
    f = thirty_one()
    S = build_S(f)
    assert S.rho == [Radical.from_power(30, -1, 3), Radical.from_power(30, 2, 3)]
    by_dir = {l.direction: v for l, v in S.values.items()}
    assert by_dir[(0, 0, 1)] == Radical(900, 3)
    assert by_dir[(1, 1, 0)] == Radical(Fraction(1, 30), 3)
    assert S.worst_product() == Radical(1)
    assert verify_admissibility(S, f).ok


def test_thirty_one_ratio_matches_hand_count():
    f = thirty_one()
    # 18 ordered independent triples, each with product 10*10*1
    assert independent_mass(f) == 1800
    expected = 2 * 30 ** (2 / 3) / 1800 ** (1 / 3)
    assert abs(main_estimate_ratio(build_S(f), f) - expected) < 1e-12
    assert abs(expected - 2 ** (2 / 3)) < 1e-12


def test_unit_axes_ratio():
    f = DirectionWeights(F7, 3, {(1, 0, 0): 1, (0, 1, 0): 1, (0, 0, 1): 1})
    S = build_S(f)
    assert S.chain.N == 0
    assert all(v == Radical(1) for v in S.values.values())
    assert abs(main_estimate_ratio(S, f) - 3 / 6 ** (1 / 3)) < 1e-12


def test_halved_rho_gives_witness():
    f = thirty_one()
    S = build_S(f)
    top = S.rho[1] * Radical(Fraction(1, 2))
    values = {l: (top if l.direction == (0, 0, 1) else v) for l, v in S.values.items()}
    bad = SWeights(S.chain, [S.rho[0], top], values)
    res = verify_admissibility(bad, f)
    assert not res.ok
    assert (0, 0, 1) in [l.direction for l in res.witness]


def test_empty_weights_rejected():
    with pytest.raises(InputError, match="empty weight system"):
        find_heavy_chain(DirectionWeights(F7, 3, {}))
    with pytest.raises(InputError, match="negative"):
        DirectionWeights(F7, 3, {(1, 0, 0): -1})


def test_all_in_hyperplane_branch():
    f = DirectionWeights(F7, 3, {(1, 0, 0): 5, (0, 1, 0): 1})
    S = build_S(f)
    assert S.all_in_hyperplane
    assert all(v.is_zero() for v in S.values.values())
    assert verify_admissibility(S, f).ok  # no independent triple at all
    assert main_estimate_ratio(S, f) == 0.0


def test_empty_chain_rho_is_degenerate():
    f = DirectionWeights(F7, 3, {(1, 0, 0): 1, (0, 1, 0): 1, (0, 0, 1): 1})
    with pytest.raises(DegenerateError):
        rho_weights(find_heavy_chain(f))


def test_lemma_constants():
    assert lightness_factor(2) == 3  # alpha_1 (alpha_2 + 1) / (alpha_2 - alpha_1)
    assert lightness_factor(3) == 5
    for k in range(2, 8):
        assert lightness_factor(k) <= 4 * alpha(k - 1)
    assert layer_constant(1, 5) == 1
    assert layer_constant(2, 3) == 1 + 2 * 3
    assert estimate_constant(2) == 2.0
    assert abs(estimate_constant(3) - 3.8258623655) < 1e-9


def test_thirty_one_audit():
    f = thirty_one()
    ledger = lightness_audit(f, find_heavy_chain(f))
    assert ledger.levels[0].lemma_factor == 3
    assert ledger.levels[0].worst_factor == Fraction(1, 2)
    assert ledger.betas == [7, 1]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 5]), st.booleans())
def test_chain_matches_subspace_enumeration(seed, p, planted):
    make = planted_heavy_weights if planted else random_weights
    f = make(seed, GF(p), 3, 8)
    assert oracles.chain_agrees(f, find_heavy_chain(f), p)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([3, 5]))
def test_admissibility_against_root_products(seed, p):
    f = planted_heavy_weights(seed, GF(p), 3, 7)
    S = build_S(f)
    lines = f.lines()
    ok = True
    for tup in permutations(lines, 3):
        if oracles.independent([l.direction for l in tup], p):
            ok &= oracles.root_product_at_least_one(
                [(S.values[l].radicand, S.values[l].degree) for l in tup])
    assert verify_admissibility(S, f).ok == ok
    # independent mass against the ordered brute force
    values = {l.direction: f[l] for l in lines}
    assert independent_mass(f) == oracles.ordered_independent_sum(values, p, 3, values)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.fractions(min_value=Fraction(1, 50), max_value=50))
def test_homogeneity(seed, t):
    f = planted_heavy_weights(seed, GF(5), 3, 7)
    a, b = build_S(f), build_S(f.scaled(t))
    assert a.values == b.values
    assert a.chain.dims == b.chain.dims


def test_chain_over_Q():
    f = DirectionWeights(QQ, 3, {(1, 0, 0): 10, (0, 1, 0): 10, (1, 1, 0): 10, (0, 0, 1): 1})
    S = build_S(f)
    assert S.chain.dims == [2]
    assert verify_admissibility(S, f).ok
    assert math.isclose(main_estimate_ratio(S, f), 2 ** (2 / 3), rel_tol=1e-12)


def test_d4_estimate_within_constant():
    f = planted_heavy_weights(11, GF(3), 4, 9)
    S = build_S(f)
    assert verify_admissibility(S, f).ok
    assert main_estimate_ratio(S, f) <= estimate_constant(4)
    lightness_audit(f, S.chain)
