from fractions import Fraction
from itertools import combinations
import random

import pytest

import oracles
from jointfactor.fields import GF, QQ
from jointfactor.factorisation import (
    FactorCertificate, evaluate_g, factorise, line_closure, multijoint_factorise,
    verify_certificate, verify_multi,
)
from jointfactor.generators import grid_family, grid_multifamily, grid_points
from jointfactor.geometry import canonical_line, independent_combinations, line_contains, rank
from jointfactor.joints import LineFamily, MultiFamily, apply_T
from jointfactor.radical import Radical
from jointfactor.serialize import certificate_from_json, certificate_to_json

F5, F7 = GF(5), GF(7)
AXES = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


def _extension_property_holds(lines, field, d):
    dirs = [l.direction for l in lines]
    for k in range(1, d):
        for combo in independent_combinations(dirs, k, field):
            rest = [i for i in range(len(dirs)) if i not in combo]
            if not any(rank([dirs[i] for i in combo + extra], field) == d
                       for extra in combinations(rest, d - k)):
                return False
    return True


# ------------------------------------------------------------------ closure


def test_closure_of_single_point():
    c = line_closure({(0, 0, 0): 1}, 3, F5)
    assert c.L_prime == []
    assert sorted(l.direction for l in c.augment[(0, 0, 0)]) == sorted(AXES)
    assert c.joints == [(0, 0, 0)]


def test_closure_of_two_points():
    p, q = (0, 0, 0), (1, 2, 3)
    c = line_closure({p: 1, q: 2}, 3, F5)
    pq = canonical_line(p, (1, 2, 3), F5)
    assert c.L_prime == [pq]
    assert pq in c.augment[p]
    assert _extension_property_holds(c.augment[p], F5, 3)


def test_collinear_points_share_one_line():
    pts = {(0, 0, 0): 1, (1, 1, 0): 1, (2, 2, 0): 1}
    assert len(line_closure(pts, 3, F5).L_prime) == 1


def test_empty_support():
    c = line_closure({}, 3, F5)
    assert c.lines == [] and c.joints == []
    cert = factorise({(0, 0, 0): 0}, F5, 3)
    assert cert.table == {} and cert.bound == 0


@pytest.mark.parametrize("seed", range(6))
def test_closure_against_point_set_lines(seed):
    rng = random.Random(seed)
    support = {tuple(rng.randrange(5) for _ in range(3)): 1 for _ in range(rng.randint(2, 5))}
    c = line_closure(support, 3, F5)
    every = oracles.all_lines(5, 3)
    rich = {s for s in every if sum(x in s for x in support) >= 2}
    assert {oracles.line_points(l, 5) for l in c.L_prime} == rich
    closure = {oracles.line_points(l, 5) for l in c.lines}
    for s in every - closure:
        assert sum(x in s for x in support) <= 1
    for x in support:
        assert _extension_property_holds(c.augment[x], F5, 3)


# ---------------------------------------------------------------- factorise


def test_point_indicator_certificate():
    cert = factorise({(0, 0, 0): 1}, F5, 3)
    assert set(cert.table.values()) == {1}
    assert cert.constant == Radical(1)
    assert verify_certificate(cert).ok


def test_grid_two_certificate():
    M = {x: 1 for x in grid_points(2, 3, F7)}
    cert = factorise(M, F7, 3)
    assert cert.norm == Radical(2)
    assert float(cert.constant) <= 1.01
    sums = cert.line_sums()
    assert max(sums.values()) <= cert.bound
    assert verify_certificate(cert).ok


def test_evaluate_g_rules():
    cert = factorise({(0, 0, 0): 2, (1, 1, 1): 1}, F5, 3)
    closure_line = cert.lines[0]
    x = next(x for x in cert.M if line_contains(closure_line, x))
    assert evaluate_g(cert, x, closure_line) == cert.table.get((x, closure_line), 0)
    off = canonical_line((0, 0, 0), (1, 2, 4), F5)
    assert not cert.in_closure(off)
    assert evaluate_g(cert, (0, 0, 0), off) == cert.bound
    assert evaluate_g(cert, (1, 1, 1), off) == 0  # the line misses (1, 1, 1)
    assert evaluate_g(cert, (3, 3, 3), off) == 0  # not a support point


def test_lowered_entry_gives_witness():
    cert = factorise({(0, 0, 0): 1, (1, 0, 0): 1}, F5, 3)
    key = sorted(cert.table, key=lambda k: (k[0], k[1]))[0]
    table = dict(cert.table)
    table[key] = table[key] / 4
    bad = FactorCertificate(cert.field, cert.d, cert.M, cert.lines, table, cert.bound,
                            cert.norm_power, cert.mode)
    res = verify_certificate(bad)
    assert not res.ok
    assert res.witness["x"] == key[0]
    assert res.witness["lhs"] > res.witness["rhs"]


def test_mixed_tuple_at_single_point():
    cert = factorise({(0, 0, 0): 3}, F5, 3)
    axis = canonical_line((0, 0, 0), (1, 0, 0), F5)
    s1 = canonical_line((0, 0, 0), (1, 1, 0), F5)
    s2 = canonical_line((0, 0, 0), (1, 2, 3), F5)
    assert not cert.in_closure(s1) and not cert.in_closure(s2)
    prod = evaluate_g(cert, (0, 0, 0), axis) * evaluate_g(cert, (0, 0, 0), s1) * evaluate_g(cert, (0, 0, 0), s2)
    assert prod >= 3**3
    assert verify_certificate(cert).ok


def test_entry_above_bound_is_caught():
    cert = factorise({(0, 0, 0): 1}, F5, 3)
    key = next(iter(cert.table))
    table = dict(cert.table)
    table[key] = cert.bound * 2
    bad = FactorCertificate(cert.field, 3, cert.M, cert.lines, table, cert.bound, cert.norm_power)
    assert verify_certificate(bad).witness["kind"] == "table entry out of range"


@pytest.mark.parametrize("t", [Fraction(3), Fraction(2, 7)])
def test_scale_covariance(t):
    M = {(0, 0, 0): 2, (1, 2, 0): 1, (0, 1, 1): Fraction(1, 2)}
    a = factorise(M, F5, 3)
    b = factorise({x: t * v for x, v in M.items()}, F5, 3)
    assert b.table == {k: t * v for k, v in a.table.items()}
    assert b.bound == t * a.bound
    assert b.constant == a.constant


def test_certificate_json_round_trip():
    cert = factorise({(0, 0, 0): 2, (1, 2, 3): Fraction(1, 3)}, F5, 3)
    again = certificate_from_json(certificate_to_json(cert))
    assert again.table == cert.table
    assert again.bound == cert.bound and again.norm_power == cert.norm_power
    assert again.lines == cert.lines
    assert verify_certificate(again).ok


def test_parallel_verification_agrees():
    cert = factorise({x: 1 for x in grid_points(2, 3, F5)}, F5, 3)
    assert verify_certificate(cert, jobs=2).checked == verify_certificate(cert).checked


@pytest.mark.parametrize("support", [
    {(0, 0, 0): 1},
    {(0, 0, 0): 1, (1, Fraction(1, 2), 0): 2},
    {(0, 0, 0): 1, (1, 0, 0): Fraction(1, 3), (0, 1, 5): 2},
])
def test_certificates_over_Q(support):
    cert = factorise(support, QQ, 3)
    res = verify_certificate(cert)
    assert res.ok, res.witness


def test_certificate_bounds_T():
    """M(x) T(f,f,f)(x)^(1/3) summed over x stays below V * sum f."""
    M = {(0, 0, 0): 1, (1, 1, 0): 2, (1, 0, 0): 1}
    cert = factorise(M, F5, 3)
    fam = LineFamily(F5, 3, cert.lines)
    rng = random.Random(0)
    for _ in range(5):
        f = {l: Fraction(rng.randint(0, 4)) for l in cert.lines}
        T = apply_T([fam] * 3, [f] * 3)
        lhs = sum(float(M[x]) * float(T.get(x, 0)) ** (1 / 3) for x in M)
        assert lhs <= float(cert.bound * sum(f.values())) * (1 + 1e-12)


def test_explicit_family_mode():
    fam = grid_family(2, 3, F5)
    M = {x: 1 for x in grid_points(2, 3, F5)}
    M[(4, 4, 4)] = 5  # not a joint of the family: dropped
    cert = factorise(M, F5, 3, family=fam)
    assert (4, 4, 4) not in cert.M
    assert cert.bound == 2 and cert.constant == Radical(1)
    assert verify_certificate(cert).ok


# --------------------------------------------------------------- multijoints


def test_multijoint_axes_at_origin():
    fams = MultiFamily([LineFamily(F5, 3, [canonical_line((0, 0, 0), e, F5)]) for e in AXES])
    cert = multijoint_factorise({(0, 0, 0): 1}, fams)
    for j, e in enumerate(AXES):
        assert cert.tables[j] == {((0, 0, 0), canonical_line((0, 0, 0), e, F5)): 1}
    assert verify_multi(cert).ok


def test_multijoint_grid_split():
    fams = grid_multifamily(2, 3, F7)
    cert = multijoint_factorise({x: 1 for x in grid_points(2, 3, F7)}, fams)
    res = verify_multi(cert)
    assert res.ok and res.checked > 0
    for table in cert.tables:
        sums = {}
        for (x, l), v in table.items():
            sums[l] = sums.get(l, 0) + v
        assert max(sums.values()) <= cert.bound
