from fractions import Fraction
import math
import random

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

import oracles
from jointfactor.barrier import GPProblem, solve_gp
from jointfactor.duality import (
    DiscreteInstance, FactorTables, achieved_value, diag_offdiag_constants, dual_value,
    expand_tables, feasibility_violations, inner_lower_bound, inner_min, minimax_gap,
    primal_solve, reduce_to_q1, symmetrize_tables,
)
from jointfactor.errors import ConvergenceError, InputError, SaturationError
from jointfactor.generators import random_instance


def three_axes():
    return DiscreteInstance(3, ["0"], {"0": 1}, ["a", "b", "c"], {"a": 1, "b": 1, "c": 1},
                            {("0", ("a", "b", "c")): 1}, symmetric=True)


def offdiag_ones(multilinear=True):
    kernel = {("0", (1, 2)): 1, ("0", (2, 1)): 1}
    if multilinear:
        return DiscreteInstance(2, ["0"], {"0": 1}, [[1, 2], [1, 2]], [{1: 1, 2: 1}] * 2, kernel)
    return DiscreteInstance(2, ["0"], {"0": 1}, [1, 2], {1: 1, 2: 1}, kernel, symmetric=True)


# ------------------------------------------------------------------ barrier


def test_barrier_two_variable_gp():
    # min max(e^u1, e^u2) s.t. u1 + u2 >= 0: optimum 1 at u = 0
    prob = GPProblem(2, [(np.array([0]), np.zeros(1)), (np.array([1]), np.zeros(1))],
                     sp.csr_matrix(np.array([[1.0, 1.0]])), np.array([0.0]))
    res = solve_gp(prob)
    assert abs(res.upper - 1) < 1e-8
    assert all(lo <= up for lo, up in res.history)
    assert res.lower <= 1 + 1e-12


def test_barrier_reports_bounds_when_stopped_early():
    prob = GPProblem(2, [(np.array([0, 1]), np.zeros(2))],
                     sp.csr_matrix(np.array([[1.0, 1.0]])), np.array([3.0]))
    with pytest.raises(ConvergenceError) as info:
        solve_gp(prob, tol=1e-12, accept=1e-14, max_outer=1)
    assert info.value.lower <= info.value.upper


# ------------------------------------------------------------ closed forms


def test_three_axes_primal_is_one_with_all_ones_table():
    tables, report = primal_solve(three_axes())
    assert tables.value == 1
    assert all(v == 1 for v in tables.tables[0].values())
    assert abs(report.primal - 1) < 1e-8


def test_three_axes_inner_and_dual():
    inst = three_axes()
    r = inner_min(inst, "0", {"a": 1, "b": 1, "c": 1})
    assert abs(r.value - 3) < 1e-6
    d = dual_value(inst)
    assert abs(d.value - 1) < 1e-6
    for v in d.f[0].values():
        assert abs(v - 1 / 3) < 1e-4
    assert minimax_gap(inst) < 1e-6


def test_offdiag_inner_value_four():
    inst = offdiag_ones()
    f = [{1: 1, 2: 1}, {1: 1, 2: 1}]
    r = inner_min(inst, "0", f)
    assert abs(r.value - 4) < 1e-6
    assert abs(inner_lower_bound(inst, "0", f) - 2 * math.sqrt(2)) < 1e-12


def test_zero_kernel_and_zero_density():
    inst = DiscreteInstance(2, ["0"], {"0": 1}, [[1], [1]], [{1: 1}, {1: 1}], {}, M={"0": 0})
    tables, report = primal_solve(inst)
    assert tables.value == 0 and report.primal == 0
    assert dual_value(inst).value == 0
    assert inner_min(inst, "0", [{1: 1}, {1: 1}]).value == 0


def test_saturation_violation():
    inst = DiscreteInstance(2, ["0"], {"0": 1}, [[1], [1]], [{1: 1}, {1: 1}], {}, M={"0": 1})
    with pytest.raises(SaturationError, match="saturation violated"):
        primal_solve(inst)


def test_invalid_instances():
    with pytest.raises(InputError, match="mu must be positive"):
        DiscreteInstance(1, ["0"], {"0": 0}, [[1]], [{1: 1}], {})
    with pytest.raises(InputError, match="negative kernel"):
        DiscreteInstance(1, ["0"], {"0": 1}, [[1]], [{1: 1}], {("0", (1,)): -1})
    with pytest.raises(InputError, match="asymmetric kernel"):
        DiscreteInstance(2, ["0"], {"0": 1}, [1, 2], {1: 1, 2: 1},
                         {("0", (1, 2)): 1, ("0", (2, 1)): 2}, symmetric=True)
    inst = DiscreteInstance(1, ["0"], {"0": 1}, [[1]], [{1: 1}], {("0", (1,)): 1}, q=2)
    with pytest.raises(InputError, match="q = 1"):
        primal_solve(inst)


def test_grid_joints_instance_value_two():
    # the 2x2x2 grid joints kernel, M = 1: all-ones is feasible with line sums 2
    from jointfactor.fields import GF
    from jointfactor.generators import grid_family, grid_points
    from jointfactor.geometry import line_contains

    F = GF(5)
    lines = grid_family(2, 3, F).distinct()
    pts = grid_points(2, 3, F)
    kernel = {}
    for x in pts:
        through = sorted(l for l in lines if line_contains(l, x))
        kernel[(x, tuple(through))] = 1
    inst = DiscreteInstance(3, pts, {x: 1 for x in pts}, lines, {l: 1 for l in lines}, kernel,
                            symmetric=True)
    tables, report = primal_solve(inst)
    assert report.primal <= 2 + 1e-6
    assert tables.value <= 2 + 1e-6
    ones = FactorTables(3, True, [{(x, l): 1 for x in pts for l in lines if line_contains(l, x)}])
    assert not feasibility_violations(inst, ones)
    assert achieved_value(inst, ones) == 2


# --------------------------------------------------------- random suites


@pytest.mark.parametrize("seed", range(6))
def test_primal_matches_conic_model(seed):
    inst = random_instance(seed, 2 + seed % 2, 3, 3, symmetric=bool(seed % 3 == 0))
    tables, report = primal_solve(inst)
    ref = oracles.gp_primal_value(inst)
    assert abs(report.primal - ref) <= 1e-5 * ref
    assert not feasibility_violations(inst, tables)
    assert float(tables.value) >= report.lower_bound * (1 - 1e-9)


@pytest.mark.parametrize("seed", range(6))
def test_inner_min_matches_conic_model(seed):
    inst = random_instance(100 + seed, 2 + seed % 2, 2, 3, symmetric=bool(seed % 2))
    rng = random.Random(seed)
    f = [{y: rng.uniform(0.1, 2) for y in Yj} for Yj in inst.Y]
    for x in inst.X:
        r = inner_min(inst, x, f)
        ref = oracles.inner_value_cvx(inst, x, f)
        assert abs(r.value - ref) <= 1e-5 * max(1, ref)
        assert r.lower <= r.value
        assert r.value >= inner_lower_bound(inst, x, f) - 1e-8


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_inner_min_concave_in_f(seed):
    inst = random_instance(seed, 2, 2, 3)
    rng = random.Random(seed)
    f = [{y: rng.uniform(0.1, 2) for y in Yj} for Yj in inst.Y]
    g = [{y: rng.uniform(0.1, 2) for y in Yj} for Yj in inst.Y]
    mid = [{y: (a[y] + b[y]) / 2 for y in a} for a, b in zip(f, g)]
    for x in inst.X:
        vals = [inner_min(inst, x, h).value for h in (f, g, mid)]
        assert vals[2] >= (vals[0] + vals[1]) / 2 - 1e-8


def test_mu_scaling_is_homogeneous():
    inst = random_instance(5, 2, 3, 3)
    a = primal_solve(inst)[1].primal
    b = primal_solve(inst.scaled_mu(3))[1].primal
    assert abs(b - 3 * a) <= 1e-7 * b


@pytest.mark.parametrize("seed", range(4))
def test_tables_give_norm_bound(seed):
    """Feasible tables with value V bound ||T(f)^(1/d)||_1 by V prod ||f_j||^(1/d)."""
    inst = random_instance(200 + seed, 2, 3, 3)
    tables, _ = primal_solve(inst)
    V = float(tables.value)
    rng = random.Random(seed)
    for _ in range(5):
        f = [{y: rng.uniform(0, 3) for y in Yj} for Yj in inst.Y]
        lhs = 0.0
        for x in inst.X:
            T = sum(float(v) * math.prod(f[j][y] for j, y in enumerate(ys)) for ys, v in inst.kernel[x].items())
            lhs += float(inst.mu[x] * inst.M[x]) * T ** (1 / inst.d)
        norms = [sum(float(inst.w[j][y]) * f[j][y] for y in inst.Y[j]) for j in range(inst.d)]
        assert lhs <= V * math.prod(norms) ** (1 / inst.d) * (1 + 1e-9)


# -------------------------------------------------------------- reductions


def test_reduce_q1_identity_and_scaling():
    inst = random_instance(1, 2, 2, 2, random_density=False)
    same = reduce_to_q1(inst)
    assert same.mu == inst.mu and all(m == 1 for m in same.M.values())
    two = DiscreteInstance(1, ["a", "b"], {"a": 1, "b": 2}, [[1]], [{1: 1}],
                           {("a", (1,)): 1, ("b", (1,)): 1}, M={"a": 3, "b": 4}, q=Fraction(3, 2))
    red = reduce_to_q1(two)
    # q' = 3: ||M||_3 = (27 + 2 * 64)^(1/3), irrational, so a rational stand-in is used
    scale = red.norm_used
    assert red.mu == {"a": 3 / scale, "b": 8 / scale}
    tables, _ = primal_solve(red)
    back = expand_tables(two, red, tables)
    assert not feasibility_violations(two, back)
    assert back.value == scale * tables.value


def test_reduce_vacuous():
    inst = DiscreteInstance(1, ["a"], {"a": 1}, [[1]], [{1: 1}], {("a", (1,)): 1}, M={"a": 0}, q=2)
    with pytest.raises(InputError, match="vacuous"):
        reduce_to_q1(inst)


def test_symmetrize_pointwise_geometric_mean():
    inst = offdiag_ones()
    t = FactorTables(2, False, [{("0", 1): 4, ("0", 2): 4}, {("0", 1): 1, ("0", 2): 1}])
    sym = symmetrize_tables(inst, t)
    assert sym.tables[0] == {("0", 1): 2, ("0", 2): 2}
    same = FactorTables(2, False, [{("0", 1): 3, ("0", 2): Fraction(1, 3)}] * 2)
    assert symmetrize_tables(inst, same).tables[0] == {("0", 1): 3, ("0", 2): Fraction(1, 3)}


def test_symmetrize_rejects_asymmetric():
    inst = DiscreteInstance(2, ["0"], {"0": 1}, [[1, 2], [1, 2]], [{1: 1, 2: 1}] * 2, {("0", (1, 2)): 1})
    tables, _ = primal_solve(inst)
    with pytest.raises(InputError, match="asymmetric"):
        symmetrize_tables(inst, tables)


@pytest.mark.parametrize("seed", range(5))
def test_symmetrize_random(seed):
    inst = random_instance(300 + seed, 2, 2, 3, symmetric=True).as_multilinear()
    tables, _ = primal_solve(inst)
    sym = symmetrize_tables(inst, tables)
    assert not feasibility_violations(inst, sym)
    assert sym.value <= tables.value * (1 + Fraction(1, 10**10))


# ------------------------------------------------------------ diag/offdiag


def test_offdiag_ones_constants():
    r = diag_offdiag_constants(offdiag_ones(multilinear=False))
    assert abs(r.diag_constant - 0.5) < 1e-6
    assert abs(r.offdiag_constant - 1) < 1e-6


def test_diagonal_kernel_constants():
    inst = DiscreteInstance(2, ["0"], {"0": 1}, [1, 2], {1: 1, 2: 1}, {("0", (1, 1)): 1}, symmetric=True)
    r = diag_offdiag_constants(inst)
    assert abs(r.diag_constant - 1) < 1e-6
    assert abs(r.offdiag_constant - 1) < 1e-6


def test_diag_offdiag_needs_unit_density():
    inst = random_instance(2, 2, 2, 2, symmetric=True)
    inst = inst._replace(M={x: 2 for x in inst.X})
    with pytest.raises(InputError, match="M = 1"):
        diag_offdiag_constants(inst)
