"""Finite discrete duality between factorisation tables and the operator norm.

An instance is a finite point set X (weights mu, density M), index sets
Y_1..Y_d with weighted l1 norms, and a nonnegative kernel K. The primal asks
for tables g_j >= 0 with

    M(x)^d K(x, y_1..y_d) <= g_1(x, y_1) ... g_d(x, y_d)

minimizing ``max_j max_y sum_x mu(x) g_j(x, y) / w_j(y)``. The dual maximizes
``sum_x mu(x) inner_min(x, f)`` over the unit ball of weights f. Both sides
are convex programs in log variables; they are solved by different methods
so that their agreement is a genuine check.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
import math
import warnings

import numpy as np
import scipy.sparse as sp

from .barrier import GPProblem, solve_gp
from .errors import AuditError, ConvergenceError, InputError, SaturationError
from .fields import parse_rational
from .radical import Radical


def _frac(value, what):
    if isinstance(value, float):
        raise InputError(f"{what}: expected an exact number, got float {value!r}")
    return parse_rational(value)


class DiscreteInstance:
    """A finite instance; kernel entries equal to zero are dropped.

    For symmetric instances ``Y`` and ``w`` may be given once; the kernel is
    stored on multisets (tuples sorted by position in Y) and any listed
    ordering must agree.
    """

    def __init__(self, d, X, mu, Y, w, kernel, M=None, q=1, symmetric=False):
        if not isinstance(d, int) or d < 1:
            raise InputError(f"d must be a positive integer, got {d!r}")
        self.d = d
        self.symmetric = bool(symmetric)
        self.X = list(X)
        if len(set(self.X)) != len(self.X):
            raise InputError("duplicate points in X")
        self.mu = {}
        for x in self.X:
            m = _frac(mu[x], f"mu[{x}]")
            if m <= 0:
                raise InputError(f"mu must be positive, got {m}", location=f"mu[{x}]")
            self.mu[x] = m
        if self.symmetric and (not Y or not isinstance(Y[0], (list, tuple))):
            Y, w = [list(Y)] * d, [w] * d
        if len(Y) != d or len(w) != d:
            raise InputError(f"need d={d} index sets and weight maps")
        self.Y = [list(Yj) for Yj in Y]
        self.w = []
        for j, (Yj, wj) in enumerate(zip(self.Y, w)):
            if len(set(Yj)) != len(Yj):
                raise InputError(f"duplicate indices in Y[{j}]")
            row = {}
            for y in Yj:
                v = _frac(wj[y], f"w[{j}][{y}]")
                if v <= 0:
                    raise InputError(f"weights must be positive, got {v}", location=f"w[{j}][{y}]")
                row[y] = v
            self.w.append(row)
        if self.symmetric and any(Yj != self.Y[0] or wj != self.w[0] for Yj, wj in zip(self.Y, self.w)):
            raise InputError("symmetric instance needs equal index sets and weights")
        self.M = {}
        for x in self.X:
            v = _frac(1 if M is None else M.get(x, 0), f"M[{x}]")
            if v < 0:
                raise InputError(f"negative density {v}", location=f"M[{x}]")
            self.M[x] = v
        self.q = _frac(q, "q")
        if self.q < 1:
            raise InputError(f"q must be >= 1, got {self.q}")
        self._pos = [{y: i for i, y in enumerate(Yj)} for Yj in self.Y]
        self.kernel = {x: {} for x in self.X}
        for (x, ys), value in dict(kernel).items():
            if x not in self.mu:
                raise InputError(f"kernel point {x!r} not in X")
            ys = tuple(ys)
            if len(ys) != d:
                raise InputError(f"kernel tuple {ys!r} has length {len(ys)} != {d}")
            for j, y in enumerate(ys):
                if y not in self._pos[j]:
                    raise InputError(f"kernel index {y!r} not in Y[{j}]")
            v = _frac(value, f"K[{x}, {ys}]")
            if v < 0:
                raise InputError(f"negative kernel value {v}", location=f"K[{x}, {ys}]")
            if self.symmetric:
                ys = self._multiset(ys)
                old = self.kernel[x].get(ys)
                if old is not None and old != v:
                    raise InputError(f"asymmetric kernel at {x!r}, {ys!r}")
            if v:
                self.kernel[x][ys] = v

    def _multiset(self, ys):
        return tuple(sorted(ys, key=self._pos[0].__getitem__))

    # ---------------------------------------------------------------- views

    def slots(self):
        """Table slots: one shared slot when symmetric, otherwise d."""
        return [0] if self.symmetric else list(range(self.d))

    def columns(self):
        return [(j, y) for j in self.slots() for y in self.Y[j]]

    def tuples_at(self, x):
        """Positive kernel entries at x as (tuple, value), tuples canonical."""
        return list(self.kernel[x].items())

    def ordered_tuples_at(self, x):
        """Positive kernel entries at x over ordered tuples."""
        if not self.symmetric:
            return list(self.kernel[x].items())
        out = {}
        for ys, v in self.kernel[x].items():
            for perm in set(permutations(ys)):
                out[perm] = v
        return sorted(out.items(), key=lambda kv: [self._pos[0][y] for y in kv[0]])

    def as_multilinear(self):
        """The same operator with d separate slots."""
        if not self.symmetric:
            return self
        kernel = {(x, ys): v for x in self.X for ys, v in self.ordered_tuples_at(x)}
        return DiscreteInstance(self.d, self.X, self.mu, self.Y, self.w, kernel, self.M, self.q)

    def is_symmetric_kernel(self) -> bool:
        if self.symmetric:
            return True
        if any(Yj != self.Y[0] or wj != self.w[0] for Yj, wj in zip(self.Y, self.w)):
            return False
        for x in self.X:
            for ys, v in self.kernel[x].items():
                if any(self.kernel[x].get(p, 0) != v for p in permutations(ys)):
                    return False
        return True

    def scaled_mu(self, t):
        t = Fraction(t)
        mu = {x: t * m for x, m in self.mu.items()}
        return self._replace(mu=mu)

    def _replace(self, **changes):
        args = dict(d=self.d, X=self.X, mu=self.mu, Y=self.Y, w=self.w, M=self.M, q=self.q,
                    symmetric=self.symmetric,
                    kernel={(x, ys): v for x in self.X for ys, v in self.kernel[x].items()})
        args.update(changes)
        return DiscreteInstance(**args)

    def active_points(self):
        """Points that carry constraints; raises on unsaturated weighted points."""
        out = []
        for x in self.X:
            if self.M[x] == 0:
                continue
            if not self.kernel[x]:
                raise SaturationError(f"saturation violated at {x!r}: M(x) > 0 but K(x, .) = 0")
            out.append(x)
        return out

    def __repr__(self):
        kind = "symmetric" if self.symmetric else "multilinear"
        return f"DiscreteInstance(d={self.d}, |X|={len(self.X)}, {kind}, q={self.q})"


# ------------------------------------------------------------------ tables


@dataclass
class FactorTables:
    """Tables g_j(x, y); one shared table when ``symmetric``. Absent entries are 0."""

    d: int
    symmetric: bool
    tables: list
    value: Fraction = None
    exact: bool = True

    def table(self, j):
        return self.tables[0 if self.symmetric else j]

    def g(self, j, x, y):
        return self.table(j).get((x, y), 0)


def achieved_value(inst: DiscreteInstance, tables: FactorTables) -> Fraction:
    """max over slots and indices of sum_x mu(x) g_j(x, y) / w_j(y), exactly."""
    best = Fraction(0)
    for j in inst.slots():
        sums = {}
        for (x, y), v in tables.table(j).items():
            sums[y] = sums.get(y, 0) + inst.mu[x] * v
        for y, s in sums.items():
            best = max(best, s / inst.w[j][y])
    return best


def _required(inst, x, value):
    return inst.M[x] ** inst.d * value


def _product(inst, tables, x, ys):
    p = Fraction(1)
    for j, y in enumerate(ys):
        p *= tables.g(j, x, y)
        if not p:
            return p
    return p


def feasibility_violations(inst: DiscreteInstance, tables: FactorTables, limit=None):
    """Exact list of (x, tuple, required, product) with M^d K > prod g."""
    out = []
    for x in inst.X:
        if inst.M[x] == 0:
            continue
        for ys, v in inst.ordered_tuples_at(x) if not tables.symmetric else inst.tuples_at(x):
            need = _required(inst, x, v)
            have = _product(inst, tables, x, ys)
            if have < need:
                out.append((x, ys, need, have))
                if limit and len(out) >= limit:
                    return out
    return out


def _snap(v: float) -> Fraction:
    """Nearby simple rational when one is within 1e-9 relative, else exact float."""
    exact = Fraction(v)
    simple = exact.limit_denominator(10**6)
    if abs(simple - exact) <= Fraction(1, 10**9) * exact:
        return simple
    return exact


def _root_up(r: Fraction, d: int) -> Fraction:
    """A rational gamma >= r^(1/d), slightly above."""
    gamma = Fraction(float(Radical(r, d)) * (1 + 1e-12))
    while gamma**d < r:
        gamma *= Fraction(1000000001, 1000000000)
    return gamma


def lift_exact(inst: DiscreteInstance, tables: FactorTables) -> FactorTables:
    """Make numerically feasible rational tables exactly feasible.

    Rows of points with a violated constraint are scaled up by the d-th root
    of the worst ratio (rounded up); the loop re-checks exactly.
    """
    rows = [dict(t) for t in tables.tables]
    out = FactorTables(tables.d, tables.symmetric, rows)
    for _ in range(10):
        bad = feasibility_violations(inst, out)
        if not bad:
            break
        worst = {}
        for x, ys, need, have in bad:
            ratio = need / have if have else None
            if ratio is None:
                raise AuditError(f"table vanishes on a required tuple at {x!r}: {ys!r}")
            worst[x] = max(worst.get(x, 0), ratio)
        for x, ratio in worst.items():
            gamma = _root_up(ratio, inst.d)
            for table in rows:
                for key in table:
                    if key[0] == x:
                        table[key] *= gamma
    else:
        raise AuditError("rational lift did not reach exact feasibility")
    out.value = achieved_value(inst, out)
    out.exact = True
    return out


# ---------------------------------------------------------- problem build


def _build(inst, points, row_tuples, log_rhs, column_coef):
    """Assemble a GPProblem.

    ``row_tuples(x)`` lists the (tuple, rhs value) rows at x; ``column_coef``
    maps (x, slot, y) to a log coefficient or None (variable excluded).
    """
    keys, index = [], {}
    rows, cols, vals, b = [], [], [], []
    blocks = []
    r = 0
    for x in points:
        first_var, first_row = len(keys), r
        for ys, value in row_tuples(x):
            counts = {}
            for j, y in enumerate(ys):
                key = (x, 0 if inst.symmetric else j, y)
                counts[key] = counts.get(key, 0) + 1
            for key, c in counts.items():
                if key not in index:
                    index[key] = len(keys)
                    keys.append(key)
                rows.append(r)
                cols.append(index[key])
                vals.append(float(c))
            b.append(log_rhs(x, value))
            r += 1
        blocks.append((np.arange(first_var, len(keys)), np.arange(first_row, r)))
    n = len(keys)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(r, n))
    groups = {}
    for i, (x, j, y) in enumerate(keys):
        coef = column_coef(x, j, y)
        groups.setdefault((j, y), ([], []))
        groups[(j, y)][0].append(i)
        groups[(j, y)][1].append(coef)
    group_list = [(np.array(ix), np.array(cf, dtype=float)) for ix, cf in groups.values()]
    return GPProblem(n, group_list, A, np.array(b, dtype=float), blocks), keys


def _log(q: Fraction) -> float:
    return math.log(q.numerator) - math.log(q.denominator)


@dataclass
class SolveReport:
    primal: float
    dual: float = None
    gap: float = None
    iterations: int = 0
    newton_steps: int = 0
    tolerance: float = 1e-9
    lifted_exact: bool = False
    converged: bool = True
    lower_bound: float = None
    history: list = field(default_factory=list)


def primal_solve(inst: DiscreteInstance, tol=1e-9):
    """Optimal factorisation tables, lifted to exactly feasible rationals.

    Returns ``(FactorTables, SolveReport)``; ``report.history`` holds the
    certified (lower, upper) pair of every outer iteration.
    """
    if inst.q != 1:
        raise InputError("primal_solve needs q = 1; apply reduce_to_q1 first")
    points = inst.active_points()
    d = inst.d
    problem, keys = _build(
        inst, points, inst.tuples_at,
        lambda x, v: d * _log(inst.M[x]) + _log(v),
        lambda x, j, y: _log(inst.mu[x] / inst.w[j][y]),
    )
    if problem.n == 0:
        tables = FactorTables(d, inst.symmetric, [{} for _ in inst.slots()], Fraction(0))
        return tables, SolveReport(0.0, lifted_exact=True, lower_bound=0.0)
    res = solve_gp(problem, tol=tol, strict=False)
    if not res.converged:
        warnings.warn(f"primal solver stopped at its cap with bounds {res.lower}, {res.upper}")
    rows = [{} for _ in inst.slots()]
    for (x, j, y), u in zip(keys, res.u):
        rows[j][(x, y)] = _snap(math.exp(u))
    tables = lift_exact(inst, FactorTables(d, inst.symmetric, rows))
    report = SolveReport(
        primal=res.upper, iterations=res.iterations, newton_steps=res.newton_steps,
        tolerance=tol, lifted_exact=True, converged=res.converged,
        lower_bound=res.lower, history=list(res.history),
    )
    return tables, report


# ----------------------------------------------------------------- inner


@dataclass
class InnerResult:
    value: float
    lower: float
    S: object  # dict (symmetric) or list of dicts; inf where f vanishes


def _weights_arg(inst, f):
    if isinstance(f, dict):
        if not inst.symmetric:
            raise InputError("multilinear instance needs d weight maps")
        f = [f]
    f = list(f)
    if inst.symmetric:
        f = f[:1]
    if len(f) != len(inst.slots()):
        raise InputError(f"expected {len(inst.slots())} weight maps, got {len(f)}")
    out = []
    for j, fj in enumerate(f):
        row = {}
        for y, v in dict(fj).items():
            v = float(v)
            if v < 0:
                raise InputError(f"negative weight {v}", location=f"f[{j}][{y}]")
            row[y] = v
        out.append(row)
    return out


def inner_min(inst: DiscreteInstance, x, f, tol=1e-10) -> InnerResult:
    """inf of sum_j sum_y S_j(y) f_j(y) over S with K_x(y) <= prod_j S_j(y_j).

    Coordinates with f = 0 may be taken infinite at no cost, so tuples
    touching them impose nothing.
    """
    fw = _weights_arg(inst, f)
    slots = inst.slots()

    def fval(j, y):
        return fw[j].get(y, 0.0)

    def usable(ys):
        return all(fval(0 if inst.symmetric else j, y) > 0 for j, y in enumerate(ys))

    rows = [(ys, v) for ys, v in inst.tuples_at(x) if usable(ys)]
    S = [{y: (math.inf if fval(j, y) == 0 else 0.0) for y in inst.Y[j]} for j in slots]
    if not rows:
        return InnerResult(0.0, 0.0, S[0] if inst.symmetric else S)
    problem, keys = _build(
        inst, [x], lambda _x: rows, lambda _x, v: _log(v),
        lambda _x, j, y: math.log(fval(j, y)),
    )
    # a single objective: one group with every variable
    idx = np.arange(problem.n)
    coef = np.array([math.log(fval(j, y)) for (_x, j, y) in keys])
    problem.groups = [(idx, coef)]
    res = solve_gp(problem, tol=tol)
    for (_x, j, y), u in zip(keys, res.u):
        S[j][y] = math.exp(u)
    return InnerResult(res.upper, res.lower, S[0] if inst.symmetric else S)


def inner_lower_bound(inst: DiscreteInstance, x, f) -> float:
    """AM-GM floor for inner_min: d (sum K prod f)^(1/d) for multilinear
    instances, (sum over ordered tuples of K f...f)^(1/d) for symmetric ones."""
    fw = _weights_arg(inst, f)
    d = inst.d
    if inst.symmetric:
        total = math.fsum(float(v) * math.prod(fw[0].get(y, 0.0) for y in ys)
                          for ys, v in inst.ordered_tuples_at(x))
        return total ** (1.0 / d)
    total = math.fsum(float(v) * math.prod(fw[j].get(y, 0.0) for j, y in enumerate(ys))
                      for ys, v in inst.tuples_at(x))
    return d * total ** (1.0 / d)


# ------------------------------------------------------------------ dual


@dataclass
class DualResult:
    value: float
    f: list  # optimal weights per slot
    conic_value: float


def dual_value(inst: DiscreteInstance, solver=None) -> DualResult:
    """sup over the unit ball of sum_x mu(x) M(x) inner_min(x, f).

    The inner minima are dualized in closed form (an exponential-cone
    program in f and the tuple multipliers) and handed to a conic solver;
    the reported value re-evaluates every inner minimum at the maximizing f
    with ``inner_min``.
    """
    import cvxpy as cp

    if inst.q != 1:
        raise InputError("dual_value needs q = 1; apply reduce_to_q1 first")
    points = inst.active_points()
    slots = inst.slots()
    cols = inst.columns()
    if not points:
        return DualResult(0.0, [{y: 0.0 for y in inst.Y[j]} for j in slots], 0.0)
    col_index = {c: i for i, c in enumerate(cols)}
    fvar = cp.Variable(len(cols), nonneg=True)
    wvec = np.array([float(inst.w[j][y]) for j, y in cols])
    terms = []
    for x in points:
        rows = inst.tuples_at(x)
        var_keys, var_index = [], {}
        r_idx, c_idx, vals = [], [], []
        for r, (ys, _v) in enumerate(rows):
            for j, y in enumerate(ys):
                key = (0 if inst.symmetric else j, y)
                if key not in var_index:
                    var_index[key] = len(var_keys)
                    var_keys.append(key)
                r_idx.append(r)
                c_idx.append(var_index[key])
                vals.append(1.0)
        At = sp.csr_matrix((vals, (c_idx, r_idx)), shape=(len(var_keys), len(rows)))
        lam = cp.Variable(len(rows), nonneg=True)
        s = At @ lam
        fsel = fvar[[col_index[k] for k in var_keys]]
        b = np.array([_log(v) for _ys, v in rows])
        weight = float(inst.mu[x] * inst.M[x])
        terms.append(weight * (b @ lam + cp.sum(s) - cp.sum(cp.rel_entr(s, fsel))))
    prob = cp.Problem(cp.Maximize(cp.sum(terms)), [wvec @ fvar <= 1])
    try:
        prob.solve(solver=solver or cp.CLARABEL)
    except cp.error.SolverError as exc:
        raise ConvergenceError(f"conic dual solve failed: {exc}") from exc
    if prob.status not in ("optimal", "optimal_inaccurate") or fvar.value is None:
        raise ConvergenceError(f"conic dual solve ended with status {prob.status}")
    fstar = np.maximum(fvar.value, 0.0)
    norm = float(wvec @ fstar)
    if norm > 1:
        fstar = fstar / norm
    f = [{} for _ in slots]
    for (j, y), v in zip(cols, fstar):
        f[j][y] = float(v)
    total = math.fsum(float(inst.mu[x] * inst.M[x]) * inner_min(inst, x, f).value for x in points)
    return DualResult(total, f, float(prob.value))


def minimax_gap(inst: DiscreteInstance):
    """Relative gap |P - D| / max(P, D, 1) between primal and dual values."""
    report = solve_minimax(inst)
    return report.gap


def solve_minimax(inst: DiscreteInstance) -> SolveReport:
    tables, report = primal_solve(inst)
    dual = dual_value(inst)
    report.dual = dual.value
    report.gap = abs(report.primal - dual.value) / max(report.primal, dual.value, 1.0)
    return report


# -------------------------------------------------------------- reductions


def conjugate_exponent(q: Fraction):
    """q' with 1/q + 1/q' = 1; None stands for infinity."""
    return None if q == 1 else q / (q - 1)


def density_norm(inst: DiscreteInstance):
    """||M||_{q'} with respect to mu: exact (Fraction or Radical) when the
    conjugate exponent is an integer or infinite, else a float."""
    qc = conjugate_exponent(inst.q)
    if qc is None:
        return max(inst.M.values(), default=Fraction(0))
    if qc.denominator == 1:
        k = qc.numerator
        return Radical(sum((inst.mu[x] * inst.M[x] ** k for x in inst.X), Fraction(0)), k)
    total = math.fsum(float(inst.mu[x]) * float(inst.M[x]) ** float(qc) for x in inst.X)
    return total ** (1.0 / float(qc))


def reduce_to_q1(inst: DiscreteInstance) -> DiscreteInstance:
    """The q = 1 instance with measure M_hat * mu and density 1, where
    M_hat = M / ||M||_{q'}.

    The normalizing factor actually used is stored as ``norm_used`` (exact
    when the norm is rational, otherwise a rational approximation); tables
    map back through ``expand_tables``.
    """
    norm = density_norm(inst)
    if isinstance(norm, Radical):
        used = norm.radicand if norm.is_rational() else Fraction(float(norm))
        zero = norm.is_zero()
    elif isinstance(norm, Fraction):
        used, zero = norm, norm == 0
    else:
        used, zero = Fraction(norm), norm == 0
    if zero:
        raise InputError("vacuous instance: M = 0")
    keep = [x for x in inst.X if inst.M[x] > 0]
    mu = {x: inst.mu[x] * inst.M[x] / used for x in keep}
    kernel = {(x, ys): v for x in keep for ys, v in inst.kernel[x].items()}
    out = DiscreteInstance(inst.d, keep, mu, inst.Y, inst.w, kernel,
                           {x: Fraction(1) for x in keep}, 1, inst.symmetric)
    out.norm_used = used
    out.norm = norm
    return out


def expand_tables(original: DiscreteInstance, reduced: DiscreteInstance, tables: FactorTables):
    """Tables for ``original`` from tables of ``reduce_to_q1(original)``:
    g_j(x, y) = M(x) g'_j(x, y).

    These satisfy the original constraint M^d K <= prod g_j exactly; the
    achieved value is ``norm_used`` times the reduced value.
    """
    rows = []
    for table in tables.tables:
        rows.append({(x, y): original.M[x] * v for (x, y), v in table.items()})
    out = FactorTables(tables.d, tables.symmetric, rows)
    out.value = achieved_value(original, out)
    return out


# ------------------------------------------------------------ symmetry


def symmetrize_tables(inst: DiscreteInstance, tables: FactorTables) -> FactorTables:
    """One table g = (g_1 ... g_d)^(1/d) for a symmetric kernel, lifted to
    exact rationals."""
    if not inst.is_symmetric_kernel():
        raise InputError("asymmetric kernel")
    if tables.symmetric:
        return FactorTables(tables.d, True, [dict(tables.tables[0])], tables.value, tables.exact)
    d = inst.d
    keys = set()
    for t in tables.tables:
        keys.update(t)
    row = {}
    for key in sorted(keys, key=repr):
        vals = [t.get(key, 0) for t in tables.tables]
        if any(v == 0 for v in vals):
            continue
        logs = math.fsum(_log(Fraction(v)) for v in vals) / d
        row[key] = _snap(math.exp(logs))
    sym_inst = inst if inst.symmetric else _symmetric_view(inst)
    return lift_exact(sym_inst, FactorTables(d, True, [row]))


def _symmetric_view(inst):
    kernel = {(x, ys): v for x in inst.X for ys, v in inst.kernel[x].items()}
    return DiscreteInstance(inst.d, inst.X, inst.mu, inst.Y[0], inst.w[0], kernel, inst.M,
                            inst.q, symmetric=True)


# ------------------------------------------------------- diag / off-diag


@dataclass
class DiagOffdiag:
    a_diag: float
    a_offdiag: float
    diag_constant: float  # a_diag ** d
    offdiag_constant: float  # a_offdiag ** d
    within_bound: bool  # a_offdiag <= d * a_diag


def _dense_kernels(inst):
    n = len(inst.Y[0])
    pos = inst._pos[0]
    out = []
    for x in inst.X:
        K = np.zeros((n,) * inst.d)
        for ys, v in inst.ordered_tuples_at(x):
            K[tuple(pos[y] for y in ys)] = float(v)
        out.append(K)
    return out


def _T_and_grads(K, fs):
    d = len(fs)
    val = K
    for j in reversed(range(d)):
        val = val @ fs[j] if val.ndim == 1 else np.tensordot(val, fs[j], axes=([val.ndim - 1], [0]))
    grads = []
    for j in range(d):
        g = K
        for i in reversed(range(d)):
            if i == j:
                continue
            g = np.tensordot(g, fs[i], axes=([i], [0]))
        grads.append(g)
    return float(val), grads


def _maximize(objective, starts, bounds, constraints):
    from scipy.optimize import minimize

    best_val, best_x = -math.inf, None
    for x0 in starts:
        val0 = objective(x0)[0]
        if val0 > best_val:
            best_val, best_x = val0, x0
        res = minimize(lambda z: tuple(-v for v in objective(z)), x0, jac=True, method="SLSQP",
                       bounds=bounds, constraints=constraints,
                       options={"ftol": 1e-15, "maxiter": 500})
        z = np.clip(res.x, 0, None)
        val = objective(z)[0]
        if val > best_val and _feasible(z, constraints):
            best_val, best_x = val, z
    return best_val, best_x


def _feasible(z, constraints):
    return all(c["fun"](z) >= -1e-9 for c in constraints)


def diag_offdiag_constants(inst: DiscreteInstance, seed=0, restarts=20) -> DiagOffdiag:
    """Best constants A in ``||T(f,...,f)^(1/d)||_q <= A ||f||`` (diagonal)
    and ``||T(f_1,...,f_d)^(1/d)||_q <= A prod ||f_j||^(1/d)`` (off-diagonal).

    Both suprema sit on products of weighted simplices; they are found by
    multistart SLSQP. ``diag_constant``/``offdiag_constant`` report
    ``A ** d``, the convention in which the off-diagonal-ones 2x2 kernel has
    constants 1/2 and 1.
    """
    if not inst.is_symmetric_kernel():
        raise InputError("diag/off-diagonal constants need a symmetric instance")
    if any(m != 1 for m in inst.M.values()):
        raise InputError("diag/off-diagonal constants need M = 1")
    sym = inst if inst.symmetric else _symmetric_view(inst)
    d, n = sym.d, len(sym.Y[0])
    q = float(sym.q)
    Ks = _dense_kernels(sym)
    mus = [float(sym.mu[x]) for x in sym.X]
    w = np.array([float(sym.w[0][y]) for y in sym.Y[0]])
    rng = np.random.default_rng(seed)

    def norm_of(fs):
        vals, grads = [], []
        for K in Ks:
            v, g = _T_and_grads(K, fs)
            vals.append(max(v, 0.0))
            grads.append(g)
        total = sum(m * v ** (q / d) for m, v in zip(mus, vals))
        if total <= 0:
            return 0.0, [np.zeros(n) for _ in fs]
        # d/df_j of (sum mu T^(q/d))^(1/q)
        outer = total ** (1.0 / q - 1.0) / q
        gs = []
        for j in range(len(fs)):
            gj = np.zeros(n)
            for m, v, g in zip(mus, vals, grads):
                if v > 0:
                    gj += m * (q / d) * v ** (q / d - 1.0) * g[j]
            gs.append(outer * gj)
        return total ** (1.0 / q), gs

    def simplex_starts():
        pts = [np.eye(n)[i] / w[i] for i in range(n)]
        pts += [(np.eye(n)[i] / w[i] + np.eye(n)[k] / w[k]) / 2 for i in range(n) for k in range(i + 1, n)]
        pts.append(np.ones(n) / w.sum())
        for _ in range(restarts):
            p = rng.dirichlet(np.ones(n))
            pts.append(p / w)
        return pts

    bounds = [(0, 1 / wi) for wi in w]
    simplex = {"type": "eq", "fun": lambda z: float(w @ z) - 1.0, "jac": lambda z: w}

    def diag_obj(z):
        val, gs = norm_of([z] * d)
        return val, sum(gs)

    diag_starts = simplex_starts()
    a_diag, f_diag = _maximize(diag_obj, diag_starts, bounds, [simplex])

    def off_obj(z):
        fs = [z[j * n:(j + 1) * n] for j in range(d)]
        val, gs = norm_of(fs)
        return val, np.concatenate(gs)

    cons = [{"type": "eq", "fun": (lambda z, j=j: float(w @ z[j * n:(j + 1) * n]) - 1.0),
             "jac": (lambda z, j=j: np.concatenate([w if i == j else np.zeros(n) for i in range(d)]))}
            for j in range(d)]
    base = simplex_starts()
    off_starts = [np.concatenate([f_diag] * d)]
    verts = [np.eye(n)[i] / w[i] for i in range(n)]
    if n**d <= 256:
        import itertools

        off_starts += [np.concatenate(c) for c in itertools.product(verts, repeat=d)]
    for _ in range(restarts):
        off_starts.append(np.concatenate([base[rng.integers(len(base))] for _ in range(d)]))
    a_off, _ = _maximize(off_obj, off_starts, bounds * d, cons)
    if a_off < a_diag - 1e-9:
        raise AuditError(f"off-diagonal maximum {a_off} below diagonal value {a_diag}")
    within = a_off <= d * a_diag + 1e-6
    if not within:
        raise AuditError(f"off-diagonal constant {a_off} exceeds d * diagonal {d * a_diag}")
    return DiagOffdiag(a_diag, a_off, a_diag**d, a_off**d, within)
