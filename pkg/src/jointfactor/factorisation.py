"""Factorisation certificates for joints and multijoints.

Given finitely supported weights M on points, a certificate is a table
g(x, l) >= 0 with

    M(x)^d <= g(x, l_1) ... g(x, l_d)   whenever l_1..l_d form a joint at x,
    sum_{x in l} g(x, l) <= V           for every line l.

Only a finite closure family of lines is tabulated. Any other line meets the
support in at most one point x_0 and gets g(x_0, l) = V there (0 elsewhere);
that default is enough because every table entry is itself at most V.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import lcm

from .duality import DiscreteInstance, primal_solve
from .errors import InputError
from .geometry import (
    canonical_line, extend_to_basis_pool, independent, independent_combinations,
    line_contains, line_through, normalize_direction, vector,
)
from .joints import LineFamily, MultiFamily
from .radical import Radical


def _clean_weights(M, field, d):
    out = {}
    for point, value in dict(M).items():
        p = vector(field, point)
        if len(p) != d:
            raise InputError(f"point {point!r} has {len(p)} coordinates, expected {d}")
        value = Fraction(value)
        if value < 0:
            raise InputError(f"negative weight {value} at {point!r}")
        if value:
            out[p] = out.get(p, Fraction(0)) + value
    return dict(sorted(out.items()))


@dataclass
class ClosureFamily:
    L_prime: list
    augment: dict  # x -> lines through x with basis-completing directions
    lines: list  # sorted union
    lines_at: dict  # x -> sorted closure lines through x
    joints: list  # support points that are joints of the closure

    def __contains__(self, line):
        return line in self._set

    def __post_init__(self):
        self._set = set(self.lines)


def _is_joint_at(lines_x, field, d):
    return bool(independent_combinations([l.direction for l in lines_x], d, field)[:1])


def line_closure(M, d, field) -> ClosureFamily:
    """Lines through two or more support points, plus for every support
    point x lines through x whose directions complete any independent set
    of directions at x to a basis."""
    if d < 2:
        raise InputError("need d >= 2")
    support = list(_clean_weights(M, field, d))
    L_prime = sorted({line_through(a, b, field) for a, b in combinations(support, 2)})
    augment = {}
    for x in support:
        dirs = [l.direction for l in L_prime if line_contains(l, x)]
        augment[x] = sorted({canonical_line(x, v, field) for v in extend_to_basis_pool(dirs, d, field)})
    lines = sorted(set(L_prime).union(*augment.values()) if augment else set(L_prime))
    lines_at = {x: [l for l in lines if line_contains(l, x)] for x in support}
    joints = [x for x in support if _is_joint_at(lines_at[x], field, d)]
    return ClosureFamily(L_prime, augment, lines, lines_at, joints)


@dataclass
class FactorCertificate:
    field: object
    d: int
    M: dict  # point -> Fraction (support only)
    lines: list  # tabulated lines (closure or the explicit family)
    table: dict  # (point, line) -> Fraction
    bound: Fraction  # V: line-sum bound and default value
    norm_power: Fraction  # sum of M^d over the support used
    mode: str = "all-lines"  # or "explicit"
    solver: dict = field(default_factory=dict)

    def __post_init__(self):
        self._line_set = set(self.lines)

    @property
    def norm(self) -> Radical:
        """||M||_d, exactly."""
        return Radical(self.norm_power, self.d)

    @property
    def constant(self) -> Radical:
        """C_d = V / ||M||_d, the constant in the line-sum bound."""
        if self.norm_power == 0:
            return Radical(0)
        return Radical(self.bound) / self.norm

    def in_closure(self, line) -> bool:
        return line in self._line_set

    def lines_at(self, x):
        return [l for l in self.lines if line_contains(l, x)]

    def line_sums(self):
        sums = {l: Fraction(0) for l in self.lines}
        for (x, l), v in self.table.items():
            sums[l] += v
        return sums


def evaluate_g(cert: FactorCertificate, x, line) -> Fraction:
    """g(x, l) for any line: table value on tabulated lines; off them, V at
    the line's single support point and 0 elsewhere."""
    x = vector(cert.field, x)
    if x not in cert.M:
        return Fraction(0)
    if cert.in_closure(line):
        return cert.table.get((x, line), Fraction(0))
    if cert.mode != "all-lines":
        return Fraction(0)
    return cert.bound if line_contains(line, x) else Fraction(0)


def _instance_for(Mhat, lines_at, points, field, d):
    lines = sorted({l for x in points for l in lines_at[x]})
    kernel = {}
    for x in points:
        lx = lines_at[x]
        for combo in independent_combinations([l.direction for l in lx], d, field):
            kernel[(x, tuple(lx[i] for i in combo))] = 1
    return DiscreteInstance(
        d, points, {x: 1 for x in points}, lines, {l: 1 for l in lines}, kernel,
        {x: Mhat[x] for x in points}, 1, symmetric=True,
    )


def factorise(M, field, d, family: LineFamily = None) -> FactorCertificate:
    """Certificate for the joints of all lines (default) or of an explicit family.

    The weights are scaled by their maximum before solving, so the solved
    table is the same for M and t*M; the stored table and bound are in the
    units of M.
    """
    M = _clean_weights(M, field, d)
    if family is None:
        closure = line_closure(M, d, field)
        lines, lines_at, points, mode = closure.lines, closure.lines_at, closure.joints, "all-lines"
    else:
        if family.field != field or family.d != d:
            raise InputError("family does not match field/dimension")
        lines = family.distinct()
        lines_at = {x: [l for l in lines if line_contains(l, x)] for x in M}
        points = [x for x in M if _is_joint_at(lines_at[x], field, d)]
        M = {x: M[x] for x in points}
        mode = "explicit"
    if not M:
        return FactorCertificate(field, d, {}, lines, {}, Fraction(0), Fraction(0), mode)
    top = max(M.values())
    Mhat = {x: v / top for x, v in M.items()}
    inst = _instance_for(Mhat, lines_at, points, field, d)
    tables, report = primal_solve(inst)
    table = {(x, l): top * v for (x, l), v in tables.tables[0].items() if v}
    bound = top * tables.value
    norm_power = sum((v**d for v in M.values()), Fraction(0))
    solver = {"primal": report.primal, "lower_bound": report.lower_bound,
              "iterations": report.iterations, "converged": report.converged}
    return FactorCertificate(field, d, dict(M), lines, table, bound, norm_power, mode, solver)


# ------------------------------------------------------------ verification


@dataclass
class Verification:
    ok: bool
    checked: int = 0
    witness: dict = None

    def __bool__(self):
        return self.ok


def _synthetic_directions(field, d, extra=4):
    """Directions for off-closure lines over Q: coordinate axes and points
    on the moment curve."""
    out = [tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d)]
    for t in range(1, extra + 1):
        out.append(tuple(Fraction(t) ** j for j in range(d)))
        out.append(tuple(Fraction(-t) ** j + (1 if j == 1 else 0) for j in range(d)))
    return [normalize_direction(field, v) for v in out]


def _all_directions(field, d):
    for v in product(range(field.p), repeat=d):
        if any(v) and v[next(i for i, c in enumerate(v) if c)] == 1:
            yield v


def _point_lines(cert, x, scope):
    """Lines through x to test, with their g values; off-closure lines
    included in all-lines mode."""
    closure_x = cert.lines_at(x)
    lines = list(closure_x)
    if cert.mode == "all-lines":
        if cert.field.is_finite and scope == "exhaustive":
            dirs = list(_all_directions(cert.field, cert.d))
        else:
            dirs = _synthetic_directions(cert.field, cert.d)
        seen = set(closure_x)
        for v in dirs:
            l = canonical_line(x, v, cert.field)
            if l not in seen:
                seen.add(l)
                lines.append(l)
    return closure_x, lines


def _check_point(args):
    cert, x, scope = args
    d, field, V = cert.d, cert.field, cert.bound
    need = cert.M[x] ** d
    checked = 0
    closure_x, lines = _point_lines(cert, x, scope)
    # off-closure lines must miss every other support point
    for l in lines[len(closure_x):]:
        others = [p for p in cert.M if p != x and line_contains(l, p)]
        checked += 1
        if others:
            return checked, {"kind": "off-closure line meets support twice", "x": x, "line": l,
                             "points": others}
    values = [evaluate_g(cert, x, l) for l in lines]
    den = lcm(*(v.denominator for v in values)) if values else 1
    nums = [int(v * den) for v in values]
    rhs = need * den**d
    rhs_int = rhs.numerator // rhs.denominator + (rhs.numerator % rhs.denominator > 0)
    dirs = [l.direction for l in lines]
    for combo in independent_combinations(dirs, d, field):
        checked += 1
        p = 1
        for i in combo:
            p *= nums[i]
        if p < rhs_int:
            prod_g = Fraction(p, den**d)
            if prod_g < need:
                return checked, {"kind": "joint constraint", "x": x,
                                 "lines": [lines[i] for i in combo], "lhs": need, "rhs": prod_g}
    if cert.mode == "all-lines":
        # mixed tuples: closure lines completed by default-valued lines
        nc = len(closure_x)
        for k in range(d):
            for combo in independent_combinations(dirs[:nc], k, field) if k else [()]:
                checked += 1
                prod_g = Fraction(1)
                for i in combo:
                    prod_g *= values[i]
                prod_g *= V ** (d - k)
                if prod_g < need:
                    return checked, {"kind": "mixed tuple", "x": x,
                                     "lines": [lines[i] for i in combo], "defaults": d - k,
                                     "lhs": need, "rhs": prod_g}
    return checked, None


def verify_certificate(cert: FactorCertificate, M=None, scope="exhaustive", jobs=1) -> Verification:
    """Re-check both conclusions of a certificate in exact arithmetic.

    Over finite fields the exhaustive scope tests every line through every
    support point; over Q off-closure lines are sampled from a fixed set of
    directions. Returns the first witness in support order on failure.
    """
    if scope not in ("exhaustive", "sampled"):
        raise InputError(f"unknown scope {scope!r}")
    if M is not None:
        given = _clean_weights(M, cert.field, cert.d)
        if cert.mode == "explicit":
            given = {x: v for x, v in given.items() if x in cert.M}
        if given != cert.M:
            return Verification(False, 0, {"kind": "weights differ from the certificate"})
    V = cert.bound
    checked = 0
    for (x, l), v in sorted(cert.table.items(), key=lambda kv: (kv[0][0], kv[0][1].sort_key())):
        checked += 1
        if v < 0 or v > V:
            return Verification(False, checked, {"kind": "table entry out of range", "x": x,
                                                 "line": l, "value": v, "bound": V})
        if x not in cert.M or not line_contains(l, x) or not cert.in_closure(l):
            return Verification(False, checked, {"kind": "entry off the support", "x": x, "line": l})
    for l, s in cert.line_sums().items():
        checked += 1
        if s > V:
            return Verification(False, checked, {"kind": "line sum", "line": l, "sum": s, "bound": V})
    points = list(cert.M)
    tasks = [(cert, x, scope) for x in points]
    if jobs and jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_check_point, tasks))
    else:
        results = []
        for task in tasks:
            results.append(_check_point(task))
            if results[-1][1] is not None:
                break
    for n, witness in results:
        checked += n
        if witness is not None:
            return Verification(False, checked, witness)
    return Verification(True, checked, None)


# -------------------------------------------------------------- multijoints


@dataclass
class MultiCertificate:
    base: FactorCertificate
    families: list
    tables: list  # g_j: (point, line) -> Fraction, restricted to family j

    @property
    def bound(self):
        return self.base.bound

    @property
    def constant(self):
        return self.base.constant


def multijoint_points(M, families: MultiFamily):
    field = families.field
    out = []
    for x in M:
        per = [[l for l in fam.distinct() if line_contains(l, x)] for fam in families]
        if any(not p for p in per):
            continue
        if any(independent([l.direction for l in choice], field) for choice in product(*per)):
            out.append(x)
    return out


def multijoint_factorise(M, families: MultiFamily) -> MultiCertificate:
    """Tables g_j for multijoints, restricted from a joints certificate of
    the union family; weights off the multijoint set are dropped."""
    field, d = families.field, families.d
    M = _clean_weights(M, field, d)
    keep = set(multijoint_points(M, families))
    M = {x: v for x, v in M.items() if x in keep}
    base = factorise(M, field, d, family=families.union())
    tables = []
    for fam in families:
        lines = set(fam.distinct())
        tables.append({(x, l): v for (x, l), v in base.table.items() if l in lines})
    return MultiCertificate(base, list(families), tables)


def verify_multi(cert: MultiCertificate) -> Verification:
    """Both multijoint conclusions, exhaustively over the families."""
    base = cert.base
    d, field, V = base.d, base.field, base.bound
    checked = 0
    for j, (fam, table) in enumerate(zip(cert.families, cert.tables)):
        sums = {}
        for (x, l), v in table.items():
            sums[l] = sums.get(l, 0) + v
        for l, s in sums.items():
            checked += 1
            if s > V:
                return Verification(False, checked, {"kind": "line sum", "family": j, "line": l,
                                                     "sum": s, "bound": V})
    for x, m in base.M.items():
        per = [[l for l in fam.distinct() if line_contains(l, x)] for fam in cert.families]
        for choice in product(*per):
            if not independent([l.direction for l in choice], field):
                continue
            checked += 1
            p = Fraction(1)
            for table, l in zip(cert.tables, choice):
                p *= table.get((x, l), 0)
            if p < m**d:
                return Verification(False, checked, {"kind": "multijoint constraint", "x": x,
                                                     "lines": list(choice), "lhs": m**d, "rhs": p})
    return Verification(True, checked, None)
