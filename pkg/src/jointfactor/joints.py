"""Joints and multijoints of finite line families.

A family may repeat lines; ``|L|`` and ``N(x)`` count repetitions. Joints
are found among pairwise intersections of family lines, which is where
every joint lies once ``d >= 2``.
"""

from collections import defaultdict
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations, permutations
import math

from .errors import InputError
from .geometry import Line, independent, independent_combinations, intersect, line_contains, vector


class LineFamily:
    """Finite family of canonical lines with integer multiplicities."""

    def __init__(self, field, d, lines=()):
        self.field = field
        self.d = d
        self.counts = {}
        for item in lines:
            if isinstance(item, Line):
                self.add(item)
            else:
                self.add(*item)

    def add(self, line, multiplicity=1):
        if not isinstance(line, Line):
            raise InputError(f"not a Line: {line!r}")
        if line.field != self.field or line.dim != self.d:
            raise InputError("line does not match the family's field/dimension")
        if not isinstance(multiplicity, int) or multiplicity < 1:
            raise InputError(f"multiplicity must be a positive integer, got {multiplicity!r}")
        self.counts[line] = self.counts.get(line, 0) + multiplicity

    def __len__(self):
        return sum(self.counts.values())

    def __iter__(self):
        return iter(self.distinct())

    def __contains__(self, line):
        return line in self.counts

    def __eq__(self, other):
        return (
            isinstance(other, LineFamily)
            and self.field == other.field
            and self.d == other.d
            and self.counts == other.counts
        )

    def distinct(self):
        return sorted(self.counts)

    def expanded(self):
        """Lines listed with repetition."""
        return [l for l in self.distinct() for _ in range(self.counts[l])]

    def weights(self):
        return {l: Fraction(m) for l, m in self.counts.items()}

    def __repr__(self):
        return f"LineFamily({self.field}, d={self.d}, {len(self.counts)} lines, |L|={len(self)})"


class MultiFamily:
    """Exactly ``d`` line families over a common field and dimension."""

    def __init__(self, families):
        families = list(families)
        if not families:
            raise InputError("empty multifamily")
        field, d = families[0].field, families[0].d
        for fam in families:
            if fam.field != field or fam.d != d:
                raise InputError("families must share field and dimension")
        if len(families) != d:
            raise InputError(f"need exactly d={d} families, got {len(families)}")
        self.families = families
        self.field = field
        self.d = d

    def __getitem__(self, j):
        return self.families[j]

    def __iter__(self):
        return iter(self.families)

    def union(self) -> LineFamily:
        out = LineFamily(self.field, self.d)
        for fam in self.families:
            for l, m in fam.counts.items():
                out.add(l, m)
        return out


@dataclass
class JointSummary:
    counts: dict = dc_field(default_factory=dict)

    @property
    def joints(self):
        return sorted(self.counts)

    def __len__(self):
        return len(self.counts)

    def __getitem__(self, x):
        return self.counts.get(x, 0)


def delta(x, lines) -> int:
    """Multijoints kernel: 1 iff x lies on every line and the directions are independent."""
    lines = list(lines)
    if not lines:
        raise InputError("empty tuple")
    field = lines[0].field
    x = vector(field, x)
    if len(lines) != len(x):
        raise InputError(f"tuple length {len(lines)} != dimension {len(x)}")
    if not all(line_contains(l, x) for l in lines):
        return 0
    return int(independent([l.direction for l in lines], field))


def incidence_map(lines):
    """Points lying on at least two of the given distinct lines, mapped to
    the sorted list of lines through them."""
    lines = sorted(set(lines))
    through = defaultdict(set)
    for a, b in combinations(lines, 2):
        x = intersect(a, b)
        if x is not None:
            through[x].add(a)
            through[x].add(b)
    return {x: sorted(ls) for x, ls in through.items()}


def _permanent(rows):
    d = len(rows)
    total = 0
    for perm in permutations(range(d)):
        term = 1
        for j in range(d):
            term *= rows[j][perm[j]]
            if not term:
                break
        total += term
    return total


def multilinear_sum_at(lines_x, weight_maps, field):
    """Sum over ordered tuples of lines through one point of delta * prod_j w_j(l_j).

    ``lines_x`` are distinct lines through the point; ``weight_maps[j]`` maps
    lines to the weight used in slot ``j``.
    """
    d = len(weight_maps)
    lines = [l for l in lines_x if any(w.get(l) for w in weight_maps)]
    if len(lines) < d:
        return 0
    if all(w is weight_maps[0] for w in weight_maps):
        w = weight_maps[0]
        return math.factorial(d) * sum(
            math.prod(w[lines[i]] for i in combo)
            for combo in independent_combinations([l.direction for l in lines], d, field)
        )
    total = 0
    for combo in independent_combinations([l.direction for l in lines], d, field):
        chosen = [lines[i] for i in combo]
        total += _permanent([[w.get(l, 0) for l in chosen] for w in weight_maps])
    return total


def _as_families(input_):
    if isinstance(input_, LineFamily):
        return input_.field, input_.d, [input_] * input_.d, True
    if isinstance(input_, MultiFamily):
        return input_.field, input_.d, list(input_.families), False
    raise InputError(f"expected LineFamily or MultiFamily, got {type(input_).__name__}")


def joint_summary(input_) -> JointSummary:
    """N(x) for every joint (LineFamily) or multijoint (MultiFamily)."""
    field, d, families, _ = _as_families(input_)
    weight_maps = []
    seen = {}
    for fam in families:
        if id(fam) not in seen:
            seen[id(fam)] = {l: m for l, m in fam.counts.items()}
        weight_maps.append(seen[id(fam)])
    all_lines = set()
    for fam in families:
        all_lines.update(fam.counts)
    counts = {}
    for x, lines_x in incidence_map(all_lines).items():
        if len(lines_x) < d:
            continue
        n = multilinear_sum_at(lines_x, weight_maps, field)
        if n:
            counts[x] = int(n)
    return JointSummary(dict(sorted(counts.items())))


@dataclass(frozen=True)
class ZhangReport:
    lhs: float
    rhs: float
    ratio: float
    joints: int


def zhang_report(input_) -> ZhangReport:
    """Both sides of Zhang's joints/multijoints inequality for one family.

    Only the ratio is reported; no constant is asserted.
    """
    field, d, families, common = _as_families(input_)
    if d < 2:
        raise InputError("need d >= 2")
    summary = joint_summary(input_)
    lhs = math.fsum(n ** (1.0 / (d - 1)) for n in summary.counts.values())
    if common:
        rhs = len(families[0]) ** (d / (d - 1))
    else:
        rhs = math.prod(len(f) for f in families) ** (1.0 / (d - 1))
    if rhs == 0:
        assert lhs == 0, "joints without lines"
        return ZhangReport(0.0, 0.0, 0.0, 0)
    return ZhangReport(lhs, rhs, lhs / rhs, len(summary))


def apply_T(families, f):
    """T(f_1, ..., f_d)(x) for every point where it can be nonzero.

    ``families`` is a MultiFamily (or a sequence of d LineFamily); ``f[j]``
    maps lines of family ``j`` to nonnegative weights. Returns exact values
    keyed by point; absent points have value 0.
    """
    if isinstance(families, MultiFamily):
        fams = list(families.families)
    else:
        fams = list(families)
    if not fams:
        raise InputError("no families")
    field, d = fams[0].field, fams[0].d
    if len(fams) != d or len(f) != d:
        raise InputError(f"need d={d} families and weight maps")
    weight_maps = []
    for j, (fam, w) in enumerate(zip(fams, f)):
        clean = {}
        for l, v in w.items():
            v = Fraction(v)
            if v < 0:
                raise InputError(f"negative weight {v} on {l!r}", location=f"f[{j}]")
            if l not in fam:
                raise InputError(f"{l!r} is not in family {j}", location=f"f[{j}]")
            if v:
                clean[l] = v
        weight_maps.append(clean)
    support = set()
    for w in weight_maps:
        support.update(w)
    out = {}
    for x, lines_x in incidence_map(support).items():
        value = multilinear_sum_at(lines_x, weight_maps, field)
        if value:
            out[x] = Fraction(value)
    return dict(sorted(out.items()))


def lines_through(lines, x):
    return [l for l in lines if line_contains(l, x)]
