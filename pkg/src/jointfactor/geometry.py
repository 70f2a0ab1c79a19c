"""Vectors, canonical lines and subspaces over an exact field.

Vectors are tuples of field elements. Every ``Line`` and ``Subspace`` is held
in a normal form, so equality of values is equality of point sets.
"""

from dataclasses import dataclass
from fractions import Fraction

from . import kernels
from .errors import InputError
from .fields import PrimeField, RationalField


def vector(field, coords):
    return tuple(field(c) for c in coords)


def is_zero(v) -> bool:
    return all(c == 0 for c in v)


def _check_field(field):
    if not isinstance(field, (PrimeField, RationalField)):
        raise InputError(f"unsupported field {field!r}")


def _check_same_length(*vectors):
    n = len(vectors[0])
    for v in vectors[1:]:
        if len(v) != n:
            raise InputError(f"dimension mismatch: {len(v)} != {n}")


def normalize_direction(field, v):
    """Projective normal form: first nonzero coordinate equal to 1."""
    for c in v:
        if c != 0:
            inv = field.inv(c)
            return tuple(field.reduce(x * inv) for x in v)
    raise InputError("degenerate direction")


def standard_basis(field, d):
    return [tuple(field(1 if i == j else 0) for j in range(d)) for i in range(d)]


# ---------------------------------------------------------------- elimination


def rref(rows, field):
    """Reduced row-echelon form; returns (nonzero rows, pivot columns)."""
    rows = [list(r) for r in rows]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = field.inv(rows[r][c])
        rows[r] = [field.reduce(v * inv) for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                factor = rows[i][c]
                rows[i] = [field.reduce(a - factor * b) for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return [tuple(row) for row in rows[:r]], pivots


def rank(vectors, field) -> int:
    vectors = list(vectors)
    if not vectors:
        return 0
    if isinstance(field, PrimeField):
        return kernels.rank_mod_p(vectors, field.p)
    return len(rref(vectors, field)[0])


def independent(vectors, field) -> bool:
    """True iff the vectors are linearly independent."""
    vectors = list(vectors)
    if vectors:
        _check_same_length(*vectors)
    return rank(vectors, field) == len(vectors)


def independent_combinations(vectors, k, field):
    """Index tuples of all linearly independent ``k``-subsets, in lexicographic order.

    Uses the compiled kernel for prime fields when it is available.
    """
    vectors = list(vectors)
    if isinstance(field, PrimeField):
        return kernels.independent_combinations_mod_p(vectors, k, field.p)
    return _rational_independent_combinations(vectors, k, field)


def _rational_independent_combinations(vectors, k, field):
    # depth-first with incremental elimination, same order as the kernels
    m = len(vectors)
    if k == 0:
        return [()]
    out, basis, pivots, prefix = [], [], [], []

    def reduce(v):
        v = list(v)
        for row, pc in zip(basis, pivots):
            c = v[pc]
            if c:
                v = [a - c * b for a, b in zip(v, row)]
        return v

    def dfs(start):
        depth = len(prefix)
        for i in range(start, m - (k - depth) + 1):
            v = reduce(vectors[i])
            pc = next((j for j, c in enumerate(v) if c), None)
            if pc is None:
                continue
            if depth + 1 == k:
                out.append(tuple(prefix) + (i,))
                continue
            inv = 1 / Fraction(v[pc])
            basis.append([x * inv for x in v])
            pivots.append(pc)
            prefix.append(i)
            dfs(i + 1)
            prefix.pop()
            pivots.pop()
            basis.pop()

    dfs(0)
    return out


def solve(columns, rhs, field):
    """Solve ``sum_i x_i * columns[i] = rhs``; returns the unique solution or None.

    ``None`` is also returned when the columns are dependent.
    """
    n = len(columns)
    d = len(rhs)
    aug = [[columns[i][r] for i in range(n)] + [rhs[r]] for r in range(d)]
    rows, pivots = rref(aug, field)
    if n in pivots:
        return None  # inconsistent
    if len(pivots) < n:
        return None
    return tuple(rows[i][n] for i in range(n))


# ---------------------------------------------------------------------- lines


@dataclass(frozen=True)
class Line:
    """An affine line in canonical form.

    ``direction`` has first nonzero coordinate 1 and ``base`` is the unique
    point of the line whose coordinate at that pivot is 0.
    """

    field: object
    base: tuple
    direction: tuple

    @property
    def dim(self) -> int:
        return len(self.base)

    @property
    def pivot(self) -> int:
        return next(i for i, c in enumerate(self.direction) if c != 0)

    def point_at(self, t):
        F = self.field
        return tuple(F.reduce(b + t * v) for b, v in zip(self.base, self.direction))

    def points(self):
        if not self.field.is_finite:
            raise TypeError("cannot enumerate points of a line over Q")
        return [self.point_at(t) for t in self.field.elements()]

    def through_origin(self) -> bool:
        return is_zero(self.base)

    def sort_key(self):
        return (self.direction, self.base)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        return f"Line(base={self.base}, dir={self.direction})"


def canonical_line(point, direction, field) -> Line:
    """Canonical line through ``point`` with the given direction."""
    _check_field(field)
    point = vector(field, point)
    direction = vector(field, direction)
    _check_same_length(point, direction)
    if is_zero(direction):
        raise InputError("degenerate direction")
    direction = normalize_direction(field, direction)
    piv = next(i for i, c in enumerate(direction) if c != 0)
    t = point[piv]
    base = tuple(field.reduce(x - t * v) for x, v in zip(point, direction))
    return Line(field, base, direction)


def line_through(p, q, field) -> Line:
    p = vector(field, p)
    q = vector(field, q)
    return canonical_line(p, tuple(field.reduce(b - a) for a, b in zip(p, q)), field)


def line_contains(line: Line, point) -> bool:
    point = vector(line.field, point)
    if len(point) != line.dim:
        raise InputError(f"dimension mismatch: point has {len(point)} coordinates, line lives in {line.dim}")
    t = point[line.pivot]
    return line.point_at(t) == point


def intersect(l1: Line, l2: Line):
    """The intersection point of two distinct lines, or None."""
    if l1.field != l2.field:
        raise InputError("mixed fields")
    if l1.direction == l2.direction:
        return None
    F = l1.field
    neg = tuple(F.reduce(-x) for x in l2.direction)
    rhs = tuple(F.reduce(b - a) for a, b in zip(l1.base, l2.base))
    sol = solve([l1.direction, neg], rhs, F)
    if sol is None:
        return None
    return l1.point_at(sol[0])


# ------------------------------------------------------------------ subspaces


@dataclass(frozen=True)
class Subspace:
    """Linear subspace of F^d stored by its reduced row-echelon basis."""

    field: object
    d: int
    basis: tuple
    pivots: tuple

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, v):
        """Residue of ``v`` after eliminating the pivot coordinates."""
        F = self.field
        v = list(v)
        for row, pc in zip(self.basis, self.pivots):
            c = v[pc]
            if c != 0:
                v = [F.reduce(a - c * b) for a, b in zip(v, row)]
        return tuple(v)

    def contains(self, v) -> bool:
        return is_zero(self.reduce(v))

    def contains_line(self, line: Line) -> bool:
        """For lines through the origin: is the line inside the subspace."""
        return self.contains(line.direction) and self.contains(line.base)

    def join(self, vectors):
        return span(list(self.basis) + list(vectors), self.field, self.d)

    def issubspace(self, other) -> bool:
        return all(other.contains(b) for b in self.basis)

    def sort_key(self):
        return (self.dim, self.basis)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, basis={list(self.basis)})"


def span(vectors, field, d=None) -> Subspace:
    vectors = [tuple(v) for v in vectors]
    if d is None:
        if not vectors:
            raise InputError("span of no vectors needs the ambient dimension")
        d = len(vectors[0])
    for v in vectors:
        if len(v) != d:
            raise InputError(f"dimension mismatch: {len(v)} != {d}")
    rows, pivots = rref(vectors, field)
    return Subspace(field, d, tuple(rows), tuple(pivots))


def zero_subspace(field, d) -> Subspace:
    return Subspace(field, d, (), ())


def extend_to_basis_pool(A, d, field):
    """Finite ``B`` containing ``A`` in which every independent subset extends
    to a basis of F^d using vectors of ``B``.

    ``B`` is ``A`` followed by the standard basis vectors that are not already
    in the span of what precedes them.
    """
    pool = []
    for v in A:
        v = vector(field, v)
        if len(v) != d:
            raise InputError(f"dimension mismatch: {len(v)} != {d}")
        if v not in pool:
            pool.append(v)
    current = span(pool, field, d)
    for e in standard_basis(field, d):
        if not current.contains(e):
            pool.append(e)
            current = current.join([e])
    return pool
