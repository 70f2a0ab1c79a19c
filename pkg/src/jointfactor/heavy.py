"""Per-line factor weights S for a weighted family of lines through the origin.

Lines through the origin are grouped into layers by a greedy chain of
"heavy" subspaces; each layer gets one weight rho_n, an exact root of a
rational. The resulting S satisfies ``S(l_1)...S(l_d) >= 1`` on every
independent tuple, while ``sum S f`` stays within a constant (depending on
d only) of ``(sum delta f...f)^(1/d)``.
"""

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations
from math import comb, factorial, prod

from .errors import AuditError, DegenerateError, InputError
from .geometry import Line, Subspace, canonical_line, independent_combinations, zero_subspace
from .radical import Radical


def alpha(k: int) -> int:
    """Heaviness threshold for a k-dimensional plane."""
    if k < 1:
        raise ValueError("alpha is defined for k >= 1")
    return 2 ** (k - 1)


class DirectionWeights:
    """Positive weights on finitely many lines through the origin.

    Keys may be given as ``Line`` values or as direction vectors; zero
    weights are dropped and negative ones rejected.
    """

    def __init__(self, field, d, weights):
        self.field = field
        self.d = d
        w = {}
        origin = (0,) * d
        for key, value in dict(weights).items():
            if isinstance(key, Line):
                if not key.through_origin():
                    raise InputError(f"{key!r} does not pass through the origin")
                line = key
            else:
                line = canonical_line(origin, key, field)
            if line.dim != d:
                raise InputError(f"dimension mismatch: {line.dim} != {d}")
            value = Fraction(value)
            if value < 0:
                raise InputError(f"negative weight {value} on direction {line.direction}")
            if value:
                w[line] = w.get(line, Fraction(0)) + value
        self.weights = dict(sorted(w.items()))

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, line):
        return self.weights.get(line, Fraction(0))

    def lines(self):
        return list(self.weights)

    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def scaled(self, t):
        t = Fraction(t)
        return DirectionWeights(self.field, self.d, {l: t * v for l, v in self.weights.items()})

    def mass_inside(self, sub: Subspace, exclude: Subspace = None) -> Fraction:
        return sum(
            (v for l, v in self.weights.items()
             if sub.contains(l.direction) and (exclude is None or not exclude.contains(l.direction))),
            Fraction(0),
        )

    def mass_outside(self, sub: Subspace) -> Fraction:
        return sum((v for l, v in self.weights.items() if not sub.contains(l.direction)), Fraction(0))

    def __eq__(self, other):
        return (
            isinstance(other, DirectionWeights)
            and (self.field, self.d, self.weights) == (other.field, other.d, other.weights)
        )

    def __repr__(self):
        return f"DirectionWeights({self.field}, d={self.d}, {len(self.weights)} lines)"


@dataclass
class HeavyChain:
    field: object
    d: int
    subspaces: list
    layer_masses: list  # F_1 .. F_{N+1}

    @property
    def dims(self):
        return [s.dim for s in self.subspaces]

    @property
    def N(self) -> int:
        return len(self.subspaces)

    @property
    def alphas(self):
        return [alpha(k) for k in range(1, self.d)]

    def layer_of(self, line) -> int:
        """1-based layer index: least n with the line inside pi_n, else N+1."""
        for n, sub in enumerate(self.subspaces, start=1):
            if sub.contains(line.direction):
                return n
        return self.N + 1

    def bounds(self):
        """Dimensions k_0 = 0, k_1, ..., k_N, k_{N+1} = d."""
        return [0] + self.dims + [self.d]


def _spans_above(base: Subspace, lines, max_dim):
    """All distinct spans of ``base`` plus subsets of ``lines``, grouped by
    dimension, for dimensions base.dim+1 .. max_dim."""
    levels = {}
    frontier = {base.basis: base}
    for k in range(base.dim + 1, max_dim + 1):
        nxt = {}
        for sub in frontier.values():
            for l in lines:
                if sub.contains(l.direction):
                    continue
                bigger = sub.join([l.direction])
                nxt.setdefault(bigger.basis, bigger)
        if not nxt:
            break
        levels[k] = sorted(nxt.values(), key=lambda s: s.basis)
        frontier = nxt
    return levels


def _is_heavy(f: DirectionWeights, sub: Subspace, prev: Subspace) -> bool:
    return f.mass_inside(sub, exclude=prev) > alpha(sub.dim) * f.mass_outside(sub)


def find_heavy_chain(f: DirectionWeights) -> HeavyChain:
    """Greedy maximal chain of heavy subspaces of minimal dimension at each step.

    Candidates at each step are spans of the previous plane together with
    support directions; among heavy candidates of the minimal dimension the
    one with the lexicographically least reduced basis is taken.
    """
    if len(f) == 0:
        raise InputError("empty weight system")
    d = f.d
    lines = f.lines()
    prev = zero_subspace(f.field, d)
    chain = []
    while prev.dim < d - 1:
        outside = [l for l in lines if not prev.contains(l.direction)]
        chosen = None
        for k, cands in _spans_above(prev, outside, d - 1).items():
            heavy = [s for s in cands if _is_heavy(f, s, prev)]
            if heavy:
                chosen = heavy[0]
                break
        if chosen is None:
            break
        chain.append(chosen)
        prev = chosen
    masses = []
    below = None
    for sub in chain:
        masses.append(f.mass_inside(sub, exclude=below))
        below = sub
    masses.append(f.mass_outside(below) if below is not None else f.total())
    return HeavyChain(f.field, d, chain, masses)


def rho_weights(chain: HeavyChain, d: int = None):
    """Layer weights rho_1..rho_{N+1} as exact roots.

    ``rho_n = F_n^{-1} prod_m F_m^{(k_m - k_{m-1})/d}``; all zero when the
    top layer is empty.
    """
    d = chain.d if d is None else d
    if chain.N == 0:
        raise DegenerateError("empty chain: use S = 1 branch")
    F = chain.layer_masses
    if any(m == 0 for m in F[:-1]):
        raise DegenerateError("zero mass in a heavy layer")
    if F[-1] == 0:
        return [Radical(0) for _ in F]
    ks = chain.bounds()
    P_d = prod(F[m] ** (ks[m + 1] - ks[m]) for m in range(len(F)))  # P^d
    return [Radical(P_d / F[n] ** d, d) for n in range(len(F))]


@dataclass
class SWeights:
    chain: HeavyChain
    rho: list
    values: dict  # Line -> Radical
    all_in_hyperplane: bool = False

    def __call__(self, line) -> Radical:
        return self.values[line]

    def worst_product(self) -> Radical:
        """prod_n rho_n^(k_n - k_{n-1}), the smallest admissible product."""
        ks = self.chain.bounds()
        out = Radical(1)
        for n, r in enumerate(self.rho):
            out = out * r ** (ks[n + 1] - ks[n])
        return out


def build_S(f: DirectionWeights) -> SWeights:
    chain = find_heavy_chain(f)
    if chain.N == 0:
        rho = [Radical(1)]
        return SWeights(chain, rho, {l: rho[0] for l in f.lines()})
    rho = rho_weights(chain)
    flat = chain.layer_masses[-1] == 0
    values = {l: rho[chain.layer_of(l) - 1] for l in f.lines()}
    return SWeights(chain, rho, values, all_in_hyperplane=flat)


@dataclass
class Admissibility:
    ok: bool
    witness: tuple = None
    checked: int = 0

    def __bool__(self):
        return self.ok


def verify_admissibility(S: SWeights, f: DirectionWeights) -> Admissibility:
    """Check ``S(l_1)...S(l_d) >= 1`` on every independent d-subset of supp f.

    The product is symmetric, so unordered subsets suffice; the witness is
    the lexicographically first failing subset.
    """
    lines = f.lines()
    d = f.d
    ids = {}
    labels = []
    for l in lines:
        labels.append(ids.setdefault(S.values[l], len(ids)))
    by_id = {i: v for v, i in ids.items()}
    verdict = {}
    checked = 0
    for combo in independent_combinations([l.direction for l in lines], d, f.field):
        checked += 1
        key = tuple(sorted(labels[i] for i in combo))
        ok = verdict.get(key)
        if ok is None:
            p = Radical(1)
            for i in key:
                p = p * by_id[i]
            ok = verdict[key] = p >= 1
        if not ok:
            return Admissibility(False, tuple(lines[i] for i in combo), checked)
    return Admissibility(True, None, checked)


def independent_mass(f: DirectionWeights) -> Fraction:
    """sum over ordered independent d-tuples of f(l_1)...f(l_d)."""
    lines = f.lines()
    total = sum(
        (prod(f[lines[i]] for i in combo)
         for combo in independent_combinations([l.direction for l in lines], f.d, f.field)),
        Fraction(0),
    )
    return factorial(f.d) * total


def main_estimate_ratio(S: SWeights, f: DirectionWeights) -> float:
    """(sum_l S(l) f(l)) / (sum delta f...f)^(1/d)."""
    T = independent_mass(f)
    terms = [(S.values[l], v) for l, v in f.weights.items()]
    if T == 0:
        if all(s.is_zero() for s, _ in terms):
            return 0.0
        raise DegenerateError("degenerate: zero independent mass but positive S·f sum")
    num = sum(float(s) * float(v) for s, v in terms)
    return num / float(Radical(T, f.d))


# --------------------------------------------------------------- constants


def lightness_factor(k: int) -> Fraction:
    """Worst ratio inside/inside-complement for a light plane strictly below
    a heavy k-plane: alpha_{k-1} (alpha_k + 1) / (alpha_k - alpha_{k-1})."""
    if k < 2:
        raise ValueError("needs k >= 2")
    a, b = alpha(k - 1), alpha(k)
    return Fraction(a * (b + 1), b - a)


def layer_constant(r: int, c) -> Fraction:
    """beta for a layer of relative dimension r whose intermediate planes
    satisfy inside <= c * (rest of the layer)."""
    c = Fraction(c)
    total = Fraction(1)
    for a in range(1, r):
        total += prod((comb(r, b) * c for b in range(a, r)), start=Fraction(1))
    return total


def _light_constants(d, dims):
    ks = [0] + list(dims) + [d]
    out = []
    for n in range(1, len(ks)):
        if n <= len(dims):
            out.append(lightness_factor(ks[n]) if ks[n] >= 2 else Fraction(0))
        else:
            out.append(Fraction(alpha(d - 1)))
    return out


def chain_bound(d, dims) -> float:
    """(N+1) (prod beta_n)^(1/d) for a chain with the given dimensions."""
    ks = [0] + list(dims) + [d]
    cs = _light_constants(d, dims)
    betas = [layer_constant(ks[n + 1] - ks[n], cs[n]) for n in range(len(cs))]
    return (len(dims) + 1) * float(Radical(prod(betas, start=Fraction(1)), d))


def estimate_constant(d: int) -> float:
    """B_d: the worst chain bound over every possible set of chain dimensions."""
    best = 0.0
    for size in range(d):
        for dims in combinations(range(1, d), size):
            best = max(best, chain_bound(d, dims))
    return best


@dataclass
class LevelAudit:
    n: int
    k_below: int
    k: int
    lemma_factor: Fraction  # None when no plane fits strictly between
    worst_factor: Fraction  # None when nothing was checked
    planes_checked: int


@dataclass
class ConstantLedger:
    d: int
    dims: list
    levels: list = dc_field(default_factory=list)
    light_constants: list = dc_field(default_factory=list)
    betas: list = dc_field(default_factory=list)
    instance_bound: float = 0.0
    B_d: float = 0.0


def _relative_independent_count(f, lines, below: Subspace, r):
    """r! * sum over r-subsets of ``lines`` independent modulo ``below``."""
    if r == 0:
        return Fraction(1)
    residues = [below.reduce(l.direction) for l in lines]
    s = sum(
        (prod(f[lines[i]] for i in combo)
         for combo in independent_combinations(residues, r, f.field)),
        Fraction(0),
    )
    return factorial(r) * s


def lightness_audit(f: DirectionWeights, chain: HeavyChain) -> ConstantLedger:
    """Re-check the lightness inequalities the chain guarantees and collect
    the constants of the main estimate.

    Raises AuditError on any violation.
    """
    d = f.d
    lines = f.lines()
    dims = chain.dims
    ks = chain.bounds()
    ledger = ConstantLedger(d, dims)
    ledger.light_constants = _light_constants(d, dims)
    subs = [zero_subspace(f.field, d)] + list(chain.subspaces)
    full = None  # stands for F^d

    for n in range(1, chain.N + 2):
        below = subs[n - 1]
        top = subs[n] if n <= chain.N else full
        k, k_below = ks[n], ks[n - 1]
        inside_top = lambda l: top is None or top.contains(l.direction)
        layer = [l for l in lines if inside_top(l) and not below.contains(l.direction)]
        factor = lightness_factor(k) if n <= chain.N and k >= 2 else None
        if factor is not None and factor > 4 * alpha(k - 1):
            raise AuditError(f"lemma factor {factor} exceeds 4*alpha_{k - 1}")
        worst = None
        checked = 0
        max_dim = k - 1 if n <= chain.N else d - 1
        for dim, cands in _spans_above(below, layer, max_dim).items():
            for pi in cands:
                checked += 1
                inside = f.mass_inside(pi, exclude=below)
                outside = f.mass_outside(pi)
                if n <= chain.N:
                    # minimality of k_n: pi is not heavy
                    if inside > alpha(dim) * outside:
                        raise AuditError(f"plane {pi} of dim {dim} is heavy below pi_{n}")
                    if inside > alpha(k - 1) * outside:
                        raise AuditError(f"lightness fails at {pi}")
                    rest = sum((f[l] for l in layer if not pi.contains(l.direction)), Fraction(0))
                    c = factor
                else:
                    # maximality: no heavy plane above pi_N
                    if inside > alpha(dim) * outside:
                        raise AuditError(f"chain not maximal: {pi} is heavy")
                    rest = outside
                    c = Fraction(alpha(d - 1))
                if inside > c * rest:
                    raise AuditError(f"improved lightness fails at {pi}: {inside} > {c} * {rest}")
                if rest:
                    ratio = inside / rest
                    worst = ratio if worst is None or ratio > worst else worst
        ledger.levels.append(LevelAudit(n, k_below, k, factor, worst, checked))

    # layer bounds F_n^r <= beta_n * G_n
    for n in range(1, chain.N + 2):
        below = subs[n - 1]
        top = subs[n] if n <= chain.N else full
        r = ks[n] - ks[n - 1]
        layer = [l for l in lines
                 if (top is None or top.contains(l.direction)) and not below.contains(l.direction)]
        beta = layer_constant(r, ledger.light_constants[n - 1])
        ledger.betas.append(beta)
        F = chain.layer_masses[n - 1]
        G = _relative_independent_count(f, layer, below, r)
        if F**r > beta * G:
            raise AuditError(f"layer {n}: F^r = {F ** r} exceeds beta * G = {beta * G}")
    ledger.instance_bound = (chain.N + 1) * float(Radical(prod(ledger.betas, start=Fraction(1)), d))
    ledger.B_d = estimate_constant(d)
    if chain.N == 0:
        ledger.levels = []
    return ledger
