"""Seeded generators for line families, weights and duality instances."""

from fractions import Fraction
from itertools import combinations_with_replacement, product
import random

from .duality import DiscreteInstance
from .geometry import canonical_line, is_zero, standard_basis
from .heavy import DirectionWeights
from .joints import LineFamily, MultiFamily


def grid_family(n, d, field) -> LineFamily:
    """Axis-parallel lines through the grid {0..n-1}^d: d * n^(d-1) lines."""
    fam = LineFamily(field, d)
    for axis, e in enumerate(standard_basis(field, d)):
        for rest in product(range(n), repeat=d - 1):
            point = list(rest[:axis]) + [0] + list(rest[axis:])
            fam.add(canonical_line(point, e, field))
    return fam


def grid_multifamily(n, d, field) -> MultiFamily:
    """Grid lines split by direction: family j holds the lines parallel to e_j."""
    fams = [LineFamily(field, d) for _ in range(d)]
    for line in grid_family(n, d, field).distinct():
        fams[line.pivot].add(line)
    return MultiFamily(fams)


def grid_points(n, d, field):
    return [tuple(field(c) for c in p) for p in product(range(n), repeat=d)]


def _random_direction(rng, field, d):
    while True:
        v = tuple(field(rng.randrange(field.p)) for _ in range(d))
        if not is_zero(v):
            return v


def random_lines(seed, field, d, count) -> LineFamily:
    """``count`` lines, each through a uniform point with a uniform direction."""
    rng = random.Random(seed)
    fam = LineFamily(field, d)
    for _ in range(count):
        point = tuple(rng.randrange(field.p) for _ in range(d))
        fam.add(canonical_line(point, _random_direction(rng, field, d), field))
    return fam


def random_weights(seed, field, d, count, max_weight=100) -> DirectionWeights:
    """Up to ``count`` distinct origin lines with uniform integer weights in [1, max_weight]."""
    rng = random.Random(seed)
    w = {}
    for _ in range(count):
        w[canonical_line((0,) * d, _random_direction(rng, field, d), field)] = rng.randint(1, max_weight)
    return DirectionWeights(field, d, w)


def planted_heavy_weights(seed, field, d, count, max_weight=100) -> DirectionWeights:
    """Random weights where the lines inside a random hyperplane-or-smaller
    subspace carry most of the mass, so nonempty chains are common."""
    from .geometry import span

    rng = random.Random(seed)
    k = rng.randint(1, d - 1)
    basis = [_random_direction(rng, field, d) for _ in range(k)]
    sub = span(basis, field, d)
    w = {}
    for _ in range(count):
        if rng.random() < 0.6 and sub.dim:
            coeffs = [field(rng.randrange(field.p)) for _ in sub.basis]
            v = tuple(field.reduce(sum(c * b[i] for c, b in zip(coeffs, sub.basis))) for i in range(d))
            if is_zero(v):
                continue
            weight = rng.randint(max_weight // 2, max_weight)
        else:
            v = _random_direction(rng, field, d)
            weight = rng.randint(1, max(1, max_weight // 10))
        w[canonical_line((0,) * d, v, field)] = weight
    if not w:
        w[canonical_line((0,) * d, _random_direction(rng, field, d), field)] = 1
    return DirectionWeights(field, d, w)


def random_instance(seed, d, nx, ny, symmetric=False, density=0.5, max_value=5,
                    random_density=True) -> DiscreteInstance:
    """Random saturated instance with small integer data."""
    rng = random.Random(seed)
    X = [f"x{i}" for i in range(nx)]
    mu = {x: rng.randint(1, 4) for x in X}
    M = {x: (rng.randint(1, 3) if random_density else 1) for x in X}
    if symmetric:
        Y = [f"y{i}" for i in range(ny)]
        w = {y: rng.randint(1, 3) for y in Y}
        tuples = list(combinations_with_replacement(Y, d))
        kernel = {}
        for x in X:
            chosen = [t for t in tuples if rng.random() < density] or [rng.choice(tuples)]
            for t in chosen:
                kernel[(x, t)] = rng.randint(1, max_value)
        return DiscreteInstance(d, X, mu, Y, w, kernel, M, 1, symmetric=True)
    Ys = [[f"y{j}_{i}" for i in range(rng.randint(1, ny))] for j in range(d)]
    ws = [{y: rng.randint(1, 3) for y in Yj} for Yj in Ys]
    tuples = list(product(*Ys))
    kernel = {}
    for x in X:
        chosen = [t for t in tuples if rng.random() < density] or [rng.choice(tuples)]
        for t in chosen:
            kernel[(x, t)] = rng.randint(1, max_value)
    return DiscreteInstance(d, X, mu, Ys, ws, kernel, M, 1)


def random_rational(rng, lo=1, hi=10):
    return Fraction(rng.randint(lo * 4, hi * 4), rng.randint(1, 4))
