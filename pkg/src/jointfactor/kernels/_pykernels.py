"""Pure-Python versions of the enumeration kernels.

Mirrors ``_ckernels.pyx`` exactly: same arguments, same output order.
Vectors are rows of integers and all arithmetic is modulo ``p``.
"""

BACKEND = "python"


def _reduce_against(v, basis, pivots, p):
    v = list(v)
    for row, pc in zip(basis, pivots):
        c = v[pc]
        if c:
            v = [(a - c * b) % p for a, b in zip(v, row)]
    return v


def _normalized(v, p):
    for i, c in enumerate(v):
        if c:
            inv = pow(c, -1, p)
            return [(a * inv) % p for a in v], i
    return None, -1


def rank_mod_p(rows, p):
    basis, pivots = [], []
    for r in rows:
        v = _reduce_against([x % p for x in r], basis, pivots, p)
        row, pc = _normalized(v, p)
        if row is not None:
            basis.append(row)
            pivots.append(pc)
    return len(basis)


def independent_combinations_mod_p(vectors, k, p):
    """All ``k``-subsets (as index tuples, lexicographic order) of linearly
    independent vectors modulo ``p``."""
    vecs = [[x % p for x in v] for v in vectors]
    m = len(vecs)
    out = []
    if k == 0:
        return [()]
    if k > m:
        return out
    basis, pivots, prefix = [], [], []

    def dfs(start):
        depth = len(prefix)
        for i in range(start, m - (k - depth) + 1):
            v = _reduce_against(vecs[i], basis, pivots, p)
            row, pc = _normalized(v, p)
            if row is None:
                continue
            if depth + 1 == k:
                out.append(tuple(prefix) + (i,))
                continue
            basis.append(row)
            pivots.append(pc)
            prefix.append(i)
            dfs(i + 1)
            prefix.pop()
            pivots.pop()
            basis.pop()

    dfs(0)
    return out
