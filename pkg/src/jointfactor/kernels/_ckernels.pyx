# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration kernels (arithmetic modulo p < 2^31 in int64)."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

BACKEND = "cython"


cdef inline int64_t _mod(int64_t a, int64_t p) nogil:
    a %= p
    if a < 0:
        a += p
    return a


cdef int64_t _inv(int64_t a, int64_t p) nogil:
    # extended Euclid; a is nonzero mod p
    cdef int64_t t = 0, newt = 1, r = p, newr = a, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += p
    return t


cdef int _push(int64_t[:, :] basis, int64_t[:] pivots, int depth,
               int64_t[:] v, int64_t[:] work, int d, int64_t p) nogil:
    """Reduce v against basis[:depth]; if nonzero store it as row ``depth``.

    Returns 1 when the row was added.
    """
    cdef int i, j, pc
    cdef int64_t c, inv
    for j in range(d):
        work[j] = v[j]
    for i in range(depth):
        pc = pivots[i]
        c = work[pc]
        if c != 0:
            for j in range(d):
                work[j] = _mod(work[j] - c * basis[i, j], p)
    pc = -1
    for j in range(d):
        if work[j] != 0:
            pc = j
            break
    if pc < 0:
        return 0
    inv = _inv(work[pc], p)
    for j in range(d):
        basis[depth, j] = _mod(work[j] * inv, p)
    pivots[depth] = pc
    return 1


def rank_mod_p(rows, p):
    cdef cnp.ndarray[cnp.int64_t, ndim=2] arr = np.mod(np.asarray(rows, dtype=np.int64).reshape(len(rows), -1), p)
    cdef int m = arr.shape[0]
    cdef int d = arr.shape[1]
    if m == 0:
        return 0
    cdef int64_t[:, :] basis = np.zeros((m, d), dtype=np.int64)
    cdef int64_t[:] pivots = np.zeros(m, dtype=np.int64)
    cdef int64_t[:] work = np.zeros(d, dtype=np.int64)
    cdef int64_t[:, :] a = arr
    cdef int rank = 0, i
    for i in range(m):
        rank += _push(basis, pivots, rank, a[i], work, d, p)
    return rank


def independent_combinations_mod_p(vectors, int k, p):
    """All ``k``-subsets (index tuples, lexicographic order) of linearly
    independent vectors modulo ``p``."""
    cdef int m = len(vectors)
    if k == 0:
        return [()]
    if k > m:
        return []
    cdef cnp.ndarray[cnp.int64_t, ndim=2] arr = np.mod(np.asarray(vectors, dtype=np.int64).reshape(m, -1), p)
    cdef int d = arr.shape[1]
    cdef int64_t pp = p
    cdef int64_t[:, :] a = arr
    cdef int64_t[:, :] basis = np.zeros((k, d), dtype=np.int64)
    cdef int64_t[:] pivots = np.zeros(k, dtype=np.int64)
    cdef int64_t[:] work = np.zeros(d, dtype=np.int64)
    cdef int64_t[:] idx = np.zeros(k, dtype=np.int64)
    cdef int depth = 0
    cdef int i
    out = []
    # iterative DFS: idx[depth] is the next candidate to try at this depth
    idx[0] = 0
    while depth >= 0:
        i = idx[depth]
        if i > m - (k - depth):
            depth -= 1
            if depth >= 0:
                idx[depth] += 1
            continue
        if _push(basis, pivots, depth, a[i], work, d, pp):
            if depth + 1 == k:
                out.append(tuple([idx[j] for j in range(k)]))
                idx[depth] += 1
            else:
                depth += 1
                idx[depth] = i + 1
        else:
            idx[depth] += 1
    return out
