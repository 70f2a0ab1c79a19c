"""Log-barrier interior-point solver for min-max geometric programs.

Problem, in log variables ``u``::

    minimize   max_g  sum_{i in g} exp(a_i + u_i)
    subject to A u >= b

Every iterate is strictly feasible, so the current objective is an upper
bound. Each outer iteration also produces a lower bound from the barrier
multipliers through an explicit Lagrangian dual function, which makes the
stopping rule a certified relative gap.
"""

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .errors import ConvergenceError


@dataclass
class GPProblem:
    n: int
    groups: list  # [(index array, log-coefficient array)]
    A: object  # sparse (m, n), nonnegative entries
    b: np.ndarray
    blocks: list = None  # [(var index array, row index array)], separable pieces


@dataclass
class GPResult:
    u: np.ndarray
    upper: float
    lower: float
    history: list = field(default_factory=list)  # (lower, upper) per outer iteration
    newton_steps: int = 0
    group_weights: np.ndarray = None  # normalized multipliers of the groups
    row_weights: np.ndarray = None
    converged: bool = True

    @property
    def iterations(self):
        return len(self.history)


def _group_ids(problem):
    gid = np.full(problem.n, -1)
    coef = np.zeros(problem.n)
    for g, (idx, a) in enumerate(problem.groups):
        if np.any(gid[idx] >= 0):
            raise ValueError("a variable belongs to two groups")
        gid[idx] = g
        coef[idx] = a
    return gid, coef


def _group_lse(problem, u):
    """Per-group log-sum-exp and within-group softmax, vectorized."""
    gid, coef = problem._gid, problem._coef
    G = len(problem.groups)
    z = coef + u
    m = np.full(G, -np.inf)
    np.maximum.at(m, gid, z)
    e = np.exp(z - m[gid])
    tot = np.bincount(gid, weights=e, minlength=G)
    return m + np.log(tot), e / tot[gid]


def _objective(problem, u):
    return float(np.exp(_group_lse(problem, u)[0]).max())


def _initial_point(problem):
    A = problem.A
    u = np.zeros(problem.n)
    row_sums = np.asarray(A.sum(axis=1)).ravel()
    need = (problem.b + 1.0) / row_sums
    blocks = problem.blocks or [(np.arange(problem.n), np.arange(A.shape[0]))]
    for vars_, rows in blocks:
        if len(rows):
            u[vars_] = max(0.0, float(need[rows].max()))
    return u, float(_group_lse(problem, u)[0].max()) + 1.0


def _barrier(problem, t, u, s):
    slack = problem.A @ u - problem.b
    if slack.size and slack.min() <= 0:
        return math.inf
    r = s - _group_lse(problem, u)[0]
    if r.min() <= 0:
        return math.inf
    return t * s - np.log(slack).sum() - np.log(r).sum()


def _newton_direction(problem, t, u, s):
    A, n = problem.A, problem.n
    gid = problem._gid
    G = len(problem.groups)
    slack = A @ u - problem.b
    inv = 1.0 / slack
    L, p = _group_lse(problem, u)
    r = s - L
    rg = r[gid]
    grad_u = -(A.T @ inv) + p / rg
    grad_s = t - float(np.sum(1.0 / r))
    P = sp.csr_matrix((p, (np.arange(n), gid)), shape=(n, G))
    H_uu = A.T @ sp.diags(inv * inv) @ A + sp.diags(p / rg) + P @ sp.diags(1.0 / r**2 - 1.0 / r) @ P.T
    h_us = -p / rg**2
    h_ss = float(np.sum(1.0 / r**2))
    grad = np.append(grad_u, grad_s)
    if n <= 1500:
        H = np.empty((n + 1, n + 1))
        H[:n, :n] = H_uu.toarray()
        H[:n, n] = H[n, :n] = h_us
        H[n, n] = h_ss
        try:
            step = np.linalg.solve(H, -grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, -grad, rcond=None)[0]
        return step, grad
    col = sp.csr_matrix(h_us.reshape(-1, 1))
    H = sp.bmat([[H_uu, col], [col.T, sp.csr_matrix([[h_ss]])]]).tocsc()
    step = spsolve(H, -grad)
    if not np.all(np.isfinite(step)):
        step = np.linalg.lstsq(H.toarray(), -grad, rcond=None)[0]
    return step, grad


def _center(problem, t, u, s, max_steps, counter):
    f0 = _barrier(problem, t, u, s)
    for _ in range(max_steps):
        step, grad = _newton_direction(problem, t, u, s)
        dec = -float(grad @ step)
        if dec < 0:  # numerical trouble; fall back to gradient descent
            step, dec = -grad, float(grad @ grad)
        if dec / 2 <= 1e-10:
            return u, s, True
        h = 1.0
        while True:
            u1 = u + h * step[:-1]
            s1 = s + h * step[-1]
            f1 = _barrier(problem, t, u1, s1)
            if f1 <= f0 - 0.25 * h * dec:
                break
            h *= 0.5
            if h < 1e-12:
                return u, s, False
        counter[0] += 1
        if f0 - f1 <= 1e-14 * max(1.0, abs(f0)):
            # no measurable progress left in double precision
            return u1, s1, True
        u, s, f0 = u1, s1, f1
    return u, s, False


def _lower_bound(problem, t, u, s):
    """Value of the Lagrangian dual function at the barrier multipliers.

    With group weights beta (normalized) and row weights lambda, each
    separable block contributes ``max_k k*Q - k*log(k)*S = S*exp(Q/S - 1)``
    where ``Q = lambda.b + sum(s_i - s_i log(s_i/c_i))``, ``s = A^T lambda``
    and ``c_i = beta_g exp(a_i)``.
    """
    A = problem.A
    slack = A @ u - problem.b
    lam = 1.0 / (t * slack)
    beta = 1.0 / (t * (s - _group_lse(problem, u)[0]))
    beta = beta / beta.sum()
    log_c = np.log(beta)[problem._gid] + problem._coef
    marg = A.T @ lam
    blocks = problem.blocks or [(np.arange(problem.n), np.arange(A.shape[0]))]
    total = 0.0
    for vars_, rows in blocks:
        sv = marg[vars_]
        S = float(sv.sum())
        if S <= 0:
            continue
        pos = sv > 0
        Q = float(lam[rows] @ problem.b[rows])
        Q += float(np.sum(sv[pos] - sv[pos] * (np.log(sv[pos]) - log_c[vars_][pos])))
        total += S * math.exp(Q / S - 1.0)
    return total, beta, lam


def solve_gp(problem: GPProblem, tol=1e-9, accept=1e-6, mu=8.0, max_outer=80,
             max_newton=100, strict=True) -> GPResult:
    """Minimize the max of the group sums subject to ``A u >= b``.

    Aims for a certified relative gap ``tol``; stops early once the gap has
    not improved for several outer iterations (double precision is
    exhausted). A final gap above ``accept`` raises ConvergenceError with the
    best bound pair, or with ``strict=False`` returns the last (feasible)
    iterate flagged ``converged=False``.
    """
    if not problem.groups:
        return GPResult(np.zeros(problem.n), 0.0, 0.0)
    if problem.A.shape[0] == 0:
        # nothing forces any variable up: the infimum is 0
        return GPResult(np.full(problem.n, -np.inf), 0.0, 0.0)
    problem._gid, problem._coef = _group_ids(problem)
    u, s = _initial_point(problem)
    # the central path is scaled by the number of barrier terms
    t = max(1.0, (problem.A.shape[0] + len(problem.groups)) / max(1.0, abs(s)))
    history = []
    best_lower, best_upper = 0.0, math.inf
    best_gap, stale = math.inf, 0
    counter = [0]
    beta = lam = None
    for _ in range(max_outer):
        u, s, _centered = _center(problem, t, u, s, max_newton, counter)
        upper = _objective(problem, u)
        lower, beta, lam = _lower_bound(problem, t, u, s)
        history.append((lower, upper))
        best_lower = max(best_lower, lower)
        best_upper = min(best_upper, upper)
        gap = (best_upper - best_lower) / best_upper
        if gap <= tol:
            break
        if gap < best_gap * 0.9:
            best_gap, stale = gap, 0
        else:
            stale += 1
            if stale >= 4:
                break
        t *= mu
    converged = (best_upper - best_lower) <= accept * best_upper
    if not converged and strict:
        raise ConvergenceError("barrier method did not reach its tolerance", best_lower, best_upper)
    return GPResult(u, _objective(problem, u), best_lower, history, counter[0], beta, lam,
                    converged=converged)
