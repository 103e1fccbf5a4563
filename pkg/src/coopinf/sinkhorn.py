"""Sinkhorn iteration: uniform (row sums 1, column sums 1) scaling of arbitrary
non-negative matrices to a stable pair, scalar (r, c) scaling, and the
entropic optimal-transport kernel.

A sweep is one row normalization followed by one column normalization; sweep
``k`` produces the pair ``(L^k, T^k)``.  Iteration stops at the first ``k``
with ``max|L^k - L^{k+1}| <= tol`` and returns ``(L^k, T^k)``.

Entries that lie outside the support of the limit only slow the iteration
down (from linear to sublinear convergence) without changing the limit, so
:func:`sinkhorn` removes them up front by default (``prune=True``); this is
what lets a successive-iterate test at ``tol`` also bound the distance to the
limit.  ``prune=False`` gives the textbook iteration on ``m`` itself.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import AllForbidden, DimensionMismatch, InconsistentFactors, MassImbalance, NoTotalSupport
from .matrix import (
    DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
    TAU_NORM,
    as_matrix,
    col_normalize,
    matrix_distance,
    pattern,
    row_normalize,
)
from .patterns import apply_max_pattern, limit_support

#: relative reconstruction tolerance for diagonal scalings
TAU_SCALE = 1e-8


@dataclass(frozen=True)
class StablePair:
    L: np.ndarray  # row-normalized (learner)
    T: np.ndarray  # column-normalized (teacher)


@dataclass(frozen=True)
class SinkhornResult:
    limit: StablePair
    iterations: int
    residual: float
    converged: bool
    history: list | None = None
    pruned_entries: int = 0

    @property
    def L(self):
        return self.limit.L

    @property
    def T(self):
        return self.limit.T

    def to_dict(self):
        out = {
            "L": self.L,
            "T": self.T,
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
            "pruned_entries": self.pruned_entries,
        }
        if self.history is not None:
            out["history"] = self.history
        return out


def sinkhorn(m, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS, *, prune=True, history=False):
    """Alternate row and column normalization of ``m`` until successive
    row-normalized iterates differ by at most ``tol``.

    Hitting ``max_iters`` is not an error: the last pair is returned with
    ``converged=False``.
    """
    m = as_matrix(m)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    work, pruned = m, 0
    if prune:
        keep = limit_support(m)
        pruned = int(np.count_nonzero(pattern(m) & ~keep))
        if pruned:
            work = np.where(keep, m, 0.0)
    L = row_normalize(work)
    T = col_normalize(L)
    trace = [] if history else None
    converged = False
    for k in range(1, max_iters + 1):
        L_next = row_normalize(T)
        residual = matrix_distance(L, L_next)
        if trace is not None:
            trace.append(residual)
        if residual <= tol:
            converged = True
            break
        if k == max_iters:
            break
        L = L_next
        T = col_normalize(L)
    return SinkhornResult(StablePair(L, T), k, residual, converged, trace, pruned)


def sinkhorn_on_pattern(m, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS, *, history=False):
    """Plain Sinkhorn iteration on M-bar (see :func:`~coopinf.patterns.apply_max_pattern`)."""
    return sinkhorn(apply_max_pattern(m), tol, max_iters, prune=False, history=history)


def block_structure(L):
    """Connected components of the support of a stable ``L`` as ``(rows, cols)`` pairs.

    Up to row/column permutation a stable matrix is block diagonal with these
    blocks; each is row-normalized with all column sums ``len(rows)/len(cols)``.
    """
    mask = pattern(L)
    u, v = mask.shape
    ri, ci = np.nonzero(mask)
    graph = csr_matrix((np.ones(ri.size), (ri, u + ci)), shape=(u + v, u + v))
    _, labels = connected_components(graph, directed=False)
    blocks = []
    for lab in np.unique(labels):
        rows = tuple(int(i) for i in np.flatnonzero(labels[:u] == lab))
        cols = tuple(int(j) for j in np.flatnonzero(labels[u:] == lab))
        blocks.append((rows, cols))
    return sorted(blocks)


def block_column_sum_error(L):
    """Largest deviation of a column sum from its block's ``u_i / v_i``."""
    L = np.asarray(L)
    sums = L.sum(axis=0)
    err = 0.0
    for rows, cols in block_structure(L):
        if rows and cols:
            err = max(err, float(np.max(np.abs(sums[list(cols)] - len(rows) / len(cols)))))
    return err


def extract_scaling(m, limit):
    """Positive ``x, y`` with ``m[i, j] = x[i] * limit[i, j] * y[j]``.

    The factors are propagated along a spanning tree of each connected
    component of the support; in every component the largest-index column gets
    ``y = 1``.  Remaining edges are checked afterwards.
    """
    m = as_matrix(m)
    limit = np.asarray(limit, dtype=np.float64)
    if limit.shape != m.shape:
        raise DimensionMismatch(f"shapes differ: {m.shape} vs {limit.shape}")
    if not np.array_equal(pattern(m), pattern(limit)):
        raise NoTotalSupport("m and its limit have different patterns (m lacks total support)")
    u, v = m.shape
    x = np.zeros(u)
    y = np.zeros(v)
    rows_of = [np.flatnonzero(m[:, j] > 0) for j in range(v)]
    cols_of = [np.flatnonzero(m[i] > 0) for i in range(u)]
    for root in range(v - 1, -1, -1):
        if y[root]:
            continue
        y[root] = 1.0
        queue = [("c", root)]
        for kind, idx in queue:
            if kind == "c":
                for i in rows_of[idx]:
                    if not x[i]:
                        x[i] = m[i, idx] / (limit[i, idx] * y[idx])
                        queue.append(("r", i))
            else:
                for j in cols_of[idx]:
                    if not y[j]:
                        y[j] = m[idx, j] / (x[idx] * limit[idx, j])
                        queue.append(("c", j))
    err = scaling_residual(m, limit, x, y)
    if err > TAU_SCALE:
        raise InconsistentFactors(f"relative reconstruction error {err:.3g} exceeds {TAU_SCALE}")
    return x, y


def scaling_residual(m, limit, x, y):
    recon = x[:, None] * np.asarray(limit) * y[None, :]
    return float(np.max(np.abs(recon - m)) / np.max(m))


@dataclass(frozen=True)
class ScalarSinkhornResult:
    plan: np.ndarray
    iterations: int
    residual: float  # max |row sum - r| after the last column scaling
    converged: bool
    history: list | None = field(default=None)

    def to_dict(self):
        out = {
            "plan": self.plan,
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
        }
        if self.history is not None:
            out["history"] = self.history
        return out


def scalar_sinkhorn(m, r, c, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS, *, history=False):
    """Scale ``m`` towards row sums ``r`` and column sums ``c``.

    Convergence is not guaranteed for sparse ``m``; failure to bring the row
    marginals within ``tol`` after ``max_iters`` sweeps is reported through
    ``converged=False``.
    """
    m = as_matrix(m)
    r = np.asarray(r, dtype=np.float64).ravel()
    c = np.asarray(c, dtype=np.float64).ravel()
    if r.size != m.shape[0] or c.size != m.shape[1]:
        raise DimensionMismatch(
            f"marginals of length {r.size}, {c.size} do not fit a {m.shape} matrix"
        )
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(c)) and np.all(r > 0) and np.all(c > 0)):
        raise ValueError("marginals must be positive and finite")
    if abs(r.sum() - c.sum()) > TAU_NORM * max(1.0, r.sum()):
        raise MassImbalance(f"sum(r) = {r.sum()!r} but sum(c) = {c.sum()!r}")
    plan = m
    trace = [] if history else None
    for k in range(1, max_iters + 1):
        plan = plan * (r / plan.sum(axis=1))[:, None]
        plan = plan * (c / plan.sum(axis=0))[None, :]
        residual = float(np.max(np.abs(plan.sum(axis=1) - r)))
        if trace is not None:
            trace.append(residual)
        if residual <= tol:
            return ScalarSinkhornResult(plan, k, residual, True, trace)
    return ScalarSinkhornResult(plan, max_iters, residual, False, trace)


def entropic_kernel(cost, lam):
    """``exp(-lam * cost)`` elementwise; ``+inf`` cost (forbidden transport) maps to 0."""
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise DimensionMismatch(f"cost must be 2-D, got shape {cost.shape}")
    if not lam > 0 or not np.isfinite(lam):
        raise ValueError("lambda must be positive and finite")
    if np.any(np.isnan(cost)) or np.any(cost == -np.inf):
        raise ValueError("cost entries must be finite or +inf")
    forbidden = np.isinf(cost)
    if np.any(forbidden.all(axis=1)):
        raise AllForbidden(f"row {int(np.flatnonzero(forbidden.all(axis=1))[0])} is entirely +inf")
    if np.any(forbidden.all(axis=0)):
        raise AllForbidden(f"column {int(np.flatnonzero(forbidden.all(axis=0))[0])} is entirely +inf")
    with np.errstate(over="ignore"):
        k = np.where(forbidden, 0.0, np.exp(-lam * np.where(forbidden, 0.0, cost)))
    return as_matrix(k, name="kernel")


def entropic_transport(cost, lam, r=None, c=None, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Entropic transport plan for ``cost``.

    Without marginals the plan is ``L / u`` from the uniform iteration, whose
    limit always exists; it has row sums ``1/u`` and, when attainable, column
    sums ``1/v``.  If either marginal is given, the missing one is taken
    uniform with the same total mass and the scalar iteration is used.
    """
    cost = np.asarray(cost, dtype=np.float64)
    kernel = entropic_kernel(cost, lam)
    u, v = kernel.shape
    finite_cost = np.where(np.isinf(cost), 0.0, cost)
    if r is None and c is None:
        res = sinkhorn(kernel, tol, max_iters)
        plan = res.L / u
        attained = bool(np.max(np.abs(plan.sum(axis=0) - 1.0 / v)) <= 10 * tol)
        return {
            "plan": plan,
            "mode": "uniform",
            "cost": float(np.sum(plan * finite_cost)),
            "marginals_attained": attained,
            "iterations": res.iterations,
            "residual": res.residual,
            "converged": res.converged,
        }
    if r is None:
        r = np.full(u, np.sum(c) / u)
    if c is None:
        c = np.full(v, np.sum(r) / v)
    res = scalar_sinkhorn(kernel, r, c, tol, max_iters)
    out = res.to_dict()
    out["mode"] = "scalar"
    out["cost"] = float(np.sum(res.plan * finite_cost))
    return out
