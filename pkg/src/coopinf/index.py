"""Cooperative index, its structural lower bounds, and Birkhoff-von Neumann
decomposition of doubly stochastic matrices."""

from dataclasses import dataclass
import warnings

import numpy as np

from .errors import InvariantViolation, LimitExceeded, NoPerfectMatching, NoPositiveDiagonal
from .matrix import DEFAULT_MAX_ITERS, DEFAULT_TOL, as_square, check_doubly_stochastic, pattern
from .patterns import (
    DEFAULT_DIAG_LIMIT,
    _on_diagonal_mask,
    enumerate_diagonals,
    max_matching,
    perfect_matching,
)
from .sinkhorn import sinkhorn

TAU_BVN = 1e-9


class LowConfidence(UserWarning):
    """The Sinkhorn iteration behind a result stopped at ``max_iters``."""


def ci_from_pair(L, T):
    """``sum(L * T) / v`` for a stable pair of ``u x v`` matrices."""
    L = np.asarray(L)
    return float(np.sum(L * np.asarray(T)) / L.shape[1])


def cooperative_index(m, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Cooperative index of ``m`` from its Sinkhorn limit; warns with
    :class:`LowConfidence` if the iteration did not converge."""
    res = sinkhorn(m, tol, max_iters)
    if not res.converged:
        warnings.warn(
            f"Sinkhorn stopped after {res.iterations} sweeps with residual {res.residual:.3g}",
            LowConfidence,
            stacklevel=2,
        )
    return ci_from_pair(res.L, res.T)


@dataclass(frozen=True)
class CIBounds:
    ci: float
    n: int
    d: int | None
    eta: int
    tau: int
    eta_bar: int
    bound_uniform: float
    bound_diagonals: float | None
    bound_structural: float
    bound_structural_bar: float
    diag_skip_reason: str | None = None
    converged: bool = True

    def bounds(self):
        """All lower bounds that were computed."""
        out = [self.bound_structural_bar, self.bound_structural, self.bound_uniform]
        if self.bound_diagonals is not None:
            out.append(self.bound_diagonals)
        return out

    def to_dict(self):
        return {
            "ci": self.ci,
            "uniform": self.bound_uniform,
            "diagonals": self.bound_diagonals,
            "structural": self.bound_structural,
            "structural_bar": self.bound_structural_bar,
            "n": self.n,
            "d": self.d,
            "eta": self.eta,
            "eta_bar": self.eta_bar,
            "tau": self.tau,
            "diag_skip_reason": self.diag_skip_reason,
            "converged": self.converged,
        }


def ci_bounds(m, diag_limit=DEFAULT_DIAG_LIMIT, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Exact CI together with the three lower bounds ``1/n``, ``1/d`` and
    ``1/(eta - 2n + tau + 1)``.

    ``eta`` counts the positive entries of the input; ``eta_bar`` those of
    M-bar, which gives the tighter ``bound_structural_bar``.  ``tau`` is the
    number of fully indecomposable components.  When more than ``diag_limit``
    positive diagonals exist the ``1/d`` bound is omitted.
    """
    m = as_square(m)
    n = m.shape[0]
    mask = pattern(m)
    perm = perfect_matching(mask)
    if perm is None:
        raise NoPositiveDiagonal("square matrix has no positive diagonal")
    on, tau = _on_diagonal_mask(mask, perm)
    eta, eta_bar = int(mask.sum()), int(on.sum())
    d, bound_d, reason = None, None, None
    try:
        d = len(enumerate_diagonals(m, diag_limit))
        bound_d = 1.0 / d
    except LimitExceeded as exc:
        reason = str(exc)
    res = sinkhorn(m, tol, max_iters)
    return CIBounds(
        ci=ci_from_pair(res.L, res.T),
        n=n,
        d=d,
        eta=eta,
        tau=int(tau),
        eta_bar=eta_bar,
        bound_uniform=1.0 / n,
        bound_diagonals=bound_d,
        bound_structural=1.0 / (eta - 2 * n + tau + 1),
        bound_structural_bar=1.0 / (eta_bar - 2 * n + tau + 1),
        diag_skip_reason=reason,
        converged=res.converged,
    )


@dataclass(frozen=True)
class BvNDecomposition:
    terms: list  # (theta, perm) pairs, lexicographic in perm
    n: int
    term_bound: int  # eta + tau - 2n + 1 of the decomposed matrix

    @property
    def thetas(self):
        return np.array([t for t, _ in self.terms])

    def reconstruct(self):
        out = np.zeros((self.n, self.n))
        idx = np.arange(self.n)
        for theta, perm in self.terms:
            out[idx, list(perm)] += theta
        return out

    def cooperative_index(self):
        """``(1/n) * sum_ij theta_i theta_j <P_i, P_j>``."""
        perms = np.array([p for _, p in self.terms])
        agree = (perms[:, None, :] == perms[None, :, :]).sum(axis=2)
        th = self.thetas
        return float(th @ agree @ th / self.n)

    def to_dict(self):
        return {
            "n": self.n,
            "terms": [{"theta": t, "perm": list(p)} for t, p in self.terms],
            "term_bound": self.term_bound,
        }


def _bottleneck_matching(res, floor):
    """Perfect matching on ``res > floor`` maximizing its smallest entry."""
    values = np.unique(res[res > floor])[::-1]
    if values.size == 0 or max_matching(res > floor).min() < 0:
        return None
    lo, hi = 0, values.size - 1  # the answer index lies in [lo, hi]
    while lo < hi:
        mid = (lo + hi) // 2
        if max_matching(res >= values[mid]).min() >= 0:
            hi = mid
        else:
            lo = mid + 1
    return tuple(int(c) for c in max_matching(res >= values[lo]))


def bvn_decompose(dsm, tol=TAU_BVN):
    """Greedy Birkhoff decomposition into a convex combination of permutations.

    Each step takes the bottleneck perfect matching of the residual support and
    subtracts its smallest entry, until every residual entry is at most
    ``tol``, or until what is left is within the input's own doubly stochastic
    defect.  Entries at or below ``tol`` are treated as zero.  The number of
    terms never exceeds ``eta + tau - 2n + 1``; a violation raises
    :class:`InvariantViolation`.
    """
    dsm = check_doubly_stochastic(dsm, name="dsm")
    n = dsm.shape[0]
    mask = pattern(dsm)
    perm0 = perfect_matching(mask)
    if perm0 is None:
        raise NoPerfectMatching("doubly stochastic input has no positive diagonal")
    _, tau = _on_diagonal_mask(mask, perm0)
    bound = int(mask.sum()) + int(tau) - 2 * n + 1
    # a numerically obtained limit is only doubly stochastic up to this defect,
    # and whatever is left once no matching remains is of that size
    defect = max(np.max(np.abs(dsm.sum(axis=0) - 1)), np.max(np.abs(dsm.sum(axis=1) - 1)))
    res = dsm.copy()
    idx = np.arange(n)
    terms = []
    while res.max() > tol:
        perm = _bottleneck_matching(res, tol)
        if perm is None:
            if res.sum(axis=1).max() <= tol + 2 * defect:
                break
            raise NoPerfectMatching(
                f"residual with max entry {res.max():.3g} has no perfect matching"
            )
        theta = float(res[idx, list(perm)].min())
        res[idx, list(perm)] -= theta
        terms.append((theta, perm))
    if len(terms) > bound:
        raise InvariantViolation(f"{len(terms)} terms exceed the bound {bound}")
    terms.sort(key=lambda t: t[1])
    return BvNDecomposition(terms, n, bound)
