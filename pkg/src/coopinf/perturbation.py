"""Single-entry perturbation experiments on the Sinkhorn limit.

A perturbation adds ``eps`` to one entry.  Its *kind* describes what happens
to the positive diagonals:

* ``off_diagonal``: the maximum partial pattern is unchanged and the entry
  lies outside it, so the limit cannot move at all;
* ``on_diagonal``: the pattern is unchanged and the entry lies inside it;
* ``new_diagonal``: the maximum partial pattern itself changes (a diagonal
  appears or disappears).
"""

from dataclasses import dataclass
import warnings

import numpy as np

from .errors import DegenerateResult, InvariantViolation, NegativeResult, WrongPattern
from .index import ci_from_pair
from .matrix import DEFAULT_MAX_ITERS, DEFAULT_TOL, as_matrix, matrix_distance, pattern
from .patterns import limit_support
from .sinkhorn import sinkhorn

KINDS = ("off_diagonal", "on_diagonal", "new_diagonal")

# pattern of the 3x3 family with two positive diagonals
ALPHA3_PATTERN = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]], dtype=bool)


class NonMonotoneSweep(UserWarning):
    """Limit distances of a sweep do not decrease with ``|eps|``."""


def perturb(m, i, j, eps):
    """Copy of ``m`` with ``eps`` added to entry ``(i, j)``."""
    m = as_matrix(m)
    u, v = m.shape
    if not (0 <= i < u and 0 <= j < v):
        raise IndexError(f"entry ({i}, {j}) is outside a {u}x{v} matrix")
    if not np.isfinite(eps):
        raise ValueError("eps must be finite")
    out = m.copy()
    out[i, j] += eps
    if out[i, j] < 0:
        raise NegativeResult(f"entry ({i}, {j}) would become {out[i, j]}")
    if out[i].sum() == 0 or out[:, j].sum() == 0:
        raise DegenerateResult(f"perturbing ({i}, {j}) empties a row or column")
    return out


def perturbation_kind(m, m_eps, i, j):
    before = limit_support(m)
    if not np.array_equal(before, limit_support(m_eps)):
        return "new_diagonal"
    return "on_diagonal" if before[i, j] else "off_diagonal"


@dataclass(frozen=True)
class PerturbationReport:
    location: tuple
    epsilon: float
    kind: str
    input_distance: float
    limit_distance: float
    ci_before: float
    ci_after: float
    converged: bool = True

    def to_dict(self):
        return {
            "location": list(self.location),
            "epsilon": self.epsilon,
            "kind": self.kind,
            "input_distance": self.input_distance,
            "limit_distance": self.limit_distance,
            "ci_before": self.ci_before,
            "ci_after": self.ci_after,
            "converged": self.converged,
        }


def _report(m, base, i, j, eps, tol, max_iters):
    m_eps = perturb(m, i, j, eps)
    after = sinkhorn(m_eps, tol, max_iters)
    return PerturbationReport(
        location=(int(i), int(j)),
        epsilon=float(eps),
        kind=perturbation_kind(m, m_eps, i, j),
        input_distance=abs(float(eps)),
        limit_distance=matrix_distance(base.L, after.L),
        ci_before=ci_from_pair(base.L, base.T),
        ci_after=ci_from_pair(after.L, after.T),
        converged=base.converged and after.converged,
    )


def sensitivity_report(m, i, j, eps, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Compare the limits of ``m`` and of ``m`` with ``eps`` added at ``(i, j)``."""
    m = as_matrix(m)
    return _report(m, sinkhorn(m, tol, max_iters), i, j, eps, tol, max_iters)


def continuity_sweep(m, i, j, eps_list, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS, *, delta=None):
    """One report per ``eps``, in input order.

    If the distances do not shrink with ``|eps|`` a :class:`NonMonotoneSweep`
    warning is emitted.  With ``delta`` given, the report for the smallest
    ``|eps|`` must have ``limit_distance < delta``; otherwise
    :class:`InvariantViolation` is raised.
    """
    m = as_matrix(m)
    base = sinkhorn(m, tol, max_iters)
    reports = [_report(m, base, i, j, eps, tol, max_iters) for eps in eps_list]
    if not reports:
        return reports
    ordered = sorted(reports, key=lambda r: r.input_distance)
    # allow for the iteration tolerance when two distances are both tiny
    slack = 10 * tol
    if any(a.limit_distance > b.limit_distance + slack for a, b in zip(ordered, ordered[1:])):
        warnings.warn("limit distance is not monotone in |eps|", NonMonotoneSweep, stacklevel=2)
    if delta is not None and ordered[0].limit_distance >= delta:
        raise InvariantViolation(
            f"eps = {ordered[0].epsilon:g} moves the limit by {ordered[0].limit_distance:.3g} >= {delta:g}"
        )
    return reports


@dataclass(frozen=True)
class Alpha3Check:
    alpha1: float
    alpha2: float
    alpha3: float
    A1: float
    bound: float
    limit: np.ndarray

    @property
    def in_regime(self):
        return self.alpha1 < 0.5

    @property
    def holds(self):
        return self.alpha3 <= self.bound

    def to_dict(self):
        return {
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "alpha3": self.alpha3,
            "A1": self.A1,
            "bound": self.bound,
            "in_regime": self.in_regime,
            "holds": self.holds,
        }


def alpha3_bound_check(a, eps, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Weight of the new diagonal created by adding ``eps`` at ``(0, 2)``.

    ``a`` has the pattern ``[[+,+,0],[0,+,+],[+,0,+]]``.  The perturbed limit
    is ``a1*I + a2*P(1,2,0) + a3*P(2,1,0)`` and the weights are read off the
    first row.  Cross-ratio invariance gives ``a3 = eps*A1*a1^2/(1-a1)`` with
    ``A1 = a[2,0]/(a[0,0]*a[2,2])``, so ``a3 <= eps*A1/2`` whenever ``a1 < 1/2``.
    """
    a = as_matrix(a, name="a")
    if a.shape != (3, 3) or not np.array_equal(pattern(a), ALPHA3_PATTERN):
        raise WrongPattern("expected a 3x3 matrix with pattern [[+,+,0],[0,+,+],[+,0,+]]")
    if not eps > 0:
        raise ValueError("eps must be positive")
    L = sinkhorn(perturb(a, 0, 2, eps), tol, max_iters).L
    a1, a2, a3 = (float(x) for x in L[0])
    idx = np.arange(3)
    recon = np.zeros((3, 3))
    for w, perm in ((a1, (0, 1, 2)), (a2, (1, 2, 0)), (a3, (2, 1, 0))):
        recon[idx, perm] += w
    if matrix_distance(recon, L) > 1e-8:
        raise InvariantViolation("perturbed limit is not a combination of the three diagonals")
    A1 = float(a[2, 0] / (a[0, 0] * a[2, 2]))
    out = Alpha3Check(a1, a2, a3, A1, eps * A1 / 2, L)
    if out.in_regime and not out.holds:
        raise InvariantViolation(f"alpha3 = {a3:.6g} exceeds the bound {out.bound:.6g}")
    return out
