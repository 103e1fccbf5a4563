"""Cross ratios of positive diagonals.

Two square matrices are cross-ratio equivalent when they have the same
positive diagonals and every ratio of diagonal products agrees.  Sinkhorn
iteration preserves cross ratios, and a matrix lies in the preimage of a
doubly stochastic ``l`` exactly when it is cross-ratio equivalent to ``l``;
such preimages are the diagonal rescalings ``diag(x) @ l @ diag(y)``.

Diagonal products are handled as sums of logs throughout.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, LimitMismatch, NoPositiveDiagonal
from .matrix import DEFAULT_TOL, as_square, check_doubly_stochastic, matrix_distance
from .patterns import DEFAULT_DIAG_LIMIT, enumerate_diagonals
from .sinkhorn import TAU_SCALE, extract_scaling, sinkhorn

DEFAULT_REL_TOL = 1e-6


@dataclass(frozen=True)
class CrossRatioProfile:
    """Ratios ``d_base / d_i`` for every positive diagonal ``i``.

    ``base_sigma`` is the lexicographically smallest positive diagonal.
    """

    base_sigma: tuple
    sigmas: list
    log_ratios: np.ndarray
    pattern: np.ndarray  # union of the positive diagonals, i.e. the pattern of M-bar

    @property
    def ratios(self):
        return np.exp(self.log_ratios)

    def as_dict(self):
        return dict(zip(self.sigmas, self.ratios))

    def to_dict(self):
        return {
            "base": list(self.base_sigma),
            "ratios": [{"sigma": list(s), "cr": float(r)} for s, r in zip(self.sigmas, self.ratios)],
        }


def cross_ratio_profile(m, diag_limit=DEFAULT_DIAG_LIMIT):
    diags = enumerate_diagonals(as_square(m), diag_limit)
    if not len(diags):
        raise NoPositiveDiagonal("matrix has no positive diagonal")
    logs = diags.log_products
    n = diags.n
    mask = np.zeros((n, n), dtype=bool)
    for s in diags.sigmas:
        mask[np.arange(n), list(s)] = True
    return CrossRatioProfile(diags.sigmas[0], list(diags.sigmas), logs[0] - logs, mask)


def cr_equivalent(a, b, rel_tol=DEFAULT_REL_TOL, diag_limit=DEFAULT_DIAG_LIMIT):
    """True iff ``a`` and ``b`` have the same positive diagonals and their
    cross ratios agree to relative tolerance ``rel_tol``."""
    a = as_square(a, name="a")
    b = as_square(b, name="b")
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    pa = cross_ratio_profile(a, diag_limit)
    pb = cross_ratio_profile(b, diag_limit)
    # equal diagonal sets imply equal M-bar patterns
    if pa.sigmas != pb.sigmas:
        return False
    # |r_a / r_b - 1| <= rel_tol, compared in log space
    return bool(np.all(np.abs(np.expm1(pa.log_ratios - pb.log_ratios)) <= rel_tol))


def preimage_member(l, x, y):
    """``diag(x) @ l @ diag(y)``: a matrix whose Sinkhorn limit is ``l``."""
    l = check_doubly_stochastic(l, name="l")
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != l.shape[0] or y.size != l.shape[1]:
        raise DimensionMismatch("scaling vectors do not match the matrix")
    if not (np.all(x > 0) and np.all(y > 0) and np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("scaling vectors must be positive and finite")
    return x[:, None] * l * y[None, :]


@dataclass(frozen=True)
class PreimageDistance:
    m2: np.ndarray
    c: float
    x: np.ndarray
    y: np.ndarray
    limit_distance: float  # d(l1, l2)
    preimage_distance: float  # d(m1, m2)

    @property
    def holds(self):
        return self.preimage_distance <= self.c * self.limit_distance + TAU_SCALE * max(1.0, self.c)

    def to_dict(self):
        return {
            "m2": self.m2,
            "c": self.c,
            "x": self.x,
            "y": self.y,
            "limit_distance": self.limit_distance,
            "preimage_distance": self.preimage_distance,
            "holds": self.holds,
        }


def verify_preimage_distance(l1, l2, m1, tol=DEFAULT_TOL):
    """Build ``m2 = X l2 Y`` from the scaling ``m1 = X l1 Y`` and return it with
    ``c = max x_i y_j``; ``d(m1, m2) <= c * d(l1, l2)`` must hold."""
    l1 = check_doubly_stochastic(l1, name="l1")
    l2 = check_doubly_stochastic(l2, name="l2")
    m1 = as_square(m1, name="m1")
    if not (l1.shape == l2.shape == m1.shape):
        raise DimensionMismatch("l1, l2 and m1 must have the same shape")
    limit = sinkhorn(m1, tol).L
    if matrix_distance(limit, l1) > 10 * tol + 1e-9:
        raise LimitMismatch(f"Sinkhorn limit of m1 is {matrix_distance(limit, l1):.3g} away from l1")
    x, y = extract_scaling(m1, l1)
    m2 = x[:, None] * l2 * y[None, :]
    c = float(np.max(np.outer(x, y)))
    return PreimageDistance(m2, c, x, y, matrix_distance(l1, l2), matrix_distance(m1, m2))
