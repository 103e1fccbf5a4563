"""Validated non-negative matrices and the normalization primitives.

Matrices are plain ``numpy`` float64 arrays.  :func:`as_matrix` is the single
gate through which external data enters; every public operation of the package
calls it (or :func:`as_square`) on its inputs and never mutates them.

A *pattern* is the boolean mask ``m > 0``.  Structural zeros must be literal
``0.0``; no thresholding is applied.
"""

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeEntry,
    NonFiniteEntry,
    NotDoublyStochastic,
    NotSquare,
    ParseError,
    ZeroColumn,
    ZeroRow,
)

#: tolerance for "sums to 1" checks
TAU_NORM = 1e-12
#: default successive-iterate tolerance for Sinkhorn iteration
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 100_000
#: tolerance used when deciding whether an input is doubly stochastic
DS_TOL = 1e-8


def as_matrix(a, *, name="matrix"):
    """Return ``a`` as a new 2-D float64 array after checking the standing assumptions.

    Raises one of ``ParseError``, ``NonFiniteEntry``, ``NegativeEntry``,
    ``ZeroRow`` or ``ZeroColumn``.
    """
    try:
        m = np.array(a, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{name}: not a numeric array ({exc})") from None
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ParseError(f"{name}: expected a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteEntry(f"{name}: entries must be finite")
    if np.any(m < 0):
        i, j = np.argwhere(m < 0)[0]
        raise NegativeEntry(f"{name}: negative entry {m[i, j]} at ({i}, {j})")
    zero_rows = np.flatnonzero(m.sum(axis=1) == 0)
    if zero_rows.size:
        raise ZeroRow(f"{name}: row {zero_rows[0]} is identically zero")
    zero_cols = np.flatnonzero(m.sum(axis=0) == 0)
    if zero_cols.size:
        raise ZeroColumn(f"{name}: column {zero_cols[0]} is identically zero")
    return m


def as_square(a, *, name="matrix"):
    m = as_matrix(a, name=name)
    if m.shape[0] != m.shape[1]:
        raise NotSquare(f"{name}: expected a square matrix, got shape {m.shape}")
    return m


def pattern(m):
    """Boolean support mask of ``m``."""
    return np.asarray(m) > 0


def row_normalize(m):
    """Divide every row by its sum.  Zeros stay zero."""
    m = np.asarray(m, dtype=np.float64)
    s = m.sum(axis=1, keepdims=True)
    if np.any(s == 0):
        raise ZeroRow(f"row {int(np.flatnonzero(s.ravel() == 0)[0])} sums to zero")
    return m / s


def col_normalize(m):
    """Divide every column by its sum.  Zeros stay zero."""
    m = np.asarray(m, dtype=np.float64)
    s = m.sum(axis=0, keepdims=True)
    if np.any(s == 0):
        raise ZeroColumn(f"column {int(np.flatnonzero(s.ravel() == 0)[0])} sums to zero")
    return m / s


def matrix_distance(a, b):
    """Maximum element-wise absolute difference."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def check_doubly_stochastic(m, tol=DS_TOL, *, name="matrix"):
    """Validate and return ``m`` if all row and column sums are 1 within ``tol``."""
    m = as_square(m, name=name)
    row_err = np.max(np.abs(m.sum(axis=1) - 1.0))
    col_err = np.max(np.abs(m.sum(axis=0) - 1.0))
    if max(row_err, col_err) > tol:
        raise NotDoublyStochastic(
            f"{name}: row/column sums deviate from 1 by {max(row_err, col_err):.3g}"
        )
    return m


def permutation_matrix(perm):
    """0/1 matrix with ones at ``(i, perm[i])``."""
    n = len(perm)
    p = np.zeros((n, n))
    p[np.arange(n), list(perm)] = 1.0
    return p
