"""Binary stable witnesses.

For any non-negative matrix without zero rows or columns there is a 0/1
matrix ``A`` inside its pattern which, after permuting rows and columns, is
block diagonal with every block an all-ones row or column vector.  The row
and column normalizations of such an ``A`` form a stable pair.

The construction peels one line at a time (the last column while there are
more columns than rows, otherwise the last row), builds the witness of what
is left, and then puts the peeled line back.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .matrix import as_matrix, col_normalize, matrix_distance, pattern, row_normalize
from .patterns import limit_support


@dataclass(frozen=True)
class StableWitness:
    A: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    row_perm: list
    col_perm: list
    blocks: list  # (rows, cols) pairs in output order

    def to_dict(self):
        return {
            "A": self.A,
            "row_perm": self.row_perm,
            "col_perm": self.col_perm,
            "blocks": [{"rows": list(r), "cols": list(c)} for r, c in self.blocks],
        }


def _peel(mask):
    """Reduce to a 1x1 problem, recording ``(axis, line, orphans)`` per step."""
    rows = list(range(mask.shape[0]))
    cols = list(range(mask.shape[1]))
    steps = []
    while len(rows) > 1 or len(cols) > 1:
        if len(cols) > len(rows):
            line = cols.pop()
            orphans = [i for i in rows if not mask[i, cols].any()]
            rows = [i for i in rows if i not in orphans]
            steps.append(("col", line, orphans))
        else:
            line = rows.pop()
            orphans = [j for j in cols if not mask[rows, j].any()]
            cols = [j for j in cols if j not in orphans]
            steps.append(("row", line, orphans))
    return (rows[0], cols[0]), steps


def _rebuild(mask, base, steps):
    blocks = [([base[0]], [base[1]])]
    for axis, line, orphans in reversed(steps):
        if axis == "col":
            if orphans:
                blocks.append((orphans, [line]))
                continue
            # smallest row already placed that meets the new column
            placed = sorted(i for rs, _ in blocks for i in rs)
            t = next(i for i in placed if mask[i, line])
            k = next(b for b, (rs, _) in enumerate(blocks) if t in rs)
            rs, cs = blocks[k]
            if len(rs) == 1:
                cs.append(line)
            else:
                rs.remove(t)
                blocks.append(([t], [line]))
        else:
            if orphans:
                blocks.append(([line], orphans))
                continue
            placed = sorted(j for _, cs in blocks for j in cs)
            s = next(j for j in placed if mask[line, j])
            k = next(b for b, (_, cs) in enumerate(blocks) if s in cs)
            rs, cs = blocks[k]
            if len(cs) == 1:
                rs.append(line)
            else:
                cs.remove(s)
                blocks.append(([line], [s]))
    return blocks


def construct_stable_witness(m, *, within_limit=False):
    """Binary ``A`` within the pattern of ``m`` whose normalizations are stable.

    Returns a :class:`StableWitness`; ``A[row_perm][:, col_perm]`` is block
    diagonal with the listed blocks, each an all-ones row or column vector.

    The witness built on the full pattern may use entries that vanish in the
    Sinkhorn limit.  With ``within_limit=True`` the same construction runs on
    the support of the limit instead, so ``A`` also lies inside that support.
    """
    m = as_matrix(m)
    mask = limit_support(m) if within_limit else pattern(m)
    base, steps = _peel(mask)
    blocks = sorted(
        (tuple(sorted(rs)), tuple(sorted(cs))) for rs, cs in _rebuild(mask, base, steps)
    )
    A = np.zeros(mask.shape)
    for rs, cs in blocks:
        A[np.ix_(rs, cs)] = 1.0
    row_perm = [i for rs, _ in blocks for i in rs]
    col_perm = [j for _, cs in blocks for j in cs]
    return StableWitness(A, row_normalize(A), col_normalize(A), row_perm, col_perm, blocks)


def verify_stable(p, q, tol=0.0):
    """True iff ``p`` and ``q`` share a pattern, normalizing the columns of ``p``
    gives ``q`` and normalizing the rows of ``q`` gives ``p``, within ``tol``."""
    p = as_matrix(p, name="p")
    q = as_matrix(q, name="q")
    if p.shape != q.shape:
        raise DimensionMismatch(f"shapes differ: {p.shape} vs {q.shape}")
    if not np.array_equal(pattern(p), pattern(q)):
        return False
    return matrix_distance(col_normalize(p), q) <= tol and matrix_distance(row_normalize(q), p) <= tol
