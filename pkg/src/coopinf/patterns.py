"""Support-pattern analysis: positive diagonals, on/off-diagonal entries,
indecomposable components, and the support of the Sinkhorn limit.

Square matrices are handled with bipartite matchings: an entry lies on a
positive diagonal iff it belongs to some perfect matching of the positivity
graph, which is decided by strongly connected components of the digraph
obtained after permuting one perfect matching onto the main diagonal.

For arbitrary (rectangular, or square without a positive diagonal) matrices,
:func:`limit_blocks` computes the block structure of the Sinkhorn limit
exactly.  Columns are peeled off in order of increasing density ratio
``|rows adjacent| / |columns|`` (the set minimizing the ratio, taken maximal,
forms the next block); inside a block every row carries mass 1 and every
column ``ratio``, and an entry survives iff some feasible transport plan on
the block uses it.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components, maximum_flow

from .errors import InvariantViolation, LimitExceeded, NoPositiveDiagonal, NotSquare
from .matrix import as_matrix, as_square, pattern

DEFAULT_DIAG_LIMIT = 1_000_000


# -- matchings ---------------------------------------------------------------

def max_matching(mask):
    """Maximum bipartite matching of a boolean ``u x v`` mask.

    Augmenting paths are grown breadth-first from each row in turn, trying
    columns in increasing order, so the result is deterministic.  Returns an
    int array ``match`` with ``match[i]`` the column matched to row ``i`` or -1.
    """
    mask = np.asarray(mask, dtype=bool)
    u, v = mask.shape
    adj = [np.flatnonzero(mask[i]) for i in range(u)]
    match_row = np.full(u, -1)
    match_col = np.full(v, -1)
    for root in range(u):
        parent = np.full(v, -1)
        seen = np.zeros(v, dtype=bool)
        queue = [root]
        end = -1
        for r in queue:
            for c in adj[r]:
                if seen[c]:
                    continue
                seen[c] = True
                parent[c] = r
                if match_col[c] == -1:
                    end = c
                    break
                queue.append(match_col[c])
            if end != -1:
                break
        c = end
        while c != -1:
            r = parent[c]
            prev = match_row[r]
            match_row[r] = c
            match_col[c] = r
            c = prev
    return match_row


def perfect_matching(mask):
    """A perfect matching of a square mask as a permutation tuple, or ``None``."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape[0] != mask.shape[1]:
        raise NotSquare(f"expected a square mask, got shape {mask.shape}")
    match = max_matching(mask)
    if np.any(match < 0):
        return None
    return tuple(int(c) for c in match)


def has_positive_diagonal(m):
    m = as_square(m)
    return perfect_matching(pattern(m)) is not None


def _matching_components(mask, perm):
    """SCC labels of rows in the digraph ``i -> k`` iff ``mask[i, perm[k]]``."""
    n = mask.shape[0]
    inv = np.empty(n, dtype=int)
    inv[list(perm)] = np.arange(n)
    rows, cols = np.nonzero(mask)
    graph = csr_matrix((np.ones(rows.size), (rows, inv[cols])), shape=(n, n))
    return connected_components(graph, directed=True, connection="strong")


def _on_diagonal_mask(mask, perm):
    count, labels = _matching_components(mask, perm)
    n = mask.shape[0]
    inv = np.empty(n, dtype=int)
    inv[list(perm)] = np.arange(n)
    # (i, j) lies on a positive diagonal iff row i and the row matched to j share a component
    same = labels[:, None] == labels[inv][None, :]
    return mask & same, count


# -- limit support for arbitrary shapes --------------------------------------

@dataclass(frozen=True)
class LimitBlock:
    """Rows and columns of one ratio class of the Sinkhorn limit.

    In the limit every row of the class sums to 1 and every column to ``ratio``
    (= ``len(rows) / len(cols)``).
    """

    rows: tuple
    cols: tuple
    ratio: Fraction


def _flow(n_nodes, edges, caps, source, sink):
    tails, heads = zip(*edges)
    cap = csr_matrix(
        (np.asarray(caps, dtype=np.int32), (np.asarray(tails), np.asarray(heads))),
        shape=(n_nodes, n_nodes),
    )
    result = maximum_flow(cap, source, sink)
    residual = (cap - result.flow).tocsr()
    residual.data[residual.data < 0] = 0
    residual.eliminate_zeros()
    return result.flow_value, result.flow.tocsr(), residual


def _min_ratio_columns(mask, rows, cols):
    """Maximal column set minimizing |N(S)| / |S| inside ``rows x cols``."""
    sub = mask[np.ix_(rows, cols)]
    nr, nc = len(rows), len(cols)
    # node layout: source, columns, rows, sink
    source, sink = 0, 1 + nc + nr
    ri, ci = np.nonzero(sub)
    ratio = Fraction(nr, nc)
    while True:
        a, b = ratio.numerator, ratio.denominator
        big = a * nc + 1
        edges = [(source, 1 + c) for c in range(nc)]
        caps = [a] * nc
        edges += [(1 + c, 1 + nc + r) for r, c in zip(ri, ci)]
        caps += [big] * ri.size
        edges += [(1 + nc + r, sink) for r in range(nr)]
        caps += [b] * nr
        value, _, residual = _flow(sink + 1, edges, caps, source, sink)
        # columns from which the sink is still reachable belong to the complement
        reach_sink = breadth_first_order(residual.T.tocsr(), sink, directed=True,
                                         return_predecessors=False)
        blocked = np.zeros(sink + 1, dtype=bool)
        blocked[reach_sink] = True
        chosen = [c for c in range(nc) if not blocked[1 + c]]
        adjacent = np.flatnonzero(sub[:, chosen].any(axis=1))
        new_ratio = Fraction(adjacent.size, len(chosen))
        if value == a * nc:
            return [cols[c] for c in chosen], [rows[r] for r in adjacent], ratio
        ratio = new_ratio


def limit_blocks(m):
    """Ratio classes of the Sinkhorn limit of ``m``, in increasing ratio order."""
    mask = pattern(as_matrix(m))
    rows = list(range(mask.shape[0]))
    cols = list(range(mask.shape[1]))
    blocks = []
    while cols:
        s_cols, s_rows, ratio = _min_ratio_columns(mask, rows, cols)
        blocks.append(LimitBlock(tuple(sorted(s_rows)), tuple(sorted(s_cols)), ratio))
        taken_r, taken_c = set(s_rows), set(s_cols)
        rows = [r for r in rows if r not in taken_r]
        cols = [c for c in cols if c not in taken_c]
    return blocks


def _block_support(mask, block):
    rows, cols = list(block.rows), list(block.cols)
    sub = mask[np.ix_(rows, cols)]
    nr, nc = len(rows), len(cols)
    source, sink = 0, 1 + nr + nc
    ri, ci = np.nonzero(sub)
    edges = [(source, 1 + r) for r in range(nr)]
    caps = [nc] * nr
    edges += [(1 + r, 1 + nr + c) for r, c in zip(ri, ci)]
    caps += [nr * nc + 1] * ri.size
    edges += [(1 + nr + c, sink) for c in range(nc)]
    caps += [nr] * nc
    value, flow, _ = _flow(sink + 1, edges, caps, source, sink)
    if value != nr * nc:
        raise InvariantViolation("ratio class admits no feasible plan")
    used = np.asarray(flow[1 + ri, 1 + nr + ci]).ravel() > 0
    # residual digraph on the block: row -> col always, col -> row where flow > 0
    n = nr + nc
    tails = np.concatenate([ri, nr + ci[used]])
    heads = np.concatenate([nr + ci, ri[used]])
    graph = csr_matrix((np.ones(tails.size), (tails, heads)), shape=(n, n))
    _, labels = connected_components(graph, directed=True, connection="strong")
    keep = used | (labels[ri] == labels[nr + ci])
    out = np.zeros_like(mask)
    out[np.asarray(rows)[ri[keep]], np.asarray(cols)[ci[keep]]] = True
    return out


def flow_limit_support(m):
    """Support of the Sinkhorn limit computed by the ratio-class method only."""
    m = as_matrix(m)
    mask = pattern(m)
    out = np.zeros_like(mask)
    for block in limit_blocks(m):
        out |= _block_support(mask, block)
    return out


def limit_support(m):
    """Boolean mask of the entries that stay positive in the Sinkhorn limit of ``m``.

    This is the maximum partial pattern.  Square matrices with a positive
    diagonal use the matching method; everything else goes through the
    ratio-class decomposition.
    """
    m = as_matrix(m)
    mask = pattern(m)
    if mask.shape[0] == mask.shape[1]:
        perm = perfect_matching(mask)
        if perm is not None:
            return _on_diagonal_mask(mask, perm)[0]
    return flow_limit_support(m)


# -- classification ----------------------------------------------------------

def _pairs(mask):
    return [[int(i), int(j)] for i, j in np.argwhere(mask)]


@dataclass(frozen=True)
class SupportClassification:
    on_diagonal: np.ndarray
    off_diagonal: np.ndarray
    max_partial_pattern: np.ndarray
    eta: int
    tau: int | None

    def to_dict(self):
        return {
            "on_diagonal": _pairs(self.on_diagonal),
            "off_diagonal": _pairs(self.off_diagonal),
            "max_partial_pattern": _pairs(self.max_partial_pattern),
            "tau": self.tau,
            "eta": self.eta,
        }


def classify_support(m):
    """Split the positive entries of ``m`` into on- and off-diagonal ones.

    For rectangular inputs (no diagonals exist) entries inside the maximum
    partial pattern count as on-diagonal and the rest as off-diagonal.  For a
    square matrix without a positive diagonal ``on_diagonal`` is empty while
    ``max_partial_pattern`` is still the (non-empty) support of the limit.
    ``tau`` is ``None`` unless ``m`` is square with a positive diagonal.
    """
    m = as_matrix(m)
    mask = pattern(m)
    eta = int(mask.sum())
    if mask.shape[0] == mask.shape[1]:
        perm = perfect_matching(mask)
        if perm is not None:
            on, tau = _on_diagonal_mask(mask, perm)
            return SupportClassification(on, mask & ~on, on.copy(), eta, int(tau))
        limit = flow_limit_support(m)
        empty = np.zeros_like(mask)
        return SupportClassification(empty, mask.copy(), limit, eta, None)
    limit = flow_limit_support(m)
    return SupportClassification(limit, mask & ~limit, limit.copy(), eta, None)


def apply_max_pattern(m):
    """Zero every entry outside the maximum partial pattern (the matrix M-bar)."""
    m = as_matrix(m)
    if m.shape[0] == m.shape[1]:
        perm = perfect_matching(pattern(m))
        if perm is None:
            raise NoPositiveDiagonal("square matrix has no positive diagonal")
        keep = _on_diagonal_mask(pattern(m), perm)[0]
    else:
        keep = flow_limit_support(m)
    return np.where(keep, m, 0.0)


def count_indecomposable_components(m):
    """Number of fully indecomposable blocks of M-bar."""
    m = as_square(m)
    perm = perfect_matching(pattern(m))
    if perm is None:
        raise NoPositiveDiagonal("square matrix has no positive diagonal")
    return int(_matching_components(pattern(m), perm)[0])


# -- diagonal enumeration ------------------------------------------------------

@dataclass(frozen=True)
class DiagonalSet:
    """Positive diagonals in lexicographic order of their permutations."""

    n: int
    sigmas: list
    log_products: np.ndarray
    products: np.ndarray  # direct products; may under/overflow where the logs do not

    def __len__(self):
        return len(self.sigmas)

    def to_dict(self):
        return {
            "n": self.n,
            "diagonals": [
                {"sigma": list(s), "product": float(p)}
                for s, p in zip(self.sigmas, self.products)
            ],
        }


def enumerate_diagonals(m, limit=DEFAULT_DIAG_LIMIT):
    """All positive diagonals of a square matrix by depth-first search.

    Columns are tried in increasing order for each row, and a branch is cut as
    soon as the remaining rows cannot be completed (checked with a matching
    on the rows not yet assigned), so the search only visits prefixes of
    positive diagonals.  Raises ``LimitExceeded`` past ``limit`` diagonals.
    """
    m = as_square(m)
    n = m.shape[0]
    mask = pattern(m)
    logs = np.full(m.shape, -np.inf)
    logs[mask] = np.log(m[mask])
    adj = [np.flatnonzero(mask[i]) for i in range(n)]
    sigmas, log_products = [], []
    used = np.zeros(n, dtype=bool)
    sigma = [0] * n

    def completable(row):
        rest = mask[row:][:, ~used]
        return rest.size == 0 or np.all(max_matching(rest) >= 0)

    if not completable(0):
        return DiagonalSet(n, [], np.array([]), np.array([]))

    # iterative DFS: stack of (row, index into adj[row], accumulated log product)
    stack = [(0, 0, 0.0)]
    while stack:
        row, k, acc = stack.pop()
        if k > 0:
            used[sigma[row]] = False
        while k < adj[row].size:
            c = adj[row][k]
            k += 1
            if used[c]:
                continue
            used[c] = True
            sigma[row] = c
            if row + 1 == n:
                sigmas.append(tuple(int(s) for s in sigma))
                log_products.append(acc + logs[row, c])
                if len(sigmas) > limit:
                    raise LimitExceeded(
                        f"more than {limit} positive diagonals", found=len(sigmas)
                    )
                used[c] = False
                continue
            if completable(row + 1):
                stack.append((row, k, acc))
                stack.append((row + 1, 0, acc + logs[row, c]))
                break
            used[c] = False
    with np.errstate(over="ignore", under="ignore"):
        products = m[np.arange(n), np.array(sigmas, dtype=int).reshape(-1, n)].prod(axis=1)
    return DiagonalSet(n, sigmas, np.array(log_products), products)


def diagonal_log_products(m, sigmas):
    """Sum of logs along each permutation; ``-inf`` where the diagonal has a zero."""
    m = np.asarray(m, dtype=np.float64)
    idx = np.arange(m.shape[0])
    with np.errstate(divide="ignore"):
        return np.array([np.sum(np.log(m[idx, list(s)])) for s in sigmas])


def diagonal_count(m, limit=DEFAULT_DIAG_LIMIT):
    return len(enumerate_diagonals(m, limit))
