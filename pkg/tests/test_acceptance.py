"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]`` or ``[FAIL]`` line with the measured
quantities; the lines are also repeated in the pytest terminal summary.
Indices are 0-based: the entry in row 1, column 2 counted from one is (0, 1) here.
"""

import time
from fractions import Fraction

import numpy as np

from coopinf.crossratio import cr_equivalent, preimage_member, verify_preimage_distance
from coopinf.index import bvn_decompose, ci_bounds, cooperative_index
from coopinf.matrix import col_normalize, matrix_distance, row_normalize
from coopinf.patterns import apply_max_pattern, enumerate_diagonals
from coopinf.perturbation import perturb, sensitivity_report
from coopinf.sinkhorn import block_column_sum_error, sinkhorn, sinkhorn_on_pattern
from coopinf.witness import construct_stable_witness, verify_stable

from conftest import (
    CR_A,
    CR_B,
    CYCLE,
    OFFDIAG,
    OFFDIAG_BAR,
    UPPER,
    bordered_five,
    random_batch,
    random_with_diagonal,
)
from oracles import brute_diagonals

RESULTS = {}


def report(number, checks, detail):
    """Print and record one line; ``checks`` maps a label to a boolean."""
    failed = [label for label, ok in checks.items() if not ok]
    status = "PASS" if not failed else "FAIL"
    line = f"[{status}] criterion {number}: {detail}"
    if failed:
        line += "  (failed: " + ", ".join(failed) + ")"
    RESULTS[number] = line
    print(line)
    assert not failed, line


def test_criterion_1_upper_triangular():
    start = time.perf_counter()
    res = sinkhorn(UPPER)
    ci = cooperative_index(UPPER)
    iterates = {k: float(sinkhorn(UPPER, max_iters=k, prune=False).L[0, 0]) for k in (1, 5, 50)}
    elapsed = time.perf_counter() - start
    checks = {
        "limit is I2": matrix_distance(res.L, np.eye(2)) <= 1e-8 and matrix_distance(res.T, np.eye(2)) <= 1e-8,
        "CI = 1": abs(ci - 1) <= 1e-8,
        **{f"L^{k}(0,0) = 1 - 1/(2k)": abs(v - (1 - 1 / (2 * k))) <= 1e-9 for k, v in iterates.items()},
        "runtime < 1 s": elapsed < 1,
    }
    report(1, checks, f"d(L, I2)={matrix_distance(res.L, np.eye(2)):.1e}, CI={ci:.12f}, "
           f"L^k(0,0)={[round(v, 12) for v in iterates.values()]}, {elapsed:.3f}s")


def test_criterion_2_off_diagonal_example():
    ci = cooperative_index(OFFDIAG)
    bar = apply_max_pattern(OFFDIAG)
    on_pattern = sinkhorn_on_pattern(OFFDIAG)
    rep = sensitivity_report(OFFDIAG, 0, 1, 100.0)
    checks = {
        "CI = 2/3": abs(ci - 2 / 3) <= 1e-8,
        "M-bar": np.array_equal(bar, OFFDIAG_BAR),
        "one sweep on M-bar": on_pattern.iterations == 1,
        "eps=100 at (0,1) moves limit <= 1e-8": rep.limit_distance <= 1e-8,
    }
    report(2, checks, f"CI={ci:.12f}, sweeps on M-bar={on_pattern.iterations}, "
           f"limit change for eps=100: {rep.limit_distance:.1e} ({rep.kind})")


def test_criterion_3_perturbation_table():
    start = time.perf_counter()
    base = sinkhorn(CYCLE).L
    expected_base = np.array([[0.5, 0.5, 0], [0, 0.5, 0.5], [0.5, 0, 0.5]])
    l1 = sinkhorn(perturb(CYCLE, 0, 0, 0.5)).L
    l2 = sinkhorn(perturb(CYCLE, 0, 0, 0.1)).L
    l4 = sinkhorn(perturb(CYCLE, 0, 2, 0.5)).L
    d1 = sensitivity_report(CYCLE, 0, 0, 0.5).limit_distance
    d2 = sensitivity_report(CYCLE, 0, 0, 0.1).limit_distance
    d4 = sensitivity_report(CYCLE, 0, 2, 0.5).limit_distance
    elapsed = time.perf_counter() - start
    close = lambda a, b: abs(a - b) <= 5e-3  # noqa: E731
    checks = {
        "base limit": matrix_distance(base, expected_base) <= 1e-6,
        "eps=0.5 at (0,0): 0.534/0.466": close(l1[0, 0], 0.534) and close(l1[0, 1], 0.466),
        "eps=0.1 at (0,0): 0.508/0.492": close(l2[0, 0], 0.508) and close(l2[0, 1], 0.492),
        "eps=0.5 at (0,2): 0.423/0.577/0.155": close(l4[0, 0], 0.423) and close(l4[1, 1], 0.577) and close(l4[0, 2], 0.155),
        # labelling resolved: 0.034 is the eps=0.5 on-diagonal case
        "0.034 <-> eps=0.5 on-diagonal": close(d1, 0.034) and not close(d2, 0.034),
        "0.155 <-> eps=0.5 new diagonal": close(d4, 0.155),
        "runtime < 5 s": elapsed < 5,
    }
    report(3, checks, f"d(eps=0.5 @00)={d1:.4f}, d(eps=0.1 @00)={d2:.4f}, d(eps=0.5 @02)={d4:.4f}, "
           f"diag {l1[0, 0]:.4f}/{l2[0, 0]:.4f}, {elapsed:.3f}s")


def test_criterion_4_cross_ratio_example():
    pa = enumerate_diagonals(CR_A).products
    pb = enumerate_diagonals(CR_B).products
    checks = {
        "A ~cr B": cr_equivalent(CR_A, CR_B),
        "products of A": sorted(pa.tolist()) == [1.0, 2.0, 3.0],
        "products of B": sorted(pb.tolist()) == [60.0, 120.0, 180.0],
    }
    report(4, checks, f"equivalent={cr_equivalent(CR_A, CR_B)}, d_A={pa.tolist()}, d_B={pb.tolist()}")


def test_criterion_5_bounds():
    five = ci_bounds(bordered_five())
    small = ci_bounds(OFFDIAG)
    exact = Fraction(1, five.eta - 2 * five.n + five.tau + 1)
    checks = {
        "eta, tau, d = 13, 2, 12": (five.eta, five.tau, five.d) == (13, 2, 12),
        "d by brute force": len(brute_diagonals(bordered_five())) == 12,
        "structural = 1/6": exact == Fraction(1, 6) and five.bound_structural == 1 / 6,
        "1/6 > 1/12": five.bound_structural > five.bound_diagonals == 1 / 12,
        "2/3 > 1/2 > 1/3": abs(small.ci - 2 / 3) <= 1e-8 and small.ci > small.bound_diagonals > small.bound_uniform
        and (small.bound_diagonals, small.bound_uniform) == (1 / 2, 1 / 3),
    }
    report(5, checks, f"five: eta={five.eta} tau={five.tau} d={five.d} structural={exact}; "
           f"small: CI={small.ci:.12f} 1/d={small.bound_diagonals} 1/n={small.bound_uniform:.6f}")


def _random_scaling(rng, n):
    return rng.uniform(0.2, 5.0, n), rng.uniform(0.2, 5.0, n)


def test_criterion_6_property_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    general = random_batch(200, max_dim=8, seed=61)
    squares = random_with_diagonal(200, max_dim=8, seed=62)
    small = random_with_diagonal(200, max_dim=5, seed=63)
    tol = 1e-10
    checks = {}

    results = [sinkhorn(m, tol, 100_000) for m in general]
    checks["convergence"] = all(r.converged for r in results)
    checks["block column sums"] = max(block_column_sum_error(r.L) for r in results) <= 1e-8

    checks["M vs M-bar"] = max(matrix_distance(sinkhorn(m).L, sinkhorn_on_pattern(m).L) for m in squares) <= 1e-8

    checks["m ~cr limit"] = all(cr_equivalent(m, sinkhorn(m).L) for m in small)
    recovered = ci_gap = 0.0
    for m in squares:
        l = sinkhorn(m, tol=1e-12).L
        pre = preimage_member(l, *_random_scaling(rng, m.shape[0]))
        recovered = max(recovered, matrix_distance(sinkhorn(pre).L, l))
        ci_gap = max(ci_gap, abs(cooperative_index(m) - cooperative_index(pre)))
    checks["recovery of l from X l Y"] = recovered <= 10 * tol
    checks["equal CI for cr-equivalent"] = ci_gap <= 1e-8

    worst_bound = min(b.ci - max(b.bounds()) for b in (ci_bounds(m) for m in squares))
    checks["CI bounds"] = worst_bound >= -1e-8

    bvn_err, over_bound = 0.0, 0
    for m in squares:
        l = sinkhorn(m, tol=1e-12).L
        dec = bvn_decompose(l)
        bvn_err = max(bvn_err, matrix_distance(dec.reconstruct(), l))
        over_bound += len(dec.terms) > dec.term_bound
    checks["BvN reconstruction"] = bvn_err <= 1e-9
    checks["BvN term bound"] = over_bound == 0

    enum_ok = True
    for m in random_batch(200, max_dim=5, square=True, seed=64):
        ds, brute = enumerate_diagonals(m), brute_diagonals(m)
        enum_ok &= ds.sigmas == [s for s, _ in brute] and np.allclose(ds.products, [p for _, p in brute])
    checks["diagonal enumeration"] = bool(enum_ok)

    holds = 0
    for m in squares[:50]:
        m1 = apply_max_pattern(m)
        l1 = sinkhorn(m1, tol=1e-13).L
        l2 = sinkhorn(l1 * (1 + 0.1 * rng.uniform(-1, 1, l1.shape)), tol=1e-13).L
        holds += verify_preimage_distance(l1, l2, m1).holds
    checks["preimage distance (50 triples)"] = holds == 50

    elapsed = time.perf_counter() - start
    checks["runtime < 60 s"] = elapsed < 60
    report(6, checks, f"{sum(checks.values())}/{len(checks)} properties, BvN err={bvn_err:.1e}, "
           f"recovery={recovered:.1e}, CI gap={ci_gap:.1e}, min CI-bound={worst_bound:.3g}, {elapsed:.1f}s")


def _witness_ok(m, w):
    m = np.asarray(m, dtype=float)
    binary = set(np.unique(w.A)) <= {0.0, 1.0}
    contained = not ((w.A > 0) & ~(m > 0)).any()
    vectors = all(len(r) == 1 or len(c) == 1 for r, c in w.blocks)
    permuted = w.A[np.ix_(w.row_perm, w.col_perm)]
    layout = np.zeros_like(permuted)
    i = j = 0
    for r, c in w.blocks:
        layout[i:i + len(r), j:j + len(c)] = 1
        i, j = i + len(r), j + len(c)
    stable = verify_stable(row_normalize(w.A), col_normalize(w.A), 0.0)
    return binary and contained and vectors and np.array_equal(permuted, layout) and stable


def test_criterion_7_stable_witness():
    worked = [
        ([[1, 0, 0], [0, 1, 1]], [[1, 0, 0], [0, 1, 1]]),
        ([[1, 1, 0], [0, 0, 1]], [[1, 1, 0], [0, 0, 1]]),
        ([[1, 1, 1], [1, 0, 0]], [[0, 1, 1], [1, 0, 0]]),
    ]
    verbatim = all(np.array_equal(construct_stable_witness(m).A, a) for m, a in worked)
    batch = random_batch(200, max_dim=8, seed=71) + [np.asarray(m, float) for m, _ in worked]
    good = sum(_witness_ok(m, construct_stable_witness(m)) for m in batch)
    checks = {"worked cases verbatim": verbatim, "postconditions": good == len(batch)}
    report(7, checks, f"{good}/{len(batch)} witnesses valid, worked cases verbatim={verbatim}")
