"""Command-line interface.

Every subcommand reads matrices from CSV or JSON files (chosen by extension),
calls one library function and prints its report as JSON on stdout.

Exit codes: 0 success, 1 bad input or usage, 2 an iteration did not converge
(the report is still printed), 3 an internal invariant failed.
"""

import argparse
import csv
import io
import sys
import warnings

from . import io as mio
from .crossratio import DEFAULT_REL_TOL, cr_equivalent, cross_ratio_profile
from .errors import CoopInfError, InvariantViolation
from .index import LowConfidence, bvn_decompose, ci_bounds, cooperative_index
from .matrix import DEFAULT_MAX_ITERS, DEFAULT_TOL
from .patterns import DEFAULT_DIAG_LIMIT, classify_support
from .perturbation import continuity_sweep, sensitivity_report
from .sinkhorn import entropic_transport, sinkhorn, sinkhorn_on_pattern
from .witness import construct_stable_witness

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _location(text):
    try:
        i, j = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected i,j but got {text!r}") from None
    return i, j


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _iter_opts(p):
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)


def build_parser():
    parser = _Parser(prog="coopinf", description="Sinkhorn scaling and cooperative-index tools.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sinkhorn", help="stable limit of the Sinkhorn iteration")
    p.add_argument("file")
    _iter_opts(p)
    p.add_argument("--use-pattern", action="store_true", help="iterate on M-bar instead of M")
    p.add_argument("--history", action="store_true", help="include the per-sweep residuals")

    p = sub.add_parser("ci", help="cooperative index")
    p.add_argument("file")
    _iter_opts(p)

    p = sub.add_parser("bounds", help="cooperative index and its lower bounds")
    p.add_argument("file")
    p.add_argument("--diag-limit", type=int, default=DEFAULT_DIAG_LIMIT)
    _iter_opts(p)

    p = sub.add_parser("pattern", help="on/off-diagonal classification of the support")
    p.add_argument("file")

    p = sub.add_parser("cr-equiv", help="cross-ratio equivalence of two square matrices")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL)
    p.add_argument("--diag-limit", type=int, default=DEFAULT_DIAG_LIMIT)

    p = sub.add_parser("perturb", help="effect of a single-entry perturbation")
    p.add_argument("file")
    p.add_argument("--at", type=_location, required=True, metavar="I,J")
    p.add_argument("--eps", type=float, required=True)
    _iter_opts(p)

    p = sub.add_parser("sweep", help="perturbation sweep over several eps values")
    p.add_argument("file")
    p.add_argument("--at", type=_location, required=True, metavar="I,J")
    p.add_argument("--eps-list", type=_floats, required=True, metavar="E1,E2,...")
    p.add_argument("--csv", action="store_true", help="emit eps,kind,limit_distance,ci_after as CSV")
    _iter_opts(p)

    p = sub.add_parser("bvn", help="Birkhoff decomposition of a doubly stochastic matrix")
    p.add_argument("file")

    p = sub.add_parser("stable-witness", help="binary block-vector stable witness")
    p.add_argument("file")
    p.add_argument("--within-limit", action="store_true", help="build the witness inside the limit support")

    p = sub.add_parser("ot", help="entropic optimal transport plan")
    p.add_argument("--cost", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--r")
    p.add_argument("--c")
    _iter_opts(p)
    return parser


def _cmd_sinkhorn(a):
    m = mio.load_matrix(a.file)
    if a.use_pattern:
        res = sinkhorn_on_pattern(m, a.tol, a.max_iters, history=a.history)
    else:
        res = sinkhorn(m, a.tol, a.max_iters, history=a.history)
    return res.to_dict(), res.converged


def _cmd_ci(a):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", LowConfidence)
        ci = cooperative_index(mio.load_matrix(a.file), a.tol, a.max_iters)
    return {"ci": ci}, not any(issubclass(w.category, LowConfidence) for w in caught)


def _cmd_bounds(a):
    res = ci_bounds(mio.load_matrix(a.file), a.diag_limit, a.tol, a.max_iters)
    return res.to_dict(), res.converged


def _cmd_pattern(a):
    return classify_support(mio.load_matrix(a.file)).to_dict(), True


def _cmd_cr_equiv(a):
    ma, mb = mio.load_matrix(a.file_a), mio.load_matrix(a.file_b)
    out = {
        "equivalent": cr_equivalent(ma, mb, a.rel_tol, a.diag_limit),
        "profiles": [
            cross_ratio_profile(ma, a.diag_limit).to_dict(),
            cross_ratio_profile(mb, a.diag_limit).to_dict(),
        ],
    }
    return out, True


def _cmd_perturb(a):
    rep = sensitivity_report(mio.load_matrix(a.file), *a.at, a.eps, a.tol, a.max_iters)
    return rep.to_dict(), rep.converged


def _cmd_sweep(a):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        reps = continuity_sweep(mio.load_matrix(a.file), *a.at, a.eps_list, a.tol, a.max_iters)
    ok = all(r.converged for r in reps)
    if a.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "kind", "limit_distance", "ci_after"])
        for r in reps:
            w.writerow([format(r.epsilon, ".17g"), r.kind, format(r.limit_distance, ".17g"), format(r.ci_after, ".17g")])
        return buf.getvalue(), ok
    return [r.to_dict() for r in reps], ok


def _cmd_bvn(a):
    return bvn_decompose(mio.load_matrix(a.file)).to_dict(), True


def _cmd_stable_witness(a):
    return construct_stable_witness(mio.load_matrix(a.file), within_limit=a.within_limit).to_dict(), True


def _cmd_ot(a):
    cost = mio.load_array(a.cost, allow_inf=True)
    r = mio.load_vector(a.r) if a.r else None
    c = mio.load_vector(a.c) if a.c else None
    out = entropic_transport(cost, a.lam, r, c, a.tol, a.max_iters)
    return out, out["converged"]


COMMANDS = {
    "sinkhorn": _cmd_sinkhorn,
    "ci": _cmd_ci,
    "bounds": _cmd_bounds,
    "pattern": _cmd_pattern,
    "cr-equiv": _cmd_cr_equiv,
    "perturb": _cmd_perturb,
    "sweep": _cmd_sweep,
    "bvn": _cmd_bvn,
    "stable-witness": _cmd_stable_witness,
    "ot": _cmd_ot,
}


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=stderr)
        return EXIT_INPUT
    try:
        report, converged = COMMANDS[args.command](args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=stderr)
        return EXIT_INVARIANT
    except (CoopInfError, OSError, IndexError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    stdout.write(report if isinstance(report, str) else mio.dumps(report) + "\n")
    if not converged:
        print("warning: iteration did not converge", file=stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


run = main
