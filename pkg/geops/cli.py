"""
Command-line front end.

    python -m geops.cli fl "z*D^2 + (1-z)*D - 1" --symmetrized
    python -m geops.cli polygon "D^2 - z"
    python -m geops.cli suite airy --truncate 60

Reports go to stdout (JSON by default), logs to stderr.  Exit status: 0 on
success, 2 on input errors, 1 on internal failures or, with --strict, when
the report carries a deficiency flag.  Negative rationals are passed to
options as --order=-2/3.
"""

import argparse
import logging
import random
import sys
from fractions import Fraction
from typing import Callable, Optional, Sequence

from geops import __version__
from geops.arith import (
    SequenceWindow,
    condition_G_report,
    galochkin_sequence,
    generate,
    operator_to_recurrence,
    pochhammer_growth,
    recurrence_to_operator,
    section,
)
from geops.config import DEFAULT_TRUNCATION, LOG_FORMAT, LOG_LEVEL
from geops.errors import GeopsError, InconsistencyError, PreconditionError
from geops.kernel import Poly, rat_str
from geops.laplace import build_E_operator, laplace_puiseux, recalibrate, rho_table
from geops.mellin import FactorialSeries, inverse_mellin_operator, mellin_operator, mellin_series, nicole_convert
from geops.models import Report
from geops.newton import (
    INFINITY,
    exponents,
    fl_polygon_map,
    irregularity_accounting,
    polygon,
    singularities,
)
from geops.opalg import (
    DifferenceOp,
    DiffOp,
    adjoint,
    descend,
    fourier_laplace,
    gcrd,
    invert,
    lclm,
    ramify,
    right_divide,
    strip_z,
    symmetry,
    twist_exp,
)
from geops.parser import parse_diffop, parse_operator, parse_rational, parse_rationals, parse_recurrence
from geops.solutions import (
    duality_exponent_check,
    frobenius_basis,
    infinity_basis,
    p_curvature,
    verify_basis,
)
from geops.suites import SUITE_NAMES, run_suite

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILURE, EXIT_INPUT = 0, 1, 2


def _point(text: str):
    return INFINITY if text.strip().lower() in ("inf", "infinity") else parse_rational(text)


def _truncation(args) -> int:
    return args.truncate if args.truncate is not None else DEFAULT_TRUNCATION


# ---------------------------------------------------------------------------
# Operator algebra
# ---------------------------------------------------------------------------
def _cmd_fl(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    report.inputs["operator"] = op
    report.inputs["symmetrized"] = args.symmetrized
    report.results["transform"] = fourier_laplace(op, symmetrized=args.symmetrized).normalized()


def _cmd_adjoint(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    report.inputs["operator"] = op
    report.results["adjoint"] = adjoint(op)


def _cmd_lclm(args, report: Report) -> None:
    a, b = parse_diffop(args.left), parse_diffop(args.right)
    report.inputs.update(left=a, right=b)
    report.results["lclm"] = lclm(a, b)
    report.results["gcrd"] = gcrd(a, b)


def _cmd_divide(args, report: Report) -> None:
    a, b = parse_diffop(args.dividend), parse_diffop(args.divisor)
    report.inputs.update(dividend=a, divisor=b)
    q, r = right_divide(a, b)
    report.results.update(quotient=q, remainder=r, exact=r.is_zero())


def _cmd_ramify(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    report.inputs.update(operator=op, index=args.index)
    report.results["ramified"] = ramify(op, args.index)


def _cmd_descend(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    report.inputs.update(operator=op, index=args.index)
    report.results["descended"] = descend(op, args.index)


def _cmd_invert(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    report.inputs["operator"] = op
    report.results["inverted"] = invert(op)


def _cmd_twist(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    zeta = parse_rational(args.zeta)
    report.inputs.update(operator=op, zeta=zeta)
    report.results["twisted"] = twist_exp(op, zeta)
    report.add_warning("twist convention: D -> D - zeta maps annihilators of h to those of e^{zeta z} h")


def _cmd_polygon(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    report.inputs["operator"] = op
    N = polygon(op)
    report.results["polygon"] = N
    report.results["fl_image"] = fl_polygon_map(N)
    report.results["irregularity"] = {
        loc: {"defect": defect, "edge_lengths": lengths}
        for loc, (defect, lengths) in irregularity_accounting(op).items()
    }


def _cmd_singularities(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    report.inputs["operator"] = op
    rep = singularities(op, _truncation(args))
    report.results["singularities"] = rep
    for p in rep.finite:
        if p.note:
            report.add_warning(f"{p.location}: {p.note}")


def _cmd_exponents(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    point = _point(args.at)
    report.inputs.update(operator=op, at=point)
    roots, rest = exponents(op, point)
    report.results["exponents"] = roots
    if rest.degree > 0:
        report.results["remainder"] = rest
        report.add_warning(f"indicial factor {rest.to_str('X')} has no rational roots", deficient=True)


def _basis_report(op: DiffOp, basis, report: Report) -> None:
    report.results["basis"] = basis
    report.results["verified"] = verify_basis(op, basis)
    for note in basis.notes:
        report.add_warning(note)
    if basis.deficient:
        report.add_warning(f"basis at {basis.at} has {len(basis.solutions)} of {basis.order} members",
                           deficient=True)


def _cmd_frobenius(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    a = parse_rational(args.at)
    report.inputs.update(operator=op, at=a, truncation=_truncation(args))
    _basis_report(op, frobenius_basis(op, a, _truncation(args)), report)


def _cmd_infinity_basis(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    report.inputs.update(operator=op, truncation=_truncation(args))
    _basis_report(op, infinity_basis(op, _truncation(args)), report)


def _cmd_pcurvature(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    if not args.prime:
        raise PreconditionError("pcurvature needs --prime")
    report.inputs.update(operator=op, primes=args.prime)
    report.results["reports"] = [p_curvature(op, p) for p in args.prime]


def _cmd_duality(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    report.inputs["operator"] = op
    rep = duality_exponent_check(op)
    report.results["duality"] = rep
    for note in rep.notes:
        report.add_warning(note)
    if rep.deficient:
        report.add_warning("duality check ran on a deficient basis", deficient=True)


def _cmd_build_e(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    report.inputs.update(operator=op, laplace_side=args.laplace_side)
    report.results["e_operator"] = build_E_operator(op, from_laplace_side=args.laplace_side).normalized()


def _cmd_recalibrate(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    if args.order is None:
        raise PreconditionError("recalibrate needs --order")
    s = parse_rational(args.order)
    report.inputs.update(operator=op, order=s)
    report.results["recalibrated"] = recalibrate(op, s)


# ---------------------------------------------------------------------------
# Sequences
# ---------------------------------------------------------------------------
def _inits(args) -> Optional[list]:
    return parse_rationals(args.inits) if args.inits else None


def _cmd_to_recurrence(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    report.inputs["operator"] = op
    report.results["recurrence"] = operator_to_recurrence(op)


def _cmd_to_operator(args, report: Report) -> None:
    R = parse_recurrence(args.recurrence)
    report.inputs.update(recurrence=R, inits=_inits(args))
    report.results["operator"] = recurrence_to_operator(R, _inits(args), boundary=not args.no_boundary)


def _window(args) -> SequenceWindow:
    kind = args.kind
    N = _truncation(args)
    if kind == "sequence":
        return SequenceWindow(tuple(parse_rationals(args.source)), "command line")
    R = operator_to_recurrence(parse_diffop(args.source)) if kind == "operator" else parse_recurrence(args.source)
    inits = _inits(args)
    if inits is None:
        inits = [Fraction(1)] + [Fraction(0)] * max(0, R.order - 1)
    return generate(R, inits, N)


def _cmd_generate(args, report: Report) -> None:
    W = _window(args)
    report.inputs.update(source=args.source, kind=args.kind, truncation=_truncation(args))
    report.results["window"] = W


def _cmd_section(args, report: Report) -> None:
    R = parse_recurrence(args.recurrence)
    report.inputs.update(recurrence=R, u=args.u, v=args.v)
    report.results["section"] = section(R, args.u, args.v, _inits(args))


def _cmd_gevrey(args, report: Report) -> None:
    s = parse_rational(args.order) if args.order is not None else Fraction(0)
    W = _window(args)
    report.inputs.update(source=args.source, kind=args.kind, order=s, length=len(W))
    rep = condition_G_report(W, s)
    report.results["gevrey"] = rep
    if not rep.bounded:
        report.add_warning(f"rates unbounded at order {rat_str(s)}")


def _cmd_galochkin(args, report: Report) -> None:
    op = parse_diffop(args.operator)
    report.inputs.update(operator=op, steps=_truncation(args))
    report.results["galochkin"] = galochkin_sequence(op, _truncation(args))


def _cmd_pochhammer(args, report: Report) -> None:
    a, b = parse_rational(args.a), parse_rational(args.b)
    report.inputs.update(a=a, b=b, terms=_truncation(args))
    report.results["pochhammer"] = pochhammer_growth(a, b, _truncation(args))


# ---------------------------------------------------------------------------
# Laplace and Mellin
# ---------------------------------------------------------------------------
def _cmd_laplace(args, report: Report) -> None:
    alpha = parse_rational(args.alpha)
    report.inputs.update(alpha=alpha, log_power=args.log)
    report.results["image"] = laplace_puiseux(alpha, args.log)
    report.results["text"] = str(laplace_puiseux(alpha, args.log))


def _cmd_rho_table(args, report: Report) -> None:
    alpha = parse_rational(args.alpha)
    report.inputs.update(alpha=alpha, K=args.K, rows=args.rows)
    table = rho_table(alpha, args.K, args.rows)
    report.results["table"] = table
    for m in table.flagged:
        report.add_warning(f"row {m} sits on the pole alpha + m = 0")


def _cmd_mellin_op(args, report: Report) -> None:
    op = parse_operator(args.operator)
    report.inputs["operator"] = op
    if isinstance(op, DifferenceOp):
        report.results["image"] = mellin_operator(op)
    else:
        op = parse_diffop(args.operator)
        report.results["preimage"] = inverse_mellin_operator(op)


def _cmd_mellin_series(args, report: Report) -> None:
    rho = parse_rational(args.rho)
    g = FactorialSeries(rho, tuple(parse_rationals(args.coefficients)), allow_negative_integer=True)
    report.inputs.update(rho=rho, coefficients=g.coeffs)
    if rho.denominator == 1 and rho < 0:
        report.add_warning("negative integer rho: the series map is not injective here")
    series = mellin_series(g)
    report.results["series"] = series
    report.results["text"] = str(series)


def _cmd_nicole(args, report: Report) -> None:
    values = parse_rationals(args.coefficients)
    report.inputs.update(coefficients=values, reverse=args.reverse)
    key = "factorial_coefficients" if args.reverse else "asymptotic_coefficients"
    report.results[key] = nicole_convert(values, reverse=args.reverse)


# ---------------------------------------------------------------------------
# Suites and self test
# ---------------------------------------------------------------------------
def _cmd_suite(args, report: Report) -> None:
    report.inputs.update(suite=args.name, truncation=_truncation(args))
    result = run_suite(args.name, _truncation(args))
    report.results.update(result)
    if not result["all_pass"]:
        failed = sorted(k for k, c in result["checks"].items() if not c["pass"])
        report.add_warning("failed checks: " + ", ".join(failed), deficient=True)


def _random_diffop(rng: random.Random, order: int = 3, degree: int = 3) -> DiffOp:
    while True:
        rows = tuple(
            Poly(tuple(Fraction(rng.randint(-3, 3)) for _ in range(rng.randint(0, degree + 1))))
            for _ in range(rng.randint(1, order + 1))
        )
        op = DiffOp(rows)
        if not op.is_zero():
            return op


def _random_difference_op(rng: random.Random) -> DifferenceOp:
    while True:
        rows = tuple(
            Poly(tuple(Fraction(rng.randint(-3, 3)) for _ in range(rng.randint(0, 3))))
            for _ in range(rng.randint(1, 3))
        )
        op = DifferenceOp(rows)
        if not op.is_zero():
            return op


def selftest(seed: int, rounds: int = 25) -> dict:
    """Randomized algebraic identities; each entry counts failures."""
    rng = random.Random(seed)
    failures = {"weyl_associativity": 0, "fl_involution": 0, "fl_multiplicative": 0,
                "polygon_map": 0, "recurrence_round_trip": 0, "mellin_multiplicative": 0,
                "mellin_round_trip": 0}
    for _ in range(rounds):
        A, B, C = (_random_diffop(rng) for _ in range(3))
        if (A * B) * C != A * (B * C):
            failures["weyl_associativity"] += 1
        if fourier_laplace(fourier_laplace(A)).normalized() != symmetry(A):
            failures["fl_involution"] += 1
        if fourier_laplace(A * B) != fourier_laplace(A) * fourier_laplace(B):
            failures["fl_multiplicative"] += 1
        if fl_polygon_map(polygon(A)) != polygon(fourier_laplace(A)):
            failures["polygon_map"] += 1
        if recurrence_to_operator(operator_to_recurrence(A), boundary=False) != strip_z(A).normalized():
            failures["recurrence_round_trip"] += 1
        X, Y = _random_difference_op(rng), _random_difference_op(rng)
        if mellin_operator(X * Y) != mellin_operator(X) * mellin_operator(Y):
            failures["mellin_multiplicative"] += 1
        if inverse_mellin_operator(mellin_operator(X)) != X:
            failures["mellin_round_trip"] += 1
    return failures


def _cmd_selftest(args, report: Report) -> None:
    report.inputs.update(seed=args.seed, rounds=args.rounds)
    failures = selftest(args.seed, args.rounds)
    report.results["failures"] = failures
    report.results["ok"] = not any(failures.values())
    if not report.results["ok"]:
        raise InconsistencyError("self test failed: " + ", ".join(k for k, v in failures.items() if v))


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------
def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--truncate", type=int, default=None,
                        help=f"series truncation / window length (default {DEFAULT_TRUNCATION})")
    common.add_argument("--prime", type=int, action="append", default=None, help="prime for p-curvature; repeatable")
    common.add_argument("--order", default=None, help="rational order s, e.g. --order=-2/3")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--strict", action="store_true", help="exit 1 when the report carries a deficiency flag")
    return common


def _command(sub, name: str, handler: Callable, common, help_text: str, *positionals: str):
    p = sub.add_parser(name, parents=[common], help=help_text)
    for pos in positionals:
        p.add_argument(pos)
    p.set_defaults(handler=handler)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="geops", description="Exact computations with differential operators over Q[z].")
    parser.add_argument("--version", action="version", version=f"geops {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = _command(sub, "fl", _cmd_fl, common, "Fourier-Laplace transform", "operator")
    p.add_argument("--symmetrized", action="store_true")
    _command(sub, "adjoint", _cmd_adjoint, common, "formal adjoint", "operator")
    _command(sub, "lclm", _cmd_lclm, common, "least common left multiple and gcrd", "left", "right")
    _command(sub, "divide", _cmd_divide, common, "right Euclidean division over Q(z)", "dividend", "divisor")
    _command(sub, "ramify", _cmd_ramify, common, "annihilator of f(z^u)", "operator").add_argument("index", type=int)
    _command(sub, "descend", _cmd_descend, common, "annihilator of g with g(z^u) = f", "operator").add_argument("index", type=int)
    _command(sub, "invert", _cmd_invert, common, "annihilator of f(1/z)", "operator")
    _command(sub, "twist", _cmd_twist, common, "D -> D - zeta", "operator", "zeta")
    _command(sub, "polygon", _cmd_polygon, common, "Newton polygon and its FL image", "operator")
    _command(sub, "singularities", _cmd_singularities, common, "singularity inventory", "operator")
    _command(sub, "exponents", _cmd_exponents, common, "local exponents", "operator").add_argument("--at", default="0")
    _command(sub, "frobenius", _cmd_frobenius, common, "Frobenius basis", "operator").add_argument("--at", default="0")
    _command(sub, "infinity-basis", _cmd_infinity_basis, common, "formal basis at infinity", "operator")
    _command(sub, "pcurvature", _cmd_pcurvature, common, "p-curvature", "operator")
    _command(sub, "duality-check", _cmd_duality, common, "exponent duality under FL", "operator")
    _command(sub, "to-recurrence", _cmd_to_recurrence, common, "operator to coefficient recurrence", "operator")
    p = _command(sub, "to-operator", _cmd_to_operator, common, "recurrence to operator", "recurrence")
    p.add_argument("--inits", default=None)
    p.add_argument("--no-boundary", action="store_true")
    for name, handler, help_text in (("generate", _cmd_generate, "generate a sequence window"),
                                     ("gevrey", _cmd_gevrey, "condition (G) report")):
        p = _command(sub, name, handler, common, help_text, "source")
        p.add_argument("--kind", choices=("recurrence", "operator", "sequence"), default="recurrence")
        p.add_argument("--inits", default=None)
    p = _command(sub, "section", _cmd_section, common, "recurrence of a_{un+v}", "recurrence")
    p.add_argument("u", type=int)
    p.add_argument("v", type=int)
    p.add_argument("--inits", default=None)
    _command(sub, "galochkin", _cmd_galochkin, common, "Galochkin denominators", "operator")
    _command(sub, "pochhammer", _cmd_pochhammer, common, "denominators of (a)_n/(b)_n", "a", "b")
    _command(sub, "laplace", _cmd_laplace, common, "image of z^alpha log^k z", "alpha").add_argument("--log", type=int, default=0)
    p = _command(sub, "rho-table", _cmd_rho_table, common, "rho recurrence table", "alpha")
    p.add_argument("K", type=int)
    p.add_argument("--rows", type=int, default=5)
    _command(sub, "build-e", _cmd_build_e, common, "E-operator from a G-operator", "operator").add_argument(
        "--laplace-side", action="store_true")
    _command(sub, "recalibrate", _cmd_recalibrate, common, "annihilator of y(z^{-s})", "operator")
    _command(sub, "mellin-op", _cmd_mellin_op, common, "Mellin image (difference op) or preimage (diff op)", "operator")
    _command(sub, "mellin-series", _cmd_mellin_series, common, "Mellin image of a factorial series", "rho", "coefficients")
    _command(sub, "nicole", _cmd_nicole, common, "factorial <-> asymptotic coefficients (rho = 0)", "coefficients").add_argument(
        "--reverse", action="store_true")
    p = _command(sub, "suite", _cmd_suite, common, "bundled example suite")
    p.add_argument("name", choices=SUITE_NAMES)
    p = _command(sub, "selftest", _cmd_selftest, common, "randomized identities")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--rounds", type=int, default=25)
    return parser


def _emit(report: Report, fmt: str) -> None:
    print(report.to_json() if fmt == "json" else report.to_text())


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT
    report = Report(command=args.command)
    try:
        args.handler(args, report)
    except InconsistencyError as e:
        logger.error("internal inconsistency in %s: %s", args.command, e)
        report.add_warning(str(e), deficient=True)
        _emit(report, args.format)
        return EXIT_FAILURE
    except (GeopsError, ValueError) as e:
        logger.error("input error in %s: %s", args.command, e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:
        logger.error("unexpected failure in %s: %s", args.command, e, exc_info=True)
        return EXIT_FAILURE
    _emit(report, args.format)
    if args.strict and report.deficient:
        return EXIT_FAILURE
    return EXIT_OK


def main() -> None:
    logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT, stream=sys.stderr)
    sys.exit(run())


if __name__ == "__main__":
    main()
