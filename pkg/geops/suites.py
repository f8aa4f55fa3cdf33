"""
Bundled example pipelines.  Operators and parameters come from suites.yaml;
each pipeline returns per-check evidence and an overall all_pass flag.
"""

import logging
import math
from fractions import Fraction
from typing import Callable, Optional

import yaml

from geops.arith import SequenceWindow, condition_G_report, galochkin_sequence, generate, operator_to_recurrence
from geops.config import DEFAULT_SUITES_YAML_PATH, DEFAULT_TRUNCATION
from geops.errors import GeopsError, PreconditionError
from geops.kernel import Poly, pochhammer
from geops.laplace import build_E_operator, recalibrate
from geops.newton import exponents, is_E_shape, polygon, singularities
from geops.opalg import DiffOp, apply, fourier_laplace, right_divide
from geops.parser import parse_diffop, parse_rational
from geops.series import PuiseuxLogSeries
from geops.solutions import (
    duality_exponent_check,
    frobenius_basis,
    infinity_basis,
    p_curvature,
    verify_basis,
)

logger = logging.getLogger(__name__)

SUITE_NAMES = ("airy", "weber", "whittaker", "euler", "remark42")


def load_suites(path: Optional[str] = None) -> dict:
    path = path or DEFAULT_SUITES_YAML_PATH
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    suites = data.get("suites", {})
    logger.debug("loaded %d suite definitions (version %s) from %s", len(suites), data.get("version"), path)
    return suites


def _rats(values) -> list:
    return sorted(parse_rational(str(v)) for v in values)


def _rats_in_order(values) -> list:
    return [parse_rational(str(v)) for v in values]


def _record(checks: dict, key: str, fn: Callable) -> None:
    try:
        passed, evidence = fn()
    except GeopsError as e:
        logger.warning("suite check %s raised: %s", key, e)
        passed, evidence = False, {"error": str(e)}
    checks[key] = {"pass": bool(passed), "evidence": evidence}


def _basis_check(op: DiffOp, basis) -> tuple:
    ok = len(basis.solutions) == op.order and not basis.deficient and verify_basis(op, basis)
    return ok, basis


def _exponent_check(op: DiffOp, point, expected) -> tuple:
    roots, rest = exponents(op, point)
    got = sorted(r for r, m in roots.items() for _ in range(m))
    return got == _rats(expected) and rest.degree <= 0, {"exponents": got}


# ---------------------------------------------------------------------------
# Airy
# ---------------------------------------------------------------------------
def airy_asymptotic_window(N: int) -> SequenceWindow:
    """Coefficients of z^{-3n} in the asymptotic series: (3/4)^{2n} (1/6)_{2n} (5/6)_{2n} / (2n)!."""
    terms = []
    for m in range(N + 1):
        if m % 3:
            terms.append(Fraction(0))
            continue
        k = 2 * (m // 3)
        terms.append(Fraction(3, 4) ** k * pochhammer(Fraction(1, 6), k) * pochhammer(Fraction(5, 6), k)
                     / math.factorial(k))
    return SequenceWindow(tuple(terms), "Airy asymptotic coefficients")


def _airy(d: dict, N: int, checks: dict) -> None:
    op = parse_diffop(d["operator"])
    _record(checks, "slopes_at_infinity", lambda: (
        sorted(polygon(op).slopes_at_infinity()) == _rats(d["slopes_at_infinity"]),
        polygon(op),
    ))
    _record(checks, "no_finite_singularity", lambda: (not singularities(op).finite, singularities(op)))
    _record(checks, "taylor_basis", lambda: _basis_check(op, frobenius_basis(op, 0, N)))

    E = recalibrate(op, parse_rational(d["recalibrate"]))
    _record(checks, "recalibrated", lambda: (E == parse_diffop(d["expected_e_operator"]), {"operator": E}))
    _record(checks, "e_shape", lambda: (is_E_shape(E).ok, is_E_shape(E)))
    _record(checks, "exponents_at_zero", lambda: _exponent_check(E, 0, d["exponents_at_zero"]))

    F = fourier_laplace(E, symmetrized=True).normalized()
    _record(checks, "fl_transform", lambda: (F == parse_diffop(d["expected_fl"]), {"operator": F}))
    for point, expected in d.get("fl_exponents", {}).items():
        _record(checks, f"fl_exponents_at_{point}",
                lambda point=point, expected=expected: _exponent_check(F, parse_rational(point), expected))
    _record(checks, "frobenius_basis", lambda: _basis_check(E, frobenius_basis(E, 0, N)))
    _record(checks, "infinity_basis", lambda: _basis_check(E, infinity_basis(E, N)))
    _record(checks, "duality", lambda: (duality_exponent_check(E).ok, duality_exponent_check(E)))

    def pcurv():
        reports = [p_curvature(F, int(p)) for p in d["primes"]]
        return all(r.is_zero for r in reports), reports
    _record(checks, "p_curvature_zero", pcurv)

    def taylor_gevrey():
        window = generate(operator_to_recurrence(op), _rats_in_order(d["taylor_inits"]), int(d["taylor_window"]))
        report = condition_G_report(window, parse_rational(d["taylor_order"]))
        lo, hi = (float(x) for x in d["order_estimate_range"])
        est = report.order_estimate
        return report.bounded and est is not None and lo <= est <= hi, report
    _record(checks, "taylor_gevrey", taylor_gevrey)

    def asymptotic_gevrey():
        report = condition_G_report(airy_asymptotic_window(int(d["taylor_window"])),
                                    parse_rational(d["asymptotic_order"]))
        return report.bounded, report
    _record(checks, "asymptotic_gevrey", asymptotic_gevrey)


# ---------------------------------------------------------------------------
# Weber, Whittaker, Euler
# ---------------------------------------------------------------------------
def _weber(d: dict, N: int, checks: dict) -> None:
    op = parse_diffop(d["operator"])
    _record(checks, "slopes_at_infinity", lambda: (
        sorted(polygon(op).slopes_at_infinity()) == _rats(d["slopes_at_infinity"]),
        polygon(op),
    ))
    E = recalibrate(op, parse_rational(d["recalibrate"]))
    _record(checks, "recalibrated", lambda: (E == parse_diffop(d["expected_e_operator"]), {"operator": E}))
    _record(checks, "e_shape", lambda: (is_E_shape(E).ok, is_E_shape(E)))
    _record(checks, "frobenius_basis", lambda: _basis_check(E, frobenius_basis(E, 0, N)))
    _record(checks, "infinity_basis", lambda: _basis_check(E, infinity_basis(E, N)))


def _whittaker(d: dict, N: int, checks: dict) -> None:
    op = parse_diffop(d["operator"])
    F = fourier_laplace(op, symmetrized=True).normalized()
    _record(checks, "fl_transform", lambda: (F == parse_diffop(d["expected_fl"]), {"operator": F}))
    _record(checks, "exponents_at_zero", lambda: _exponent_check(op, 0, d["exponents_at_zero"]))
    _record(checks, "frobenius_basis", lambda: _basis_check(op, frobenius_basis(op, 0, N)))
    _record(checks, "infinity_basis", lambda: _basis_check(op, infinity_basis(op, N)))
    _record(checks, "duality", lambda: (duality_exponent_check(op).ok, duality_exponent_check(op)))


def _euler(d: dict, N: int, checks: dict) -> None:
    op = parse_diffop(d["operator"])
    F = fourier_laplace(op, symmetrized=True).normalized()
    _record(checks, "fl_transform", lambda: (F == parse_diffop(d["expected_fl"]), {"operator": F}))
    _record(checks, "frobenius_basis", lambda: _basis_check(op, frobenius_basis(op, 0, N)))
    basis = infinity_basis(op, N)
    _record(checks, "infinity_basis", lambda: _basis_check(op, basis))

    def three_function():
        part = [s for s in basis.solutions if s.zeta == 0]
        if len(part) != 1:
            return False, {"solutions_at_zeta_0": len(part)}
        upto = min(int(d["series_terms"]), N - 1)
        bad = [n for n in range(upto + 1)
               if part[0].series.coefficient(-n - 1) != (-1) ** n * math.factorial(n)]
        return not bad, {"checked_through": upto, "mismatches": bad, "series": part[0]}
    _record(checks, "three_function", three_function)
    _record(checks, "exponential_part", lambda: (Fraction(-1) in basis.grouping, {"parts": sorted(basis.grouping)}))

    def laplace_side():
        E = build_E_operator(parse_diffop(d["laplace_side"]), from_laplace_side=True).normalized()
        return E == op, {"operator": E}
    _record(checks, "build_e_from_laplace_side", laplace_side)


# ---------------------------------------------------------------------------
# Worked construction of an E-operator from a rational function
# ---------------------------------------------------------------------------
def _remark42(d: dict, N: int, checks: dict) -> None:
    phi = parse_diffop(d["phi"])
    theta = parse_diffop(d["theta"])
    left = parse_diffop(d["left_factor"])
    z_minus_1 = DiffOp.of_poly(Poly.linear(-1))

    _record(checks, "factorization", lambda: (z_minus_1 * phi == left * theta, {"lhs": z_minus_1 * phi}))

    def division():
        q, r = right_divide(z_minus_1 * phi, theta)
        return r.is_zero() and q.is_polynomial() and q.as_diffop() == left, {"quotient": q, "remainder": r}
    _record(checks, "right_division", division)

    def from_g():
        E = build_E_operator(parse_diffop(d["g_operator"])).normalized()
        return E == phi, {"operator": E}
    _record(checks, "build_e", from_g)

    def galochkin():
        report = galochkin_sequence(parse_diffop(d["g_operator"]), N)
        return report.rates.bounded, report
    _record(checks, "galochkin_bounded", galochkin)
    _record(checks, "psi_transform", lambda: (
        fourier_laplace(parse_diffop(d["psi"]), symmetrized=True).normalized() == phi,
        {"psi": parse_diffop(d["psi"])},
    ))

    def taylor_window():
        # (z - 1) e^z
        coeffs = [Fraction(n - 1, math.factorial(n)) for n in range(N + 1)]
        image = apply(phi, PuiseuxLogSeries.power_series(coeffs))
        return image.is_zero(), {"valid_through": image.valid_through()}
    _record(checks, "annihilates_taylor_window", taylor_window)
    _record(checks, "frobenius_basis", lambda: _basis_check(phi, frobenius_basis(phi, 0, N)))
    _record(checks, "infinity_basis", lambda: _basis_check(phi, infinity_basis(phi, N)))

    def nontrivial():
        pts = singularities(phi).nontrivial()
        return len(pts) == int(d["nontrivial_singularities"]), {"points": [p.location for p in pts]}
    _record(checks, "nontrivial_singularities", nontrivial)


_PIPELINES = {
    "airy": _airy,
    "weber": _weber,
    "whittaker": _whittaker,
    "euler": _euler,
    "remark42": _remark42,
}


def run_suite(name: str, truncation: Optional[int] = None, definitions: Optional[dict] = None) -> dict:
    if name not in _PIPELINES:
        raise PreconditionError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    definitions = definitions if definitions is not None else load_suites()
    if name not in definitions:
        raise PreconditionError(f"suite {name!r} has no definition in the suites file")
    N = truncation or DEFAULT_TRUNCATION
    d = definitions[name]
    logger.info("running suite %s at truncation %d", name, N)
    checks: dict = {}
    try:
        _PIPELINES[name](d, N, checks)
    except GeopsError as e:
        logger.error("suite %s aborted: %s", name, e)
        checks["pipeline"] = {"pass": False, "evidence": {"error": str(e)}}
    all_pass = bool(checks) and all(c["pass"] for c in checks.values())
    failed = sorted(k for k, c in checks.items() if not c["pass"])
    if failed:
        logger.warning("suite %s: failed checks %s", name, ", ".join(failed))
    return {
        "suite": name,
        "description": d.get("description", ""),
        "truncation": N,
        "checks": checks,
        "all_pass": all_pass,
    }
