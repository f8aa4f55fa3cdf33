"""
Report models and the conversion of library results into JSON-safe payloads.
Rationals render as "p/q" (integers as "n"), seeds by name, operators as
parser-readable text.
"""

import dataclasses
import json
import math
from fractions import Fraction
from functools import singledispatch
from typing import Any, List

from pydantic import BaseModel, Field

from geops.arith import GalochkinReport, GevreyReport, PochhammerReport, RateSummary, Recurrence, SequenceWindow
from geops.kernel import Poly, RatFun, rat_str
from geops.laplace import RhoTable
from geops.newton import Edge, EShapeReport, NewtonPolygon, PointReport, SingularityReport
from geops.opalg import DifferenceOp, DiffOp, RatOp, ThetaOp, describe
from geops.series import PuiseuxLogSeries, SeedCombo, coeff_str
from geops.solutions import FormalSolution, FormalSolutionBasis, PCurvatureReport


class Report(BaseModel):
    command: str
    inputs: dict = Field(default_factory=dict)
    results: dict = Field(default_factory=dict)
    warnings: List[str] = Field(default_factory=list)
    deficient: bool = False

    def add_warning(self, message: str, deficient: bool = False) -> None:
        self.warnings.append(message)
        self.deficient = self.deficient or deficient

    def payload(self) -> dict:
        # results hold library objects; they are converted here, not by pydantic
        return to_payload({
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "warnings": list(self.warnings),
            "deficient": self.deficient,
        })

    def to_json(self) -> str:
        return json.dumps(self.payload(), sort_keys=True, indent=2)

    def to_text(self) -> str:
        return "\n".join(_text_lines(self.payload(), 0))


def _text_lines(value: Any, depth: int) -> list:
    pad = "  " * depth
    if isinstance(value, dict):
        out = []
        for k in sorted(value):
            v = value[k]
            if isinstance(v, (dict, list)) and v:
                out.append(f"{pad}{k}:")
                out.extend(_text_lines(v, depth + 1))
            else:
                out.append(f"{pad}{k}: {_scalar_text(v)}")
        return out
    if isinstance(value, list):
        out = []
        for v in value:
            if isinstance(v, (dict, list)) and v:
                out.append(f"{pad}-")
                out.extend(_text_lines(v, depth + 1))
            else:
                out.append(f"{pad}- {_scalar_text(v)}")
        return out
    return [f"{pad}{_scalar_text(value)}"]


def _scalar_text(v: Any) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (dict, list)):
        return "{}" if isinstance(v, dict) else "[]"
    return str(v)


# ---------------------------------------------------------------------------
# Payload conversion
# ---------------------------------------------------------------------------
@singledispatch
def to_payload(value: Any) -> Any:
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_payload(getattr(value, f.name)) for f in dataclasses.fields(value)}
    return value


@to_payload.register
def _(value: dict) -> dict:
    return {_key(k): to_payload(v) for k, v in value.items()}


@to_payload.register(list)
@to_payload.register(tuple)
@to_payload.register(set)
@to_payload.register(frozenset)
def _(value) -> list:
    items = [to_payload(v) for v in value]
    if isinstance(value, (set, frozenset)):
        items.sort(key=str)
    return items


@to_payload.register
def _(value: bool) -> bool:
    return value


@to_payload.register
def _(value: int) -> str:
    return str(value)


@to_payload.register
def _(value: Fraction) -> str:
    return rat_str(value)


@to_payload.register
def _(value: float) -> Any:
    if math.isnan(value) or math.isinf(value):
        return str(value)
    return round(value, 10)


@to_payload.register
def _(value: SeedCombo) -> str:
    return coeff_str(value)


@to_payload.register(Poly)
def _(value: Poly) -> str:
    return value.to_str("z")


@to_payload.register(DiffOp)
@to_payload.register(ThetaOp)
@to_payload.register(DifferenceOp)
def _(value) -> str:
    return describe(value)


@to_payload.register
def _(value: RatOp) -> str:
    return str(value)


@to_payload.register
def _(value: RatFun) -> str:
    return str(value)


@to_payload.register
def _(value: Recurrence) -> str:
    return value.to_str()


@to_payload.register
def _(value: SequenceWindow) -> dict:
    return {"provenance": value.provenance, "terms": to_payload(value.terms)}


@to_payload.register
def _(value: PuiseuxLogSeries) -> dict:
    return {
        "variable": value.variable,
        "direction": to_payload(value.direction),
        "terms": [[to_payload(e), to_payload(k), to_payload(c)] for e, k, c in value.terms()],
        "valid_through": to_payload(value.valid_through()),
    }


@to_payload.register
def _(value: FormalSolution) -> dict:
    return {
        "zeta": to_payload(value.zeta),
        "exponent": to_payload(value.exponent),
        "log_degree": to_payload(value.log_degree),
        "series": str(value.series),
    }


@to_payload.register
def _(value: FormalSolutionBasis) -> dict:
    return {
        "at": value.at,
        "order": to_payload(value.order),
        "truncation": to_payload(value.truncation),
        "count": to_payload(len(value.solutions)),
        "solutions": to_payload(value.solutions),
        "deficient": value.deficient,
        "notes": list(value.notes),
    }


@to_payload.register
def _(value: Edge) -> dict:
    return {"slope": value.label, "length": to_payload(value.length), "side": value.side}


@to_payload.register
def _(value: NewtonPolygon) -> dict:
    return {
        "vertices": [[to_payload(u), to_payload(v)] for u, v in value.vertices],
        "edges": to_payload(value.edges),
        "slopes_at_zero": to_payload(value.slopes_at_zero()),
        "slopes_at_infinity": to_payload(value.slopes_at_infinity()),
    }


@to_payload.register
def _(value: PointReport) -> dict:
    return {
        "location": value.location,
        "multiplicity": to_payload(value.multiplicity),
        "classification": value.classification,
        "slopes": to_payload(value.slopes),
        "exponents": to_payload(value.exponents),
        "indicial_remainder": to_payload(value.indicial_remainder),
        "note": value.note,
    }


@to_payload.register
def _(value: SingularityReport) -> dict:
    return {"finite": to_payload(value.finite), "infinity": to_payload(value.infinity)}


@to_payload.register
def _(value: EShapeReport) -> dict:
    return {
        "ok": value.ok,
        "reasons": list(value.reasons),
        "slopes_at_infinity": to_payload(value.slopes_at_infinity),
        "exponents_at_zero": to_payload(value.exponents_at_zero),
    }


@to_payload.register
def _(value: RateSummary) -> dict:
    return {
        "tail_start": to_payload(value.tail_start),
        "tail_max": to_payload(value.tail_max),
        "drift": to_payload(value.drift),
        "ceiling": to_payload(value.ceiling),
        "constant": to_payload(value.constant),
        "verdict": value.verdict,
    }


@to_payload.register
def _(value: GevreyReport) -> dict:
    return {
        "s": to_payload(value.s),
        "window": to_payload(value.window),
        "window_length": to_payload(value.window[1] - value.window[0] + 1),
        "order_estimate": to_payload(value.order_estimate),
        "order_snapped": to_payload(value.order_snapped),
        "denominator": to_payload(value.denominator),
        "magnitude": to_payload(value.magnitude),
        "bounded": value.bounded,
    }


@to_payload.register
def _(value: PochhammerReport) -> dict:
    return {
        "a": to_payload(value.a),
        "b": to_payload(value.b),
        "window_length": to_payload(len(value.values)),
        "rates": to_payload(value.rates),
    }


@to_payload.register
def _(value: GalochkinReport) -> dict:
    return {
        "denominators": to_payload(value.denominators),
        "rates": to_payload(value.rates),
        "first_operators": [str(op) for op in value.first_operators],
    }


@to_payload.register
def _(value: PCurvatureReport) -> dict:
    return {
        "p": to_payload(value.p),
        "matrix": value.matrix,
        "nilpotent": value.nilpotent,
        "nilpotency_index": to_payload(value.nilpotency_index),
        "is_zero": value.is_zero,
    }


@to_payload.register
def _(value: RhoTable) -> dict:
    rows = {}
    for m in sorted(value.rows):
        rows[str(m)] = [to_payload(value.value(m, j)) for j in range(value.K + 1)]
    return {"alpha": to_payload(value.alpha), "K": to_payload(value.K), "rows": rows,
            "flagged": to_payload(value.flagged)}


def _key(k: Any) -> str:
    if isinstance(k, str):
        return k
    payload = to_payload(k)
    return payload if isinstance(payload, str) else str(payload)
