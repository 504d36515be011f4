"""
Martinet Engine - Report

Turns engine records into the ReportJSON document: rationals as 'p/q' strings,
forms and polynomials as form-language text, enums as their values. Documents
are checked against schema/report.json.
"""

import json
import logging
from dataclasses import fields, is_dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Optional

import numpy as np
from jsonschema import Draft202012Validator

from config import SCHEMA_PATH, SCHEMA_VERSION
from exterior import DiffForm, PolyMapGerm, PolyVectorField, format_form
from invariants import InvariantReport, KernelField, Sigma22Data
from normal_form import EquivalenceVerdict
from scalar_poly import Chart, TruncatedPoly, format_poly, format_rational
from schemas import ClassificationModel, EquivalenceVerdictModel, InvariantReportModel, ReportJSON

# --- Logging ---
logger = logging.getLogger(__name__)


def jsonable(value: Any) -> Any:
    """Recursively convert engine values into JSON-ready values."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, int):
        return value
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, DiffForm):
        return format_form(value)
    if isinstance(value, TruncatedPoly):
        return format_poly(value)
    if isinstance(value, PolyVectorField):
        return [format_poly(c) for c in value.components]
    if isinstance(value, PolyMapGerm):
        return {name: format_poly(c) for name, c in zip(value.target.vars, value.components)}
    if isinstance(value, Chart):
        return list(value.vars)
    if isinstance(value, KernelField):
        return value.label()
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if is_dataclass(value):
        return {f.name: jsonable(getattr(value, f.name)) for f in fields(value)}
    raise TypeError(f"cannot serialise {type(value).__name__}")


# --- Model builders ---


def classification_model(data: Sigma22Data) -> ClassificationModel:
    return ClassificationModel(
        label=data.label,
        discriminant=format_rational(data.discriminant),
        template=data.template,
    )


def invariant_report_model(report: InvariantReport) -> InvariantReportModel:
    data = report.martinet
    return InvariantReportModel(
        martinet_function=format_poly(data.f),
        regime=report.regime,
        structurally_smooth=data.structurally_smooth,
        normal_var=data.normal_var,
        sigma=format_form(data.sigma) if data.sigma is not None else None,
        rank_sigma_0=report.rank_sigma_0,
        kernel_basis=jsonable(report.kernel_basis),
        kernel_cross_check=report.kernel_cross_check,
        orientation_sign=report.orientation_sign,
        dim_span_j1=report.dim_span_j1,
        sigma22_incidence=report.sigma22_incidence,
        ideal_verdict=jsonable(report.ideal_verdict),
        kernel_field=report.kernel_field.label() if report.kernel_field is not None else None,
        classification=classification_model(report.classification) if report.classification else None,
        undefined=dict(report.undefined),
    )


def verdict_model(verdict: EquivalenceVerdict) -> EquivalenceVerdictModel:
    return EquivalenceVerdictModel(
        outcome=verdict.outcome.value,
        theorem_used=verdict.theorem_used,
        evidence=jsonable(verdict.evidence),
    )


def build_report(
    command: str,
    input: Dict[str, Any],
    report: Optional[InvariantReport] = None,
    verdict: Optional[EquivalenceVerdict] = None,
    result: Optional[Dict[str, Any]] = None,
    timings: Optional[Dict[str, float]] = None,
) -> Dict[str, Any]:
    document = ReportJSON(
        schema_version=SCHEMA_VERSION,
        command=command,
        input=jsonable(input),
        report=invariant_report_model(report) if report is not None else None,
        verdict=verdict_model(verdict) if verdict is not None else None,
        result=jsonable(result) if result is not None else None,
        timings=timings,
    )
    return document.model_dump(mode="json")


# --- Schema ---


@lru_cache(maxsize=1)
def _validator() -> Draft202012Validator:
    schema = json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


def schema_errors(document: Dict[str, Any]) -> List[str]:
    return [
        f"{'/'.join(str(p) for p in error.absolute_path) or '<root>'}: {error.message}"
        for error in _validator().iter_errors(document)
    ]


def validate_report(document: Dict[str, Any]) -> None:
    """Raise jsonschema.ValidationError when the document does not match the shipped schema."""
    _validator().validate(document)


def dumps(document: Dict[str, Any]) -> str:
    return json.dumps(document, indent=2, ensure_ascii=False)


# --- Text output ---


def _text_lines(value: Any, prefix: str) -> List[str]:
    if isinstance(value, dict):
        lines: List[str] = []
        for key, item in value.items():
            if item is None or item == {}:
                continue
            lines.extend(_text_lines(item, f"{prefix}.{key}" if prefix else key))
        return lines
    if isinstance(value, list) and value and all(isinstance(v, list) for v in value):
        return [f"{prefix}: " + "; ".join("(" + ", ".join(str(x) for x in v) + ")" for v in value)]
    if isinstance(value, list):
        return [f"{prefix}: " + ", ".join(str(v) for v in value)]
    return [f"{prefix}: {value}"]


def render_text(document: Dict[str, Any]) -> str:
    """Flat 'key: value' lines of a report, skipping the input echo and empty fields."""
    body = {k: v for k, v in document.items() if k not in ("schema_version", "input")}
    return "\n".join(_text_lines(body, "")) + "\n"
