"""
Martinet Engine - Analysis Endpoints

POST /invariants - Invariant report of a closed 2-form germ
POST /equiv      - Equivalence decision for two germs
POST /classify   - Σ₂₂₀ / Σ₂₂₁ classification
"""

import logging
import time
from typing import Callable, Optional, Tuple

from config import DEFAULT_JET_ORDER, DEFAULT_SEED, seed_from_env
from dsl import parse
from errors import DegreeError, MartinetError, PreconditionError
from fastapi import APIRouter
from fastapi.responses import JSONResponse
from invariants import classify_sigma220, full_report, martinet
from metrics import record_analysis
from normal_form import Category, decide_equivalence
from report import classification_model, invariant_report_model, verdict_model
from response import INPUT_ERROR_CODES, APIResponse, ErrorCodes, error_response, success_response
from scalar_poly import Chart
from schemas import EquivalenceRequest, FormRequest

# --- Logging ---
logger = logging.getLogger(__name__)

# --- Router ---
router = APIRouter(tags=["Analysis"])

ERROR_RESPONSES = {
    400: {
        "description": "Malformed form, unknown variable, degree mismatch or non-closed form",
        "content": {
            "application/json": {
                "example": {
                    "success": False,
                    "data": None,
                    "error": {"code": "UNKNOWN_VARIABLE", "message": "1:3: unknown variable 'w' in chart ('p1', 'x', 'y', 'z')"},
                }
            }
        },
    },
    422: {
        "description": "Mathematical precondition failed",
        "content": {
            "application/json": {
                "example": {
                    "success": False,
                    "data": None,
                    "error": {"code": "PRECONDITION_FAILED", "message": "template mismatch: rank σ|₀ = 2, need 0"},
                }
            }
        },
    },
}


def _chart(names, weights: Optional[list]) -> Chart:
    return Chart(tuple(names), tuple(weights) if weights else None)


def _two_form(text: str, chart: Chart, jet_order: int):
    form = parse(text, chart, jet_order)
    if form.degree != 2:
        raise DegreeError(f"expected a 2-form, got degree {form.degree}")
    return form


def _run(endpoint: str, action: Callable[[], Tuple[dict, Optional[str]]]):
    try:
        started = time.perf_counter()
        data, outcome = action()
        record_analysis(endpoint, time.perf_counter() - started, outcome)
        return success_response(data)
    except MartinetError as exc:
        status = 400 if exc.code in INPUT_ERROR_CODES else 422
        logger.warning(f"{endpoint}: rejected code={exc.code} message={exc}")
        return JSONResponse(content=error_response(exc.code, str(exc)), status_code=status)
    except Exception as exc:
        logger.exception(f"{endpoint}: unexpected failure", extra={"endpoint": endpoint})
        return JSONResponse(
            content=error_response(ErrorCodes.INTERNAL_ERROR, f"unexpected failure: {exc}"),
            status_code=500,
        )


@router.post(
    "/invariants",
    summary="Invariant report",
    description="""
Computes the invariant record of a closed 2-form germ at 0.

## Report
- Martinet function f with ω^n = f·Ω and the regime at 0
- Restriction σ to a structurally smooth Σ₂, rank σ|₀
- Canonical basis of ker ω^(n-1)|₀, canonical orientation sign
- Jet span of σ^(n-1), Σ₂₂ incidence, I(σ) verdict, kernel field search
- Σ₂₂₀ / Σ₂₂₁ classification

Invariants that do not apply are listed under `undefined` with the reason.
    """,
    response_model=APIResponse,
    responses=ERROR_RESPONSES,
)
def invariants(request: FormRequest):
    def action() -> Tuple[dict, Optional[str]]:
        jet = request.jet_order or DEFAULT_JET_ORDER
        omega = _two_form(request.form, _chart(request.chart, request.weights), jet)
        report = full_report(omega, seed=seed_from_env(DEFAULT_SEED))
        logger.info(f"invariants: regime={report.regime} jet={jet}")
        return invariant_report_model(report).model_dump(mode="json"), None

    return _run("invariants", action)


@router.post(
    "/equiv",
    summary="Equivalence decision",
    description="""
Decides whether two closed 2-form germs on the same chart are equivalent.

- `equivalent` names the theorem used
- `not_equivalent` names the differing invariant with both values
- `inconclusive` lists the checks that failed
    """,
    response_model=APIResponse,
    responses=ERROR_RESPONSES,
)
def equiv(request: EquivalenceRequest):
    def action() -> Tuple[dict, Optional[str]]:
        jet = request.jet_order or DEFAULT_JET_ORDER
        chart = _chart(request.chart, request.weights)
        omega0 = _two_form(request.form0, chart, jet)
        omega1 = _two_form(request.form1, chart, jet)
        seed = seed_from_env(request.seed if request.seed is not None else DEFAULT_SEED)
        verdict = decide_equivalence(omega0, omega1, Category(request.category), seed)
        logger.info(f"equiv: outcome={verdict.outcome.value} theorem={verdict.theorem_used}")
        return verdict_model(verdict).model_dump(mode="json"), verdict.outcome.value

    return _run("equiv", action)


@router.post(
    "/classify",
    summary="Σ₂₂₀ / Σ₂₂₁ classification",
    description="Hyperbolic, elliptic or parabolic type of a germ with structurally smooth Σ₂ and rank σ|₀ = 2n − 4.",
    response_model=APIResponse,
    responses=ERROR_RESPONSES,
)
def classify(request: FormRequest):
    def action() -> Tuple[dict, Optional[str]]:
        jet = request.jet_order or DEFAULT_JET_ORDER
        omega = _two_form(request.form, _chart(request.chart, request.weights), jet)
        data = martinet(omega)
        if not data.structurally_smooth:
            raise PreconditionError(
                f"classification needs a structurally smooth Σ₂, regime is {data.regime.value}"
            )
        result = classification_model(classify_sigma220(data.sigma))
        return result.model_dump(mode="json"), None

    return _run("classify", action)
