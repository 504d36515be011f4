"""
Martinet Engine - Schemas

Pydantic models for request/response validation, Swagger documentation and
the JSON report written by the command line.
"""

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

OMEGA0_EXAMPLE = "d(p1*(dx - z*dy)) + x*dx^dy"
OMEGA1_EXAMPLE = "d(p1*(dy + z*dx)) + x*dx^dy"

# --- Request Models ---


class FormRequest(BaseModel):
    """A single form germ on a chart."""

    chart: List[str] = Field(
        ...,
        min_length=1,
        description="Ordered coordinate names",
    )
    weights: Optional[List[int]] = Field(
        None,
        description="Optional positive integer weights, one per coordinate",
    )
    jet_order: Optional[int] = Field(
        None,
        ge=1,
        le=16,
        description="Working jet order (defaults to MARTINET_JET_ORDER)",
    )
    form: str = Field(
        ...,
        min_length=1,
        description="Form expression in the form-file syntax",
    )

    model_config = {
        "json_schema_extra": {
            "example": {"chart": ["p1", "x", "y", "z"], "weights": None, "jet_order": 8, "form": OMEGA0_EXAMPLE}
        }
    }


class EquivalenceRequest(BaseModel):
    """Two form germs on a common chart."""

    chart: List[str] = Field(
        ...,
        min_length=1,
        description="Ordered coordinate names",
    )
    weights: Optional[List[int]] = Field(
        None,
        description="Optional positive integer weights, one per coordinate",
    )
    jet_order: Optional[int] = Field(
        None,
        ge=1,
        le=16,
        description="Working jet order (defaults to MARTINET_JET_ORDER)",
    )
    form0: str = Field(..., min_length=1, description="First form expression")
    form1: str = Field(..., min_length=1, description="Second form expression")
    category: Literal["C", "R"] = Field(
        "R",
        description="Equivalence category: complex-analytic (C) or real-analytic (R)",
    )
    seed: Optional[int] = Field(
        None,
        description="Seed for randomized certificates (MARTINET_SEED overrides it)",
    )

    model_config = {
        "json_schema_extra": {
            "example": {
                "chart": ["p1", "x", "y", "z"],
                "jet_order": 8,
                "form0": OMEGA0_EXAMPLE,
                "form1": OMEGA1_EXAMPLE,
                "category": "R",
            }
        }
    }


# --- Response Models ---


class ClassificationModel(BaseModel):
    """Σ₂₂₀ / Σ₂₂₁ type at the origin."""

    label: Literal["hyperbolic", "elliptic", "parabolic"] = Field(..., description="Singularity type of Σ₂₂")
    discriminant: str = Field(..., description="Rational discriminant as 'p/q'")
    template: bool = Field(..., description="Whether σ already has the normal-form shape in this chart")


class InvariantReportModel(BaseModel):
    """Invariant record of a closed 2-form germ."""

    martinet_function: str = Field(..., description="f with ω^n = f·Ω")
    regime: Literal["nonsingular", "singular", "sigma20", "structurally_smooth"] = Field(
        ..., description="Regime of the germ at the origin"
    )
    structurally_smooth: bool = Field(..., description="df(0) ≠ 0 on Σ₂")
    normal_var: Optional[str] = Field(None, description="Coordinate p with Σ₂ = {p = 0} after the chart move")
    sigma: Optional[str] = Field(None, description="Restriction σ = ι*ω")
    rank_sigma_0: Optional[int] = Field(None, description="Rank of σ at 0")
    kernel_basis: Optional[List[List[str]]] = Field(None, description="Canonical basis of ker ω^(n-1)|₀")
    kernel_cross_check: Optional[bool] = Field(None, description="Transversal description agrees with the kernel")
    orientation_sign: Optional[int] = Field(None, description="Canonical orientation against the coordinate frame")
    dim_span_j1: Optional[int] = Field(None, description="dim span of 1-jets of σ^(n-1) coefficients")
    sigma22_incidence: Optional[int] = Field(None, description="dim(ker ω^(n-1)|₀ ∩ T₀Σ₂₂)")
    ideal_verdict: Optional[str] = Field(None, description="Regular-sequence verdict for I(σ)")
    kernel_field: Optional[str] = Field(None, description="Kernel field search outcome")
    classification: Optional[ClassificationModel] = Field(None, description="Σ₂₂₀ / Σ₂₂₁ type")
    undefined: Dict[str, str] = Field(default_factory=dict, description="Reason for each undefined invariant")

    model_config = {
        "json_schema_extra": {
            "example": {
                "martinet_function": "2*p1",
                "regime": "structurally_smooth",
                "structurally_smooth": True,
                "normal_var": "p1",
                "sigma": "x*dx^dy",
                "rank_sigma_0": 0,
                "kernel_basis": [["0", "0", "1", "0"], ["0", "0", "0", "1"]],
                "kernel_cross_check": True,
                "orientation_sign": 1,
                "dim_span_j1": 1,
                "sigma22_incidence": 2,
                "ideal_verdict": "inconclusive",
                "kernel_field": "exists",
                "classification": None,
                "undefined": {"classification": "dim span j¹σ^(n-1) = 1, Σ₂₂ is not a smooth curve"},
            }
        }
    }


class EquivalenceVerdictModel(BaseModel):
    """Outcome of an equivalence decision."""

    outcome: Literal["equivalent", "not_equivalent", "inconclusive"] = Field(..., description="Decision")
    theorem_used: Optional[str] = Field(None, description="Theorem certifying an equivalent outcome")
    evidence: Dict[str, Any] = Field(default_factory=dict, description="Invariants and certificates behind it")

    model_config = {
        "json_schema_extra": {
            "example": {
                "outcome": "not_equivalent",
                "theorem_used": None,
                "evidence": {
                    "invariant": "kernel",
                    "value0": [["0", "0", "1", "0"], ["0", "0", "0", "1"]],
                    "value1": [["0", "1", "0", "0"], ["0", "0", "0", "1"]],
                    "incidence0": 2,
                    "incidence1": 1,
                },
            }
        }
    }


class ReportJSON(BaseModel):
    """Document written by the command line with --json."""

    schema_version: str = Field(..., description="Version of schema/report.json")
    command: str = Field(..., description="Subcommand that produced the report")
    input: Dict[str, Any] = Field(..., description="Echo of chart, jet order and form texts")
    report: Optional[InvariantReportModel] = Field(None, description="Invariant record")
    verdict: Optional[EquivalenceVerdictModel] = Field(None, description="Equivalence decision")
    result: Optional[Dict[str, Any]] = Field(None, description="Command-specific output")
    timings: Optional[Dict[str, float]] = Field(None, description="Wall-clock seconds, only with --timings")
