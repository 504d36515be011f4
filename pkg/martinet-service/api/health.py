"""
Martinet Engine - Health Endpoint

GET /health - Service status and engine readiness
"""

from config import API_VERSION, DEFAULT_JET_ORDER, EXAMPLES_DIR, SCHEMA_PATH
from fastapi import APIRouter
from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    """Health check response."""

    status: str = Field(..., description="healthy, or degraded when the report schema is missing")
    service: str
    version: str
    default_jet_order: int
    schema_available: bool
    examples_available: bool

    model_config = {
        "json_schema_extra": {
            "example": {
                "status": "healthy",
                "service": "martinet",
                "version": "1.0.0",
                "default_jet_order": 8,
                "schema_available": True,
                "examples_available": True,
            }
        }
    }


router = APIRouter(tags=["Health"])


@router.get(
    "/health",
    summary="Health check",
    description="Reports the service version, the default jet order and whether the report schema and shipped examples are on disk.",
    response_model=HealthResponse,
)
async def health():
    schema_available = SCHEMA_PATH.is_file()
    return HealthResponse(
        status="healthy" if schema_available else "degraded",
        service="martinet",
        version=API_VERSION,
        default_jet_order=DEFAULT_JET_ORDER,
        schema_available=schema_available,
        examples_available=EXAMPLES_DIR.is_dir(),
    )
