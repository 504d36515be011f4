"""
Martinet Engine - Metrics Endpoint

GET /metrics - Analysis counts, engine time and verdicts
"""

from fastapi import APIRouter
from metrics import snapshot

router = APIRouter(tags=["Metrics"])


@router.get(
    "/metrics",
    summary="Service metrics",
    description="Counts analyses per endpoint with their total engine time, and equivalence outcomes. Counters are per process.",
    responses={
        200: {
            "content": {
                "application/json": {
                    "example": {
                        "service": "martinet",
                        "uptime_seconds": 3600,
                        "requests_total": 52,
                        "analyses_total": 48,
                        "analyses": {"classify": 6, "equiv": 30, "invariants": 12},
                        "engine_seconds": {"classify": 1.204, "equiv": 41.87, "invariants": 9.315},
                        "verdicts": {"equivalent": 17, "inconclusive": 5, "not_equivalent": 8},
                        "last_request_at": "2026-10-18T09:12:44+00:00",
                    }
                }
            },
        },
    },
)
async def get_metrics():
    return snapshot()
