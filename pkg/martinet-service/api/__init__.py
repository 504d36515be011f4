"""
Martinet Engine - API Routes

Analysis, health and metrics routers under one APIRouter.
"""

from api.analysis import router as analysis_router
from api.health import router as health_router
from api.metrics import router as metrics_router
from fastapi import APIRouter

router = APIRouter()
router.include_router(analysis_router)
router.include_router(health_router)
router.include_router(metrics_router)
