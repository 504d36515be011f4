"""
Martinet Engine - API Service

FastAPI app over the exact engine: analysis, health and metrics routes,
with per-request timing logged by the middleware.
"""

import logging
import time

from api import router
from config import API_VERSION, DEFAULT_JET_ORDER, LOG_LEVEL, SERVICE_DESCRIPTION, SERVICE_NAME
from fastapi import FastAPI, Request
from metrics import record_request

# --- Logging ---
logging.basicConfig(level=LOG_LEVEL, format="%(message)s")
logger = logging.getLogger(__name__)

# --- App ---
app = FastAPI(
    title=SERVICE_NAME,
    description=SERVICE_DESCRIPTION,
    version=API_VERSION,
)
logger.info(f"startup: version={API_VERSION} default_jet={DEFAULT_JET_ORDER}")


# --- Metrics middleware ---
@app.middleware("http")
async def metrics_middleware(request: Request, call_next):
    started = time.perf_counter()
    response = await call_next(request)
    elapsed_ms = (time.perf_counter() - started) * 1000
    record_request(request.url.path)
    logger.debug(
        f"request: method={request.method} path={request.url.path} "
        f"status={response.status_code} elapsed_ms={elapsed_ms:.1f}"
    )
    return response


# --- Include routes ---
app.include_router(router)
