"""
Martinet Engine - Metrics Module

Per-process counters: requests, analyses per endpoint, equivalence verdicts
and time spent in the exact engine.
"""

import time
from datetime import datetime, timezone
from typing import Dict, Optional

START_TIME = time.time()
REQUESTS_TOTAL = 0
ANALYSES: Dict[str, int] = {}
ENGINE_SECONDS: Dict[str, float] = {}
VERDICTS: Dict[str, int] = {}
LAST_REQUEST_AT: Optional[str] = None

# Routes that are not analyses
UNCOUNTED_PREFIXES = ("/health", "/metrics", "/docs", "/openapi.json")


def record_request(path: str) -> None:
    global REQUESTS_TOTAL, LAST_REQUEST_AT
    if path.startswith(UNCOUNTED_PREFIXES):
        return
    REQUESTS_TOTAL += 1
    LAST_REQUEST_AT = datetime.now(timezone.utc).isoformat()


def record_analysis(endpoint: str, elapsed: float, outcome: Optional[str] = None) -> None:
    """
    Count a completed analysis and its engine time.
    Equivalence decisions also count their outcome.
    """
    ANALYSES[endpoint] = ANALYSES.get(endpoint, 0) + 1
    ENGINE_SECONDS[endpoint] = ENGINE_SECONDS.get(endpoint, 0.0) + elapsed
    if outcome is not None:
        VERDICTS[outcome] = VERDICTS.get(outcome, 0) + 1


def reset() -> None:
    global REQUESTS_TOTAL, LAST_REQUEST_AT
    REQUESTS_TOTAL = 0
    LAST_REQUEST_AT = None
    ANALYSES.clear()
    ENGINE_SECONDS.clear()
    VERDICTS.clear()


def snapshot() -> dict:
    return {
        "service": "martinet",
        "uptime_seconds": int(time.time() - START_TIME),
        "requests_total": REQUESTS_TOTAL,
        "analyses_total": sum(ANALYSES.values()),
        "analyses": dict(sorted(ANALYSES.items())),
        "engine_seconds": {k: round(v, 3) for k, v in sorted(ENGINE_SECONDS.items())},
        "verdicts": dict(sorted(VERDICTS.items())),
        "last_request_at": LAST_REQUEST_AT,
    }
