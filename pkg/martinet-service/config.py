"""
Martinet Engine - Configuration

All environment variables, constants, and settings in one place.
"""

import os
from pathlib import Path

# --- Paths ---
REPO_ROOT = Path(__file__).resolve().parent.parent
EXAMPLES_DIR = REPO_ROOT / "ex"
SCHEMA_PATH = REPO_ROOT / "schema" / "report.json"

# --- Logging ---
LOG_LEVEL = os.environ.get("MARTINET_LOG_LEVEL", "INFO").upper()

# --- Exact engine ---
DEFAULT_JET_ORDER = int(os.environ.get("MARTINET_JET_ORDER", "8"))
DEFAULT_SEED = int(os.environ.get("MARTINET_SEED", "0"))
KERNEL_FIELD_MAX_ORDER = int(os.environ.get("MARTINET_KERNEL_FIELD_MAX_ORDER", "8"))
CONTACT_DEGREE_BOUND = int(os.environ.get("MARTINET_CONTACT_DEGREE_BOUND", "6"))
REGULAR_SEQUENCE_TRIALS = int(os.environ.get("MARTINET_REGULAR_TRIALS", "8"))
NAKAYAMA_MAX_POWER = int(os.environ.get("MARTINET_NAKAYAMA_MAX_POWER", "4"))
MAX_SEARCH_WEIGHT = int(os.environ.get("MARTINET_MAX_SEARCH_WEIGHT", "4"))
RANDOM_LINEAR_FORM_RANGE = 5  # coefficients of random linear forms drawn from [-R, R]

# --- Moser verification ---
MOSER_BOX = float(os.environ.get("MARTINET_MOSER_BOX", "0.1"))
MOSER_TOL = float(os.environ.get("MARTINET_MOSER_TOL", "1e-6"))
MOSER_GRID = int(os.environ.get("MARTINET_MOSER_GRID", "5"))
MOSER_STEPS = int(os.environ.get("MARTINET_MOSER_STEPS", "200"))
JACOBIAN_DET_FLOOR = float(os.environ.get("MARTINET_JACOBIAN_DET_FLOOR", "1e-8"))
DENSITY_FLOOR = float(os.environ.get("MARTINET_DENSITY_FLOOR", "1e-12"))
MOSER_TRUST_FACTOR = 2.0  # trajectories may leave the sample box by this factor

# --- Harness ---
HARNESS_TRIALS = int(os.environ.get("MARTINET_HARNESS_TRIALS", "50"))
HARNESS_JET_ORDER = int(os.environ.get("MARTINET_HARNESS_JET_ORDER", "4"))
HARNESS_MAX_DEGREE = 3
HARNESS_SPARSITY = 0.1

# --- Report ---
SCHEMA_VERSION = "1.0"

# --- API Configuration ---
API_VERSION = "1.0.0"

# --- Service Info ---
SERVICE_NAME = "Martinet Engine"
SERVICE_DESCRIPTION = """
## Overview
Exact invariants and equivalence decisions for singular symplectic form germs.

## Features
- Martinet hypersurface, restriction, kernel and canonical orientation
- Sigma_220 / Sigma_221 classification
- Equivalence decisions by sufficient-condition theorems, with evidence
"""


def seed_from_env(cli_seed: int) -> int:
    """MARTINET_SEED, when set, overrides a seed given on the command line."""
    raw = os.environ.get("MARTINET_SEED")
    if raw is None or raw.strip() == "":
        return cli_seed
    return int(raw)
