"""
Centralised configuration for geops.
All environment variables are read once at import time from os.environ / .env.
"""

import os

def _get_float(var: str, default: str) -> float:
    try:
        return float(os.getenv(var, default))
    except Exception:
        return float(default)

def _get_int(var: str, default: str) -> int:
    try:
        return int(os.getenv(var, default))
    except Exception:
        return int(default)

# ── Series truncation ─────────────────────────────────────────────────────────
DEFAULT_TRUNCATION = _get_int("DEFAULT_TRUNCATION", "50")

# ── Arithmetic diagnostics ────────────────────────────────────────────────────
GEVREY_MIN_TERMS        = _get_int("GEVREY_MIN_TERMS",          "40")
GEVREY_TAIL_START       = _get_int("GEVREY_TAIL_START",         "40")
GEVREY_SNAP_DENOMINATOR = _get_int("GEVREY_SNAP_DENOMINATOR",   "6")
RATE_CEILING            = _get_float("RATE_CEILING",            "12.0")
RATE_DRIFT_TOLERANCE    = _get_float("RATE_DRIFT_TOLERANCE",    "0.5")
GALOCHKIN_VERIFY_STEPS  = _get_int("GALOCHKIN_VERIFY_STEPS",    "3")

# ── Application ───────────────────────────────────────────────────────────────
LOG_LEVEL           = os.getenv("LOG_LEVEL",           "INFO")
LOG_FORMAT          = os.getenv("LOG_FORMAT",          "%(asctime)s %(levelname)s %(name)s - %(message)s")
SUITE_WORKERS       = _get_int("SUITE_WORKERS",        "4")

# ── Standardized paths ─────────────────────────────────────────────────────────────
# Path to the bundled suite definitions; can be overridden via env
DEFAULT_SUITES_YAML_PATH = os.getenv(
    "DEFAULT_SUITES_YAML_PATH",
    os.path.join(os.path.dirname(__file__), "..", "suites.yaml")
)
