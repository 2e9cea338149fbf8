"""
Runtime configuration loaded from the environment (.env supported)
"""
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

TOOL_NAME = "gon"
TOOL_VERSION = "0.3.0"

SERVICES_DIR = Path(__file__).parent

# Task pool size; capped so desk machines stay responsive
GON_THREADS = int(os.getenv("GON_THREADS", str(min(os.cpu_count() or 1, 8))))

GON_GAMMA_TABLE = Path(os.getenv("GON_GAMMA_TABLE", str(SERVICES_DIR / "gamma_table.json")))

# Hypothesis/denominator reading used by the Woods bound: "lemma52" or "literal"
GON_WOODS_VARIANT = os.getenv("GON_WOODS_VARIANT", "lemma52")

_c1 = os.getenv("GON_C1")
GON_C1: Optional[float] = float(_c1) if _c1 else None

GON_LOG_LEVEL = os.getenv("GON_LOG_LEVEL", "WARNING").upper()

# Exactness caps
GON_ENUM_DIM_CAP = int(os.getenv("GON_ENUM_DIM_CAP", "12"))
GON_ALPHA_DIM_CAP = int(os.getenv("GON_ALPHA_DIM_CAP", "8"))
GON_COVRAD_DIM_CAP = int(os.getenv("GON_COVRAD_DIM_CAP", "6"))
GON_VERIFY_DIM_CAP = int(os.getenv("GON_VERIFY_DIM_CAP", "7"))
GON_ENUM_MAX_VECTORS = int(os.getenv("GON_ENUM_MAX_VECTORS", "200000"))
GON_DELTA_MEMBER_LIMIT = int(os.getenv("GON_DELTA_MEMBER_LIMIT", "10000"))

# Tolerances shared across modules
MEMBERSHIP_TOL = 1e-6
STABILITY_TOL = 1e-9
RATIONAL_RETRY_BAND = 1e-7
