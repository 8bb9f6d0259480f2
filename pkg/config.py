"""
config.py — Central configuration for vpn-verify.

All tuneable settings live here. Exploration bounds and analysis modes
are defaults that the CLI flags override per run; deploy-specific values
(database path, log level, worker count) are read from the environment
or from a .env file via python-dotenv.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load .env from the project root (works both locally and in Docker)
load_dotenv(Path(__file__).parent / ".env")


# ════════════════════════════════════════════════════════════
#  EXPLORATION BOUNDS
#  Hitting any bound marks the tree as truncated. Truncation is
#  always reported; verdicts then only hold within the explored space.
# ════════════════════════════════════════════════════════════

# Maximum number of configuration-tree nodes.
MAX_CONFIGS: int = int(os.getenv("VPN_MAX_CONFIGS", "100000"))

# Maximum firing depth from the initial configuration.
MAX_DEPTH: int = int(os.getenv("VPN_MAX_DEPTH", "200"))

# Duplicate policy: "global" ends a branch at any configuration seen
# before; "path" only at one seen on the same root path.
DEDUP_MODE: str = "global"

# Threads used to expand one breadth-first level. 1 = sequential.
# Results are identical for any worker count.
EXPLORE_WORKERS: int = int(os.getenv("VPN_WORKERS", "1"))

# Multiplicity at which a replenished place is held. Large enough that
# no transition in a desk-scale model can drain it.
REPLENISH_LEVEL: int = 1 << 16


# ════════════════════════════════════════════════════════════
#  LANGUAGES
# ════════════════════════════════════════════════════════════

# Longest firing sequence materialized in the behaviour languages.
MAX_LANGUAGE_LEN: int = 12

# Hard cap on the number of sequences per language.
MAX_SEQUENCES: int = 10_000

# "root": sequences start at the initial configuration.
# "any":  sequences start at every configuration of the tree.
LANGUAGE_ANCHOR: str = "root"


# ════════════════════════════════════════════════════════════
#  ANALYSIS
# ════════════════════════════════════════════════════════════

# "simultaneous": one reachable configuration marks every final place.
# "independent":  each final place is marked in some reachable configuration.
FINAL_MODE: str = "simultaneous"


# ════════════════════════════════════════════════════════════
#  HISTORY
# ════════════════════════════════════════════════════════════

# Set True to record every `analyze` report without passing --record.
HISTORY_ENABLED: bool = os.getenv("VPN_HISTORY", "").lower() in ("1", "true", "yes")

DATABASE_PATH: str = os.getenv("DATABASE_PATH", "data/runs.db")


# ════════════════════════════════════════════════════════════
#  REPORTS / EXPORTS
# ════════════════════════════════════════════════════════════

REPORT_SCHEMA_VERSION: int = 1
GRAPH_SCHEMA_VERSION: int = 1


# ════════════════════════════════════════════════════════════
#  DASHBOARD
# ════════════════════════════════════════════════════════════

DASHBOARD_HOST: str = os.getenv("DASHBOARD_HOST", "0.0.0.0")
DASHBOARD_PORT: int = int(os.getenv("DASHBOARD_PORT", "5000"))

# Runs listed on the dashboard index page.
DASHBOARD_RECENT_RUNS: int = 50


# ════════════════════════════════════════════════════════════
#  LOGGING
# ════════════════════════════════════════════════════════════

LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT: str = "%(asctime)s [%(levelname)s] %(name)s — %(message)s"
LOG_DATE_FORMAT: str = "%Y-%m-%d %H:%M:%S"
