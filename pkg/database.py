"""
database.py — SQLite history of analysis runs.

Every `analyze --record` stores one row per run: the model it ran on, the
bounds, each property verdict and the full JSON report. The dashboard
reads the same file, so the connection runs in WAL mode. All schema
changes go through migrate().
"""

import json
import logging
import sqlite3
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Generator, Optional

import config

logger = logging.getLogger(__name__)


def _convert_timestamp(val: bytes) -> datetime:
    """CURRENT_TIMESTAMP values are UTC with no offset; fractional seconds are optional."""
    text = val.decode()
    try:
        stamp = datetime.fromisoformat(text)
    except ValueError:
        raise ValueError(f"Unreadable run timestamp: {text!r}") from None
    return stamp.replace(tzinfo=timezone.utc)


sqlite3.register_converter("TIMESTAMP", _convert_timestamp)


# ────────────────────────────────────────────────────────────
#  Connection helpers
# ────────────────────────────────────────────────────────────

def _get_connection(path: Optional[str] = None) -> sqlite3.Connection:
    db_file = Path(path or config.DATABASE_PATH)
    db_file.parent.mkdir(parents=True, exist_ok=True)

    conn = sqlite3.connect(db_file, detect_types=sqlite3.PARSE_DECLTYPES, timeout=30)
    conn.row_factory = sqlite3.Row
    # The dashboard reads while the CLI writes.
    conn.execute("PRAGMA journal_mode=WAL")
    conn.execute("PRAGMA synchronous=NORMAL")
    return conn


@contextmanager
def get_db(path: Optional[str] = None) -> Generator[sqlite3.Connection, None, None]:
    """Yield a connection; commit on success, roll back on error."""
    conn = _get_connection(path)
    try:
        yield conn
        conn.commit()
    except Exception:
        logger.warning("Run history write rolled back")
        conn.rollback()
        raise
    finally:
        conn.close()


# ────────────────────────────────────────────────────────────
#  Schema
# ────────────────────────────────────────────────────────────

_SCHEMA_SQL = """
CREATE TABLE IF NOT EXISTS runs (
    id              INTEGER PRIMARY KEY AUTOINCREMENT,
    model           TEXT NOT NULL,          -- path or name of the .vpn file
    properties      TEXT NOT NULL,          -- comma-separated, as requested
    max_configs     INTEGER NOT NULL,
    max_depth       INTEGER NOT NULL,
    dedup_mode      TEXT NOT NULL,

    -- Verdicts: 1 = holds, 0 = fails, NULL = not requested
    connectivity    INTEGER,
    soundness       INTEGER,
    validity        INTEGER,
    truncated       INTEGER NOT NULL DEFAULT 0,
    exit_code       INTEGER NOT NULL,

    nodes           INTEGER,
    complete_paths  INTEGER,
    report_json     TEXT NOT NULL,

    created_at      TIMESTAMP NOT NULL DEFAULT CURRENT_TIMESTAMP
);

CREATE INDEX IF NOT EXISTS idx_runs_created ON runs(created_at DESC);
CREATE INDEX IF NOT EXISTS idx_runs_model   ON runs(model);
"""


def migrate() -> None:
    """Initialise / migrate the schema. Safe to call on every start."""
    with get_db() as conn:
        conn.executescript(_SCHEMA_SQL)
    logger.info("Database schema OK — %s", config.DATABASE_PATH)


# ────────────────────────────────────────────────────────────
#  Runs
# ────────────────────────────────────────────────────────────

def _verdict(report: dict, name: str) -> Optional[int]:
    prop = report.get("properties", {}).get(name)
    if prop is None:
        return None
    return 1 if prop["holds"] else 0


def record_run(
    model: str,
    report: dict,
    *,
    properties: list[str],
    max_configs: int,
    max_depth: int,
    dedup_mode: str,
    exit_code: int,
) -> int:
    """Store one analysis report (as produced by AnalysisReport.to_dict) and return its run id."""
    stats = report.get("stats", {})
    with get_db() as conn:
        cur = conn.execute(
            """
            INSERT INTO runs
                (model, properties, max_configs, max_depth, dedup_mode,
                 connectivity, soundness, validity, truncated, exit_code,
                 nodes, complete_paths, report_json)
            VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
            """,
            (
                model, ",".join(properties), max_configs, max_depth, dedup_mode,
                _verdict(report, "connectivity"),
                _verdict(report, "soundness"),
                _verdict(report, "validity"),
                int(bool(report.get("truncated"))),
                exit_code,
                stats.get("nodes"),
                stats.get("complete_paths"),
                json.dumps(report, sort_keys=True),
            ),
        )
        run_id = cur.lastrowid
    logger.info("Recorded run #%d for %s", run_id, model)
    return run_id


def get_recent_runs(limit: int = 50) -> list[sqlite3.Row]:
    """Newest first, without the report body."""
    with get_db() as conn:
        return conn.execute(
            """
            SELECT id, model, properties, connectivity, soundness, validity,
                   truncated, exit_code, nodes, complete_paths, created_at
            FROM runs
            ORDER BY id DESC
            LIMIT ?
            """,
            (limit,),
        ).fetchall()


def get_run(run_id: int) -> Optional[dict]:
    """One run with its decoded report under "report", or None."""
    with get_db() as conn:
        row = conn.execute("SELECT * FROM runs WHERE id = ?", (run_id,)).fetchone()
    if row is None:
        return None
    out = dict(row)
    out["report"] = json.loads(out.pop("report_json"))
    return out
