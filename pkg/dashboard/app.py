"""
dashboard/app.py — Read-only Flask viewer for recorded analysis runs.

Runs are written by `cli.py analyze --record` into the same SQLite file
this app reads. Start it with:

    python dashboard/app.py

and visit http://localhost:5000
"""

import sys
import os

# Ensure the project root is on the path when running this file directly
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from flask import Flask, render_template, jsonify, abort
import config
import database

app = Flask(__name__)

# database paths whose schema is already in place
_migrated: set[str] = set()


@app.before_request
def ensure_schema():
    if config.DATABASE_PATH not in _migrated:
        database.migrate()
        _migrated.add(config.DATABASE_PATH)


@app.route("/")
def index():
    """Most recent runs, newest first."""
    runs = database.get_recent_runs(limit=config.DASHBOARD_RECENT_RUNS)
    return render_template("index.html", runs=runs)


@app.route("/run/<int:run_id>")
def run_detail(run_id: int):
    run = database.get_run(run_id)
    if run is None:
        abort(404)
    return render_template("run.html", run=run)


@app.route("/api/runs")
def api_runs():
    runs = database.get_recent_runs(limit=config.DASHBOARD_RECENT_RUNS)
    return jsonify([
        {**dict(r), "created_at": r["created_at"].isoformat() if r["created_at"] else None}
        for r in runs
    ])


@app.route("/health")
def health():
    return jsonify({"status": "ok"})


if __name__ == "__main__":
    app.run(host=config.DASHBOARD_HOST, port=config.DASHBOARD_PORT, debug=False)
