"""Read-only SQLite execution."""

from __future__ import annotations

import sqlite3
import time
from pathlib import Path

from polyroute.errors import BackendError, ExecTimeout, QuerySyntax
from polyroute.execution.outcomes import ExecLimits, Rows, normalize_value

_SYNTAX_MARKERS = ("syntax error", "incomplete input", "unrecognized token")
_FETCH_CHUNK = 1000


def _connect(path: Path) -> sqlite3.Connection:
    uri = f"{path.resolve().as_uri()}?mode=ro"
    conn = sqlite3.connect(uri, uri=True, check_same_thread=False)
    conn.execute("PRAGMA query_only = ON")
    return conn


def exec_sql(path: str | Path, sql: str, limits: ExecLimits = ExecLimits()) -> Rows:
    path = Path(path)
    if not path.is_file():
        raise BackendError(f"database file not found: {path}")
    deadline = time.monotonic() + limits.timeout
    timed_out = False

    def progress() -> int:
        nonlocal timed_out
        if time.monotonic() > deadline:
            timed_out = True
            return 1
        return 0

    conn = _connect(path)
    try:
        conn.set_progress_handler(progress, 1000)
        try:
            cur = conn.execute(sql)
            rows = cur.fetchmany(limits.max_rows) if cur.description else []
        except sqlite3.OperationalError as exc:
            if timed_out:
                raise ExecTimeout(f"query exceeded {limits.timeout}s") from None
            msg = str(exc)
            if any(marker in msg for marker in _SYNTAX_MARKERS):
                raise QuerySyntax(msg) from None
            raise BackendError(msg) from None
        except (sqlite3.Error, sqlite3.Warning) as exc:
            raise BackendError(str(exc)) from None
        if cur.description is None:
            raise BackendError("statement returned no result set")
        total: int | None = len(rows)
        truncated = False
        if len(rows) == limits.max_rows:
            # count the overflow so verbalization can report it; best effort
            try:
                while chunk := cur.fetchmany(_FETCH_CHUNK):
                    total += len(chunk)
            except sqlite3.Error:
                total = None
            truncated = total is None or total > len(rows)
        columns = tuple(d[0] for d in cur.description)
        return Rows(
            columns,
            tuple(tuple(normalize_value(v) for v in row) for row in rows),
            truncated,
            total,
        )
    finally:
        conn.close()
