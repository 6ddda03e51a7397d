import json
import logging
import sqlite3
from datetime import datetime

import pandas as pd

logger = logging.getLogger(__name__)


def is_postgres(url):
    """Check if the ledger lives in PostgreSQL"""
    return url.startswith('postgresql://') or url.startswith('postgres://')


def get_param_placeholder(url):
    """Get the correct parameter placeholder for the database type"""
    return '%s' if is_postgres(url) else '?'


def get_db_connection(url):
    """Get database connection - supports both SQLite and PostgreSQL"""
    if is_postgres(url):
        import psycopg2
        from psycopg2.extras import RealDictCursor
        return psycopg2.connect(url, cursor_factory=RealDictCursor)
    conn = sqlite3.connect(url)
    conn.row_factory = sqlite3.Row
    return conn


def init_database(url):
    """Create the run ledger table"""
    if is_postgres(url):
        id_column = "id SERIAL PRIMARY KEY"
    else:
        id_column = "id INTEGER PRIMARY KEY AUTOINCREMENT"
    conn = get_db_connection(url)
    try:
        cursor = conn.cursor()
        cursor.execute(f"""
            CREATE TABLE IF NOT EXISTS run_log (
                {id_column},
                command VARCHAR(50) NOT NULL,
                details TEXT,
                exit_code INTEGER,
                seed BIGINT,
                created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
            )
        """)
        conn.commit()
    finally:
        conn.close()


def log_run(url, command, details=None, exit_code=0, seed=None):
    """Append one command run to the ledger; failures are logged, never raised"""
    try:
        init_database(url)
        conn = get_db_connection(url)
        try:
            cursor = conn.cursor()
            placeholder = get_param_placeholder(url)
            cursor.execute(f"""
                INSERT INTO run_log (command, details, exit_code, seed, created_at)
                VALUES ({placeholder}, {placeholder}, {placeholder}, {placeholder}, {placeholder})
            """, (command, json.dumps(details or {}, default=str), exit_code, seed, datetime.now().isoformat(sep=" ")))
            conn.commit()
        finally:
            conn.close()
        return True

    except Exception as e:
        logger.error(f"Ledger error: {str(e)}")
        return False


def get_recent_runs(url, limit=20):
    """Most recent runs as a DataFrame, newest first"""
    init_database(url)
    conn = get_db_connection(url)
    try:
        cursor = conn.cursor()
        placeholder = get_param_placeholder(url)
        cursor.execute(f"""
            SELECT id, command, exit_code, seed, details, created_at FROM run_log
            ORDER BY id DESC
            LIMIT {placeholder}
        """, (limit,))
        rows = [dict(row) for row in cursor.fetchall()]
    finally:
        conn.close()
    return pd.DataFrame(rows, columns=["id", "command", "exit_code", "seed", "details", "created_at"])
