import json

import database


def test_backend_detection():
    assert database.is_postgres("postgresql://localhost/runs")
    assert database.get_param_placeholder("postgres://localhost/runs") == "%s"
    assert database.get_param_placeholder("runs.db") == "?"


def test_log_and_read_runs(tmp_path):
    url = str(tmp_path / "ledger.db")
    assert database.log_run(url, "simulate", {"series": 10}, 0, 7)
    assert database.log_run(url, "verify", {"failed": ["x"]}, 1, 0)
    runs = database.get_recent_runs(url)
    assert list(runs["command"]) == ["verify", "simulate"]
    assert list(runs["exit_code"]) == [1, 0]
    assert json.loads(runs["details"].iloc[1]) == {"series": 10}
    assert len(database.get_recent_runs(url, limit=1)) == 1


def test_ledger_failures_are_logged_not_raised(tmp_path, caplog):
    url = str(tmp_path / "missing" / "ledger.db")
    assert database.log_run(url, "simulate") is False
    assert "Ledger error" in caplog.text
